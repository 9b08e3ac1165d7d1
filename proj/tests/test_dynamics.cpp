#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geoflock/analysis.hpp"
#include "geoflock/dynamics.hpp"
#include "geoflock/errors.hpp"

using namespace geoflock;
using std::numbers::pi;

namespace {

const ManifoldSpace S1 = ManifoldSpace::circle();
const ManifoldSpace S2 = ManifoldSpace::sphere(2);

SimConfig particle_cfg(const ManifoldSpace &s, std::size_t n, double t_end) {
    SimConfig c;
    c.space = s;
    c.kernel = KernelSpec::midpoint(s);
    c.n_particles = n;
    c.t_end = t_end;
    c.record_interval = 0.5;
    c.seed = 7;
    return c;
}

SimConfig grid_cfg(int M, double t_end) {
    SimConfig c;
    c.space = S1;
    c.kernel = KernelSpec::midpoint(S1);
    c.grid_size = M;
    c.dt = 0.01;
    c.t_end = t_end;
    c.record_interval = 0.1;
    return c;
}

bool same_points(const std::vector<Point> &a, const std::vector<Point> &b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k].coords != b[k].coords) return false;
    return true;
}

} // namespace

TEST_CASE("record times") {
    const auto t = record_times(1.0, 0.25);
    REQUIRE(t.size() == 5);
    CHECK(t.back() == doctest::Approx(1.0));
    CHECK(record_times(0.9, 0.25).size() == 4);
    CHECK_THROWS_AS(record_times(1.0, 0.0), UsageError);
}

TEST_CASE("initial particles") {
    Rng rng = make_stream(50, 0);
    SimConfig c = particle_cfg(S1, 10, 1.0);
    c.init.kind = InitSpec::Kind::Atoms;
    c.init.atoms = {circle_point(0), circle_point(1), circle_point(2)};
    c.init.weights = {0.5, 0.25, 0.25};
    const auto pts = initial_particles(c, rng);
    REQUIRE(pts.size() == 10);
    int at0 = 0;
    for (const auto &p : pts) at0 += p.coords(0) == 0.0;
    CHECK(at0 == 5);

    SimConfig cap = particle_cfg(S2, 500, 1.0);
    cap.init.kind = InitSpec::Kind::Cap;
    cap.init.center = sphere_point({0, 0, 1});
    cap.init.radius = 0.1;
    for (const auto &p : initial_particles(cap, rng)) CHECK(distance(S2, p, cap.init.center) <= 0.1 + 1e-12);

    SimConfig box = particle_cfg(ManifoldSpace::euclidean(1), 100, 1.0);
    box.init.kind = InitSpec::Kind::UniformBox;
    for (const auto &p : initial_particles(box, rng)) CHECK((p.coords(0) >= 0.0 && p.coords(0) <= 1.0));

    SimConfig one = particle_cfg(S1, 1, 1.0);
    CHECK_THROWS_AS(initial_particles(one, rng), UsageError);
    SimConfig bump = particle_cfg(S1, 10, 1.0);
    bump.init.kind = InitSpec::Kind::Bump;
    CHECK_THROWS_AS(initial_particles(bump, rng), UsageError);
    box.space = S1;
    box.kernel = KernelSpec::midpoint(S1);
    CHECK_THROWS_AS(initial_particles(box, rng), UsageError);
}

TEST_CASE("a dirac is invariant under the particle dynamics") {
    SimConfig c = particle_cfg(S2, 50, 3.0);
    c.init.kind = InitSpec::Kind::Point;
    c.init.center = sphere_point({0, 0.6, 0.8});
    c.keep_snapshots = true;
    const TrajectoryRecord r = simulate_replica(c, 0);
    for (std::size_t k = 0; k < r.size(); ++k) {
        CHECK(r.energy[k] == 0.0);
        for (const auto &p : r.particles[k]) CHECK(p.coords == c.init.center.coords);
    }
}

TEST_CASE("particle runs are deterministic per seed and replica") {
    SimConfig c = particle_cfg(S2, 100, 2.0);
    c.kernel = KernelSpec::parse("noisy-gamma:0.1", S2);
    c.init.kind = InitSpec::Kind::Cap;
    c.init.center = sphere_point({1, 0, 0});
    c.init.radius = 0.5;
    c.keep_snapshots = true;
    c.replicas = 3;
    const auto a = simulate_particles(c), b = simulate_particles(c);
    REQUIRE(a.size() == 3);
    for (int r = 0; r < 3; ++r) {
        CHECK(a[r].energy == b[r].energy);
        CHECK(same_points(a[r].particles.back(), b[r].particles.back()));
        CHECK(a[r].replica == r);
    }
    CHECK(a[0].energy != a[1].energy);
    CHECK(same_points(simulate_replica(c, 2).particles.back(), a[2].particles.back()));
}

TEST_CASE("euclidean second moment decays like exp(-t/2)") {
    SimConfig c = particle_cfg(ManifoldSpace::euclidean(1), 1000, 2.0);
    c.init.kind = InitSpec::Kind::UniformBox;
    c.replicas = 8;
    c.record_interval = 1.0;
    const auto recs = simulate_particles(c);
    for (std::size_t k = 1; k < 3; ++k) {
        double ratio = 0.0;
        for (const auto &r : recs) ratio += r.energy[k] / r.energy[0] / recs.size();
        CHECK(std::abs(ratio / std::exp(-0.5 * recs[0].times[k]) - 1.0) < 0.1);
    }
}

TEST_CASE("two particles on the circle meet at the midpoint") {
    const double theta = 0.6;
    SimConfig c = particle_cfg(S1, 2, 20.0);
    c.mode = UpdateMode::Pair;
    c.init.kind = InitSpec::Kind::Atoms;
    c.init.atoms = {circle_point(0.0), circle_point(theta)};
    c.init.weights = {0.5, 0.5};
    c.keep_snapshots = true;
    c.replicas = 200;
    const auto recs = simulate_particles(c);
    std::vector<double> mean(recs[0].size(), 0.0);
    for (const auto &r : recs) {
        for (std::size_t k = 0; k < r.size(); ++k) {
            const auto &p = r.particles[k];
            const bool met = p[0].coords == p[1].coords;
            if (met) CHECK(p[0].coords(0) == doctest::Approx(theta / 2));
            mean[k] += w2_to_dirac(DiscreteMeasure::uniform(S1, p), circle_point(theta / 2)) / recs.size();
        }
        CHECK(r.particles.back()[0].coords(0) == doctest::Approx(theta / 2));
    }
    for (std::size_t k = 0; k < mean.size(); ++k) CHECK(mean[k] <= pi * std::exp(-recs[0].times[k] / 4));
}

TEST_CASE("pair and single update modes keep the same per-particle rate") {
    SimConfig c = particle_cfg(ManifoldSpace::euclidean(1), 400, 1.0);
    c.init.kind = InitSpec::Kind::UniformBox;
    c.record_interval = 1.0;
    c.replicas = 8;
    double single = 0.0, pair = 0.0;
    for (const auto &r : simulate_particles(c)) single += r.energy[1] / r.energy[0] / 8;
    c.mode = UpdateMode::Pair;
    for (const auto &r : simulate_particles(c)) pair += r.energy[1] / r.energy[0] / 8;
    CHECK(single == doctest::Approx(std::exp(-0.5)).epsilon(0.1));
    CHECK(pair == doctest::Approx(std::exp(-0.5)).epsilon(0.1));
}

TEST_CASE("grid: uniform density is stationary and has energy pi^2/3") {
    SimConfig c = grid_cfg(512, 1.0);
    c.init.kind = InitSpec::Kind::Uniform;
    const GridRun run = run_circle_grid(c);
    const double u = 1.0 / (2 * pi);
    double dev = 0.0;
    for (double v : run.final_state.values) dev = std::max(dev, std::abs(v - u));
    CHECK(dev < 1e-10);
    CHECK(std::abs(run.record.energy[0] - pi * pi / 3) < 1e-4);
}

TEST_CASE("grid: single-cell density is stationary") {
    SimConfig c = grid_cfg(64, 2.0);
    c.init.kind = InitSpec::Kind::Point;
    c.init.center = circle_point(2 * pi * 10 / 64);
    const GridRun run = run_circle_grid(c);
    const GridDensity g0 = initial_grid(c.init, 64);
    for (int k = 0; k < 64; ++k) CHECK(std::abs(run.final_state.values[k] - g0.values[k]) < 1e-12);
    CHECK(run.record.energy.back() == 0.0);
}

TEST_CASE("grid: mass conserved and serial reference agrees") {
    SimConfig c = grid_cfg(128, 2.0);
    c.init.kind = InitSpec::Kind::Bump;
    const GridRun a = run_circle_grid(c, false), b = run_circle_grid(c, true);
    CHECK(std::abs(a.final_state.mass() - 1.0) < 1e-12);
    CHECK(a.max_mass_drift < 1e-12);
    for (int k = 0; k < 128; ++k) CHECK(std::abs(a.final_state.values[k] - b.final_state.values[k]) < 1e-12);
    CHECK(a.record.energy == run_circle_grid(c).record.energy);
    for (std::size_t k = 1; k < a.record.size(); ++k) CHECK(a.record.energy[k] < a.record.energy[k - 1]);
}

TEST_CASE("grid: errors") {
    SimConfig c = grid_cfg(63, 1.0);
    CHECK_THROWS_AS(run_circle_grid(c), UsageError);
    c = grid_cfg(64, 1.0);
    c.record_interval = 0.015;
    CHECK_THROWS_AS(run_circle_grid(c), UsageError);
    c = grid_cfg(64, 1.0);
    c.kernel = KernelSpec::parse("bdg:0.1", S1);
    CHECK_THROWS_AS(run_circle_grid(c), UsageError);
    c = grid_cfg(64, 1.0);
    c.init.kind = InitSpec::Kind::Cap;
    CHECK_THROWS_AS(run_circle_grid(c), UsageError);
}

TEST_CASE("semicircle confinement") {
    SimConfig c = grid_cfg(256, 5.0);
    c.init.kind = InitSpec::Kind::Atoms;
    for (int k = 0; k < 8; ++k) c.init.atoms.push_back(circle_point(0.1 + (pi - 0.2) * k / 7));
    c.init.weights.assign(8, 1.0 / 8);
    CHECK(semicircle_confinement_check(run_circle_grid(c).record) == Confinement::Confined);

    SimConfig p = particle_cfg(S1, 200, 5.0);
    p.init = c.init;
    p.keep_snapshots = true;
    CHECK(semicircle_confinement_check(simulate_replica(p, 0)) == Confinement::Confined);

    p.init.kind = InitSpec::Kind::Point;
    p.init.center = circle_point(1.0);
    CHECK(semicircle_confinement_check(simulate_replica(p, 0)) == Confinement::Confined);

    p.init.kind = InitSpec::Kind::Atoms;
    p.init.atoms = {circle_point(0.0), circle_point(pi)};
    p.init.weights = {0.5, 0.5};
    CHECK(semicircle_confinement_check(simulate_replica(p, 0)) == Confinement::NotApplicable);
    p.init.atoms = {circle_point(0.0), circle_point(2 * pi / 3), circle_point(4 * pi / 3)};
    p.init.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    CHECK(semicircle_confinement_check(simulate_replica(p, 0)) == Confinement::NotApplicable);
}
