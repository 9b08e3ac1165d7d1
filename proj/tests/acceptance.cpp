// Acceptance run: one PASS/FAIL line per headline criterion.
// Usage: acceptance [--only <id>] [--list]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "geoflock/analysis.hpp"
#include "geoflock/parallel.hpp"
#include "oracles.hpp"

using namespace geoflock;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    const char *id;
    double time_limit; // seconds, 0 = none
    std::function<Outcome()> run;
};

std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double mean(const std::vector<double> &v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

Outcome r1_exact_decay() {
    SimConfig c;
    c.space = ManifoldSpace::euclidean(1);
    c.kernel = KernelSpec::midpoint(c.space);
    c.n_particles = 10000;
    c.t_end = 3.0;
    c.record_interval = 1.0;
    c.replicas = 20;
    c.seed = 101;
    c.init.kind = InitSpec::Kind::UniformBox;
    const auto recs = simulate_particles(c);
    bool ok = true;
    std::string d;
    for (std::size_t k = 1; k <= 3; ++k) {
        double ratio = 0.0;
        // w2 to the best Dirac is the spread about the mean on R^1
        for (const auto &r : recs) ratio += std::pow(r.w2_best[k] / r.w2_best[0], 2) / recs.size();
        const double rel = ratio / std::exp(-0.5 * recs[0].times[k]) - 1.0;
        ok = ok && std::abs(rel) <= 0.05;
        d += fmt("t=%g rel=%+.4f ", recs[0].times[k], rel);
    }
    return {ok, d + "(tol 0.05)"};
}

Outcome circle_grid_slope() {
    SimConfig c;
    c.kernel = KernelSpec::midpoint(c.space);
    c.grid_size = 256;
    c.dt = 0.01;
    c.t_end = 20.0;
    c.record_interval = 0.1;
    c.init.kind = InitSpec::Kind::Bump;
    c.init.amplitude = 0.25;
    const auto run = run_circle_grid(c);
    const RateFit f = fit_decay_rate(run.record.times, run.record.energy, 10.0, 20.0);
    return {std::abs(f.slope + 0.5) <= 0.025, fmt("slope=%.5f (target -0.5 +- 0.025)", f.slope)};
}

Outcome uniform_energy() {
    SimConfig c;
    c.kernel = KernelSpec::midpoint(c.space);
    c.grid_size = 512;
    c.dt = 0.01;
    c.t_end = 1.0;
    c.record_interval = 0.5;
    c.init.kind = InitSpec::Kind::Uniform;
    const auto run = run_circle_grid(c);
    const double e_err = std::abs(energy(grid_measure(initial_grid(c.init, 512))) - pi * pi / 3);
    double drift = 0.0;
    for (double v : run.final_state.values) drift = std::max(drift, std::abs(v - 1.0 / (2 * pi)));
    drift /= c.t_end;
    return {e_err <= 1e-4 && drift <= 1e-10, fmt("|E-pi^2/3|=%.3e (tol 1e-4) drift/unit time=%.3e (tol 1e-10)", e_err, drift)};
}

Outcome example2_values() {
    const double eps = 0.01;
    const auto r = example2_moment_derivative(eps);
    const double dm = std::max(std::abs(r.moment(0) + 1.0 / 3), std::abs(r.moment(1) - eps / 3));
    const double dd = std::max(std::abs(r.derivative(0) - (-4.0 / 9 + eps / 3)), std::abs(r.derivative(1) + eps / 9));
    return {dm <= 1e-3 && dd <= 1e-3 && r.cross != 0.0,
            fmt("moment dev=%.2e derivative dev=%.2e (tol 1e-3) derivative=(%.6f, %.6f) cross=%.3e", dm, dd,
                r.derivative(0), r.derivative(1), r.cross)};
}

Outcome example1_discontinuity() {
    const double t_end = 4 * std::log(4.0) + 1;
    const auto r = example1_grid_separation(256, 0.01, t_end, 0.05);
    return {r.w2 >= pi / 2, fmt("W2=%.4f at t=%.3f (need >= pi/2=%.4f)", r.w2, r.t, pi / 2)};
}

struct SphereRun {
    std::vector<double> slopes;
};

SphereRun sphere_slopes(const KernelSpec &k, std::uint64_t seed) {
    SimConfig c;
    c.space = ManifoldSpace::sphere(2);
    c.kernel = k;
    c.n_particles = 2000;
    c.t_end = 12.0;
    c.record_interval = 0.5;
    c.replicas = 10;
    c.seed = seed;
    c.keep_snapshots = true;
    c.init.kind = InitSpec::Kind::Cap;
    c.init.center = sphere_point({0, 0, 1});
    c.init.radius = 0.1;
    SphereRun out;
    for (const auto &rec : simulate_particles(c)) {
        const auto w = w2_to_limit_series(c.space, rec);
        out.slopes.push_back(fit_decay_rate(rec.times, w, 2.0, 12.0).slope);
    }
    return out;
}

Outcome sphere_dirac_stability() {
    const auto s = sphere_slopes(KernelSpec::midpoint(ManifoldSpace::sphere(2)), 202);
    const double m = mean(s.slopes);
    return {std::abs(m + 0.25) <= 0.0375, fmt("mean slope=%.5f over %zu replicas (target -0.25 +- 0.0375)", m, s.slopes.size())};
}

Outcome contracting_rate() {
    const ManifoldSpace S2 = ManifoldSpace::sphere(2);
    const KernelSpec k = KernelSpec::parse("noisy-gamma:0.05", S2);
    Rng rng = make_stream(303, 0);
    const ContractionReport rep = estimate_contraction(k, 2000, rng);
    const double beta_bound = 9 * 0.05 * 0.05 + 8 * 0.05;
    const double m = mean(sphere_slopes(k, 304).slopes);
    const double rate_bound = -(1 - rep.beta_hat) / 4 * 0.85;
    return {rep.beta_hat <= beta_bound + rep.beta_ci && m <= rate_bound,
            fmt("beta=%.4f+-%.4f (<= %.4f) slope=%.5f (<= %.5f)", rep.beta_hat, rep.beta_ci, beta_bound, m, rate_bound)};
}

Outcome geometry_identities() {
    Rng rng = make_stream(404, 0);
    const ScanResult s = apollonius_scan(ManifoldSpace::sphere(2), 100000, rng);
    const ScanResult h = apollonius_scan(ManifoldSpace::hyperbolic(-1), 100000, rng);
    const auto flat = local_constant_probe(ManifoldSpace::euclidean(2), {0.2, 1.0}, 100000, rng);
    double flat_r = 0.0;
    for (const auto &row : flat) flat_r = std::max({flat_r, std::abs(row.max_r), std::abs(row.min_r)});
    Rng r1 = make_stream(405, 0), r2 = make_stream(406, 0);
    const auto sa = local_constant_probe(ManifoldSpace::sphere(2), {0.2}, 100000, r1)[0];
    const auto sb = local_constant_probe(ManifoldSpace::sphere(2), {0.2}, 100000, r2)[0];
    const double spread = std::abs(sa.max_r - sb.max_r) / std::max(sa.max_r, sb.max_r);
    const auto hy = local_constant_probe(ManifoldSpace::hyperbolic(-1), {0.2}, 100000, rng)[0];
    const bool ok = s.worst < 1e-12 && h.worst < 1e-12 && flat_r <= 1e-9 && std::isfinite(sa.max_r) && sa.max_r > 0 &&
                    spread <= 0.2 && hy.max_r <= 1e-10 && std::isfinite(hy.min_r);
    return {ok, fmt("apollonius S2=%.2e H2=%.2e (tol 1e-12) flat|r|=%.2e sphere max r=%.4f/%.4f hyp max r=%.2e", s.worst,
                    h.worst, flat_r, sa.max_r, sb.max_r, hy.max_r)};
}

Outcome inequality_scans() {
    Rng rng = make_stream(505, 0);
    const ScanResult gb_mid = midpoint_bound_scan(100000, rng);
    std::size_t bad = 0, measures = 0;
    for (const auto &s : {ManifoldSpace::sphere(2), ManifoldSpace::circle(), ManifoldSpace::hyperbolic(-1),
                          ManifoldSpace::euclidean(2)}) {
        const SandwichResult r = sandwich_scan(s, 1000, 20, rng);
        bad += r.lower_violations + r.upper_violations + r.tail_violations;
        measures += r.measures;
    }
    return {gb_mid.violations == 0 && bad == 0,
            fmt("global bound violations=%zu/%zu sandwich+tail violations=%zu over %zu measures", gb_mid.violations,
                gb_mid.samples, bad, measures)};
}

Outcome transport_oracle() {
    Rng rng = make_stream(606, 0);
    const std::vector<ManifoldSpace> spaces{ManifoldSpace::circle(), ManifoldSpace::sphere(2),
                                            ManifoldSpace::hyperbolic(-1), ManifoldSpace::euclidean(2)};
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const ManifoldSpace &s = spaces[k % spaces.size()];
        const DiscreteMeasure a = random_measure(s, 4, rng), b = random_measure(s, 4, rng);
        Eigen::MatrixXd c(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) c(i, j) = std::pow(distance(s, a.point(i), b.point(j)), 2);
        worst = std::max(worst, std::abs(w2_exact(a, b).value - std::sqrt(oracle::min_coupling_cost(a.weights(), b.weights(), c))));
    }
    double fast = 0.0;
    for (int k = 0; k < 200; ++k) {
        const ManifoldSpace &s = spaces[k % spaces.size()];
        const int n = 2 + k % 30;
        std::vector<Point> p, q;
        for (int i = 0; i < n; ++i) {
            p.push_back(random_probe(s, rng));
            q.push_back(random_probe(s, rng));
        }
        const auto a = DiscreteMeasure::uniform(s, p), b = DiscreteMeasure::uniform(s, q);
        fast = std::max(fast, std::abs(w2_exact(a, b).value - w2_exact_simplex(a, b).value));
    }
    return {worst <= 1e-10 && fast <= 1e-10,
            fmt("max |exact - enumeration|=%.2e over 1000, max |assignment - simplex|=%.2e over 200 (tol 1e-10)", worst, fast)};
}

Outcome beta_relations() {
    Rng rng = make_stream(707, 0);
    const BetaTildeReport off = betatilde_relation_check(0.3, 2000, rng);
    const ManifoldSpace S2 = ManifoldSpace::sphere(2);
    const ContractionReport mid = estimate_contraction(KernelSpec::midpoint(S2), 2000, rng);
    const ContractionReport mid_flat = estimate_contraction(KernelSpec::midpoint(ManifoldSpace::euclidean(2)), 2000, rng);
    const bool mid_ok = std::abs(mid.beta_hat) <= 1e-9 && std::abs(mid.beta_tilde_hat) <= 1e-9 &&
                        std::abs(mid_flat.beta_hat) <= 1e-9 && std::abs(mid_flat.beta_tilde_hat) <= 1e-9;
    double gap = std::max({off.contraction.bound_gap, mid.bound_gap, mid_flat.bound_gap});
    for (const char *spec : {"noisy-gamma:0.05", "noisy-eps:0.1", "bdg:0.2"}) {
        ContractionOptions o;
        o.n_mc = 64;
        gap = std::max(gap, estimate_contraction(KernelSpec::parse(spec, S2), 500, rng, o).bound_gap);
    }
    const auto &c = off.contraction;
    return {off.equal_ok && mid_ok && off.bound_ok && gap <= 1e-12,
            fmt("offset s=0.3: beta=%.5f+-%.5f tilde=%.5f+-%.5f (expect 0.09); midpoint |beta|<=%.1e; bound gap=%.2e", c.beta_hat,
                c.beta_ci, c.beta_tilde_hat, c.beta_tilde_ci, std::max(std::abs(mid.beta_hat), std::abs(mid_flat.beta_hat)), gap)};
}

const std::vector<Criterion> &criteria() {
    static const std::vector<Criterion> all{
        {"r1_exact_decay", 60, r1_exact_decay},
        {"circle_grid_energy_slope", 300, circle_grid_slope},
        {"uniform_density_energy", 0, uniform_energy},
        {"example2_exact_values", 1, example2_values},
        {"example1_discontinuity", 0, example1_discontinuity},
        {"sphere_dirac_stability", 600, sphere_dirac_stability},
        {"contracting_kernel_rate", 0, contracting_rate},
        {"geometry_identity_suite", 0, geometry_identities},
        {"inequality_scans", 0, inequality_scans},
        {"transport_oracle", 0, transport_oracle},
        {"beta_betatilde_relations", 0, beta_relations},
    };
    return all;
}

} // namespace

int main(int argc, char **argv) {
    par::configure_threads();
    std::string only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only = argv[++i];
        } else if (std::strcmp(argv[i], "--list") == 0) {
            for (const auto &c : criteria()) std::printf("%s\n", c.id);
            return 0;
        } else {
            std::fprintf(stderr, "usage: acceptance [--only <id>] [--list]\n");
            return 2;
        }
    }
    int failed = 0, ran = 0;
    for (const auto &c : criteria()) {
        if (!only.empty() && only != c.id) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.time_limit <= 0 || secs < c.time_limit;
        if (!in_time) o.detail += fmt(" runtime over %.0fs limit", c.time_limit);
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("%s %-26s %s [%.1fs]\n", pass ? "PASS" : "FAIL", c.id, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    if (ran == 0) {
        std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
        return 2;
    }
    return failed == 0 ? 0 : 1;
}
