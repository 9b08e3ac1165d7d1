#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "geoflock/errors.hpp"
#include "geoflock/kernels.hpp"

using namespace geoflock;
using std::numbers::pi;

namespace {

const ManifoldSpace S1 = ManifoldSpace::circle();
const ManifoldSpace S2 = ManifoldSpace::sphere(2);
const ManifoldSpace R2 = ManifoldSpace::euclidean(2);

std::map<int, double> row(const DepositionTable &t, int i, int j) {
    std::map<int, double> out;
    const int r = i * t.M + j;
    for (int e = t.row_ptr[r]; e < t.row_ptr[r + 1]; ++e) out[t.node[e]] += t.fraction[e];
    return out;
}

} // namespace

TEST_CASE("kernel specs") {
    CHECK(KernelSpec::parse("midpoint", S2).family == KernelFamily::Midpoint);
    CHECK(KernelSpec::parse("noisy-gamma:0.05", S2).param == 0.05);
    CHECK(KernelSpec::parse("bdg:0.2", S2).family == KernelFamily::BDG);
    CHECK(KernelSpec::parse(KernelSpec::parse("noisy-eps:0.1", S2).spec(), S2).param == 0.1);
    for (const char *bad : {"", "midpoint:1", "noisy-eps", "noisy-eps:abc", "noisy-eps:-1", "noisy-gamma:-0.1", "swirl:1"})
        CHECK_THROWS_AS(KernelSpec::parse(bad, S2), ConfigError);
    CHECK_THROWS_AS(KernelSpec::parse("noisy-eps:4", S2), ConfigError);
}

TEST_CASE("midpoint post-collision") {
    Rng rng = make_stream(40, 0);
    const KernelSpec k = KernelSpec::midpoint(S1);
    for (int i = 0; i < 10; ++i)
        CHECK(sample_post_collision(k, circle_point(0), circle_point(pi / 2), rng).coords(0) == doctest::Approx(pi / 4));
    int upper = 0;
    for (int i = 0; i < 4000; ++i) {
        const double t = sample_post_collision(k, circle_point(0), circle_point(pi), rng).coords(0);
        CHECK((std::abs(t - pi / 2) < 1e-12 || std::abs(t - 3 * pi / 2) < 1e-12));
        upper += t > pi;
    }
    CHECK(std::abs(upper - 2000) < 4 * std::sqrt(1000.0));
}

TEST_CASE("coincident pairs stay put under every kernel") {
    Rng rng = make_stream(41, 0);
    const Point x = sphere_point({0, 0.6, 0.8});
    for (const char *spec : {"midpoint", "noisy-gamma:0.3", "bdg:0.5"}) {
        const KernelSpec k = KernelSpec::parse(spec, S2);
        for (int i = 0; i < 20; ++i) CHECK(distance(S2, sample_post_collision(k, x, x, rng), x) < 1e-12);
    }
}

TEST_CASE("noisy-gamma with zero noise is the midpoint kernel") {
    Rng a = make_stream(42, 0);
    const KernelSpec k = KernelSpec::parse("noisy-gamma:0", S2);
    const Point x = sphere_point({1, 0, 0}), y = sphere_point({0, 0.6, 0.8});
    const Point m = midpoints(S2, x, y).point;
    for (int i = 0; i < 10000; ++i) REQUIRE(distance(S2, sample_post_collision(k, x, y, a), m) < 1e-12);
}

TEST_CASE("noisy kernels land near the midpoint") {
    Rng rng = make_stream(43, 0);
    const Point x = sphere_point({1, 0, 0}), y = sphere_point({0, 1, 0});
    const Point m = midpoints(S2, x, y).point;
    const double d = distance(S2, x, y);
    const KernelSpec g = KernelSpec::parse("noisy-gamma:0.1", S2);
    const KernelSpec b = KernelSpec::parse("bdg:0.2", S2);
    for (int i = 0; i < 2000; ++i) {
        // a transverse endpoint shift moves the midpoint by up to 1/(2 cos(d/2)) of it on the unit sphere
        CHECK(distance(S2, sample_post_collision(g, x, y, rng), m) <= 0.1 * d / (2 * std::cos(d / 2)) + 1e-12);
        CHECK(distance(S2, sample_post_collision(b, x, y, rng), m) <= 0.2 * d / 2 + 1e-12);
    }
}

TEST_CASE("alpha examples") {
    Rng rng = make_stream(44, 0);
    const ManifoldSpace R1 = ManifoldSpace::euclidean(1);
    const Estimate a = alpha(KernelSpec::midpoint(R1), euclidean_point({0}), euclidean_point({2}), euclidean_point({0}), 16, rng);
    CHECK(a.value == doctest::Approx(-1.0));
    CHECK(a.ci == 0.0);
    const double d = 1.7;
    const Estimate e = alpha(KernelSpec::midpoint(R2), euclidean_point({0, 0}), euclidean_point({d, 0}),
                             euclidean_point({d / 2, d * std::sqrt(3.0) / 2}), 16, rng);
    CHECK(e.value == doctest::Approx(-d * d / 4));
    const Estimate s = alpha(KernelSpec::midpoint(S2), sphere_point({1, 0, 0}), sphere_point({0, 1, 0}),
                             sphere_point({0, 0, 1}), 16, rng);
    CHECK(std::abs(s.value) < 1e-14);
}

TEST_CASE("contraction estimates") {
    Rng rng = make_stream(45, 0);
    const ContractionReport mid = estimate_contraction(KernelSpec::midpoint(S2), 400, rng);
    CHECK(std::abs(mid.beta_hat) < 1e-9);
    CHECK(std::abs(mid.beta_tilde_hat) < 1e-9);
    CHECK(mid.bound_gap <= 1e-12);

    ContractionOptions fast;
    fast.n_mc = 64;
    const ContractionReport g = estimate_contraction(KernelSpec::parse("noisy-gamma:0.05", S2), 400, rng, fast);
    CHECK(g.beta_hat <= 9 * 0.05 * 0.05 + 8 * 0.05 + g.beta_ci);
    CHECK(g.bound_gap <= 1e-12);

    const ContractionReport zero = estimate_contraction(KernelSpec::parse("noisy-gamma:0", S2), 400, rng);
    CHECK(std::abs(zero.beta_hat) < 1e-9);
    CHECK_THROWS_AS(estimate_contraction(KernelSpec::midpoint(S2), 50, rng), UsageError);
}

TEST_CASE("contraction estimates are reproducible") {
    Rng a = make_stream(46, 0), b = make_stream(46, 0);
    ContractionOptions o;
    o.n_mc = 32;
    const KernelSpec k = KernelSpec::parse("bdg:0.3", S2);
    const auto ra = estimate_contraction(k, 200, a, o), rb = estimate_contraction(k, 200, b, o);
    CHECK(ra.beta_hat == rb.beta_hat);
    CHECK(ra.beta_tilde_hat == rb.beta_tilde_hat);
}

TEST_CASE("midpoint symmetry") {
    Rng rng = make_stream(47, 0);
    const Point x = sphere_point({1, 0, 0}), y = sphere_point({0.6, 0, 0.8});
    CHECK(check_midpoint_symmetry(KernelSpec::midpoint(S2), x, y, 1000, 8, rng) == 1.0);
    CHECK(check_midpoint_symmetry(KernelSpec::parse("bdg:0.2", S2), x, y, 10000, 8, rng) > 0.01);
    const KernelSpec shifted{KernelFamily::ShiftedMidpoint, 0.05, S2};
    CHECK(check_midpoint_symmetry(shifted, x, y, 10000, 8, rng) < 0.01);
    CHECK_THROWS_AS(check_midpoint_symmetry(KernelSpec::midpoint(S2), x, sphere_point({-1, 0, 0}), 100, 8, rng),
                    DomainError);
}

TEST_CASE("exchange symmetry of the shipped kernels") {
    Rng rng = make_stream(48, 0);
    const Point x = sphere_point({1, 0, 0}), y = sphere_point({0, 0.6, 0.8});
    for (const char *spec : {"midpoint", "noisy-eps:0.1", "noisy-gamma:0.2", "bdg:0.2"})
        CHECK(check_exchange_symmetry(KernelSpec::parse(spec, S2), x, y, 10000, 8, rng) > 0.001);
}

TEST_CASE("grid deposition examples") {
    const DepositionTable t = grid_pushforward(KernelSpec::midpoint(S1), 8);
    CHECK(row(t, 0, 2) == std::map<int, double>{{1, 1.0}});
    CHECK(row(t, 0, 4) == std::map<int, double>{{2, 0.5}, {6, 0.5}});
    CHECK(row(t, 0, 1) == std::map<int, double>{{0, 0.5}, {1, 0.5}});
    CHECK(row(t, 7, 1) == std::map<int, double>{{0, 1.0}});
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            double s = 0.0;
            for (const auto &[n, f] : row(t, i, j)) s += f;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(row(t, i, j) == row(t, j, i));
        }
    CHECK_THROWS_AS(grid_pushforward(KernelSpec::midpoint(S1), 7), UsageError);
    CHECK_THROWS_AS(grid_pushforward(KernelSpec::midpoint(S2), 8), UsageError);
}

TEST_CASE("perpendicular offset kernel") {
    Rng rng = make_stream(49, 0);
    const KernelSpec k{KernelFamily::PerpendicularOffset, 0.3, R2};
    const Point x = euclidean_point({0, 0}), y = euclidean_point({2, 0});
    for (int i = 0; i < 100; ++i) {
        const Point p = sample_post_collision(k, x, y, rng);
        CHECK(p.coords(0) == doctest::Approx(1.0));
        CHECK(std::abs(p.coords(1)) == doctest::Approx(0.3));
    }
    CHECK_THROWS_AS(sample_post_collision({KernelFamily::PerpendicularOffset, 0.3, S2}, sphere_point({1, 0, 0}),
                                          sphere_point({0, 1, 0}), rng),
                    UsageError);
}
