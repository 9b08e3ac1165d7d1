#include "geoflock/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geoflock/analysis.hpp"
#include "geoflock/errors.hpp"

namespace geoflock {

namespace {

const std::vector<ManifoldSpace> &test_spaces() {
    static const std::vector<ManifoldSpace> spaces{ManifoldSpace::euclidean(2), ManifoldSpace::circle(),
                                                   ManifoldSpace::sphere(2), ManifoldSpace::hyperbolic(-1.0)};
    return spaces;
}

Point any_point(const ManifoldSpace &space, Rng &rng) {
    return space.sphere_like() ? sample_uniform(space, rng) : sample_ball(space, origin(space), 2.0, rng);
}

void geometry_suite(std::vector<json> &out, Rng &rng) {
    for (const ManifoldSpace &space : test_spaces()) {
        const json p{{"space", space.spec()}, {"samples", 10000}};
        double worst_tri = -1e300, worst_mid = 0.0, worst_rt = 0.0;
        for (int k = 0; k < 10000; ++k) {
            const Point a = any_point(space, rng), b = any_point(space, rng), c = any_point(space, rng);
            worst_tri = std::max(worst_tri, distance(space, a, c) - distance(space, a, b) - distance(space, b, c));
            const MidpointSet ms = midpoints(space, a, b);
            if (ms.unique())
                worst_mid = std::max(worst_mid, std::abs(distance(space, a, ms.point) - 0.5 * distance(space, a, b)));
            const double half = std::min(2.0, 0.5 * space.injectivity_radius());
            const Point t = sample_ball(space, a, half * 0.999, rng);
            worst_rt = std::max(worst_rt, distance(space, exp_map(space, a, log_map(space, a, t)), t));
        }
        out.push_back(check_line("triangle_inequality", p, worst_tri, 1e-12, worst_tri <= 1e-12));
        out.push_back(check_line("midpoint_bisection", p, worst_mid, 1e-10, worst_mid <= 1e-10));
        out.push_back(check_line("exp_log_round_trip", p, worst_rt, 1e-10, worst_rt <= 1e-10));
        if (space.family() != Family::Circle) {
            const ScanResult s = apollonius_scan(space, 10000, rng);
            out.push_back(check_line("apollonius_residual", p, s.worst, 1e-12, s.violations == 0));
        }
    }
    const std::vector<double> kappas{0.2};
    const auto sph = local_constant_probe(ManifoldSpace::sphere(2), kappas, 20000, rng).front();
    out.push_back(check_line("local_constant_sphere_sign", json{{"kappa", 0.2}}, sph.min_r, -1e-10, sph.min_r >= -1e-10));
    const auto hyp = local_constant_probe(ManifoldSpace::hyperbolic(-1.0), kappas, 20000, rng).front();
    out.push_back(check_line("local_constant_hyperbolic_sign", json{{"kappa", 0.2}}, hyp.max_r, 1e-10, hyp.max_r <= 1e-10));
    const auto euc = local_constant_probe(ManifoldSpace::euclidean(2), kappas, 20000, rng).front();
    const double euc_abs = std::max(std::abs(euc.max_r), std::abs(euc.min_r));
    out.push_back(check_line("local_constant_euclidean_zero", json{{"kappa", 0.2}}, euc_abs, 1e-9, euc_abs <= 1e-9));
}

void measures_suite(std::vector<json> &out, Rng &rng) {
    for (const ManifoldSpace &space : test_spaces()) {
        const SandwichResult s = sandwich_scan(space, 200, 10, rng);
        const json p{{"space", space.spec()}, {"measures", s.measures}, {"probes", s.probes}};
        const double bad = static_cast<double>(s.lower_violations + s.upper_violations + s.tail_violations);
        out.push_back(check_line("energy_w2_sandwich_and_tails", p, bad, 0.0, bad == 0.0));
        out.push_back(check_line("best_center_optimality", p, static_cast<double>(s.optimality_violations), 0.0,
                                 s.optimality_violations == 0));

        double worst_axiom = 0.0, worst_fast = 0.0;
        for (int k = 0; k < 100; ++k) {
            const DiscreteMeasure a = random_measure(space, 6, rng), b = random_measure(space, 6, rng),
                                  c = random_measure(space, 6, rng);
            const double ab = w2_exact(a, b).value, ba = w2_exact(b, a).value, bc = w2_exact(b, c).value,
                         ac = w2_exact(a, c).value;
            worst_axiom = std::max({worst_axiom, std::abs(ab - ba), w2_exact(a, a).value, ac - ab - bc});
            std::vector<Point> pa, pb;
            for (int i = 0; i < 6; ++i) {
                pa.push_back(any_point(space, rng));
                pb.push_back(any_point(space, rng));
            }
            const DiscreteMeasure ua = DiscreteMeasure::uniform(space, pa), ub = DiscreteMeasure::uniform(space, pb);
            worst_fast = std::max(worst_fast, std::abs(w2_exact(ua, ub).plan.cost - w2_exact_simplex(ua, ub).plan.cost));
        }
        out.push_back(check_line("w2_metric_axioms", json{{"space", space.spec()}}, worst_axiom, 1e-9, worst_axiom <= 1e-9));
        out.push_back(check_line("assignment_equals_simplex", json{{"space", space.spec()}}, worst_fast, 1e-10,
                                 worst_fast <= 1e-10));
    }
}

void kernels_suite(std::vector<json> &out, Rng &rng) {
    const ManifoldSpace s2 = ManifoldSpace::sphere(2);
    const ScanResult gb_mid = midpoint_bound_scan(20000, rng);
    out.push_back(check_line("global_midpoint_bound", json{{"samples", gb_mid.samples}}, gb_mid.worst, 1e-10,
                             gb_mid.violations == 0));

    const ContractionReport mid = estimate_contraction(KernelSpec::midpoint(s2), 1000, rng);
    out.push_back(check_line("midpoint_beta_zero", json{{"space", s2.spec()}}, std::max(mid.beta_hat, mid.beta_tilde_hat),
                             1e-9, mid.beta_hat <= 1e-9 && mid.beta_tilde_hat <= 1e-9));

    const double gamma = 0.05;
    const KernelSpec noisy = KernelSpec::parse("noisy-gamma:0.05", s2);
    const ContractionReport nr = estimate_contraction(noisy, 1000, rng);
    const double bound = 9 * gamma * gamma + 8 * gamma;
    out.push_back(check_line("noisy_gamma_beta_bound", json{{"gamma", gamma}}, nr.beta_hat, bound + nr.beta_ci,
                             nr.beta_hat <= bound + nr.beta_ci));
    const ScanResult gb = global_beta_scan(noisy, nr.beta_hat, 2000, 64, rng);
    out.push_back(check_line("global_beta_bound", json{{"gamma", gamma}, {"beta", nr.beta_hat}}, gb.worst, 0.0,
                             gb.violations == 0));

    const BetaTildeReport bt = betatilde_relation_check(0.3, 1000, rng);
    out.push_back(check_line("beta_equals_beta_tilde_flat", json{{"s", 0.3}}, bt.contraction.beta_hat, bt.expected,
                             bt.equal_ok));
    out.push_back(check_line("beta_tilde_bound", json{{"s", 0.3}}, bt.contraction.bound_gap, 0.0, bt.bound_ok));

    const Point a = sphere_point({1, 0, 0});
    const Point b = exp_map(s2, a, Vec::Unit(3, 1) * 0.5);
    const double p_bdg = check_midpoint_symmetry(KernelSpec::parse("bdg:0.2", s2), a, b, 10000, 8, rng);
    out.push_back(check_line("bdg_point_symmetry", json{{"gamma", 0.2}}, p_bdg, 0.01, p_bdg >= 0.01));
    const KernelSpec shifted{KernelFamily::ShiftedMidpoint, 0.05, s2};
    const double p_shift = check_midpoint_symmetry(shifted, a, b, 10000, 8, rng);
    out.push_back(check_line("shifted_kernel_detected", json{{"offset", 0.05}}, p_shift, 0.01, p_shift < 0.01));
    for (const char *spec : {"midpoint", "noisy-eps:0.1", "noisy-gamma:0.2", "bdg:0.2"}) {
        const double pv = check_exchange_symmetry(KernelSpec::parse(spec, s2), a, b, 10000, 8, rng);
        out.push_back(check_line("exchange_symmetry", json{{"kernel", spec}}, pv, 0.01, pv >= 0.01));
    }

    const DepositionTable t = grid_pushforward(KernelSpec::midpoint(ManifoldSpace::circle()), 64);
    double worst = 0.0;
    for (int r = 0; r < 64 * 64; ++r) {
        double s = 0.0;
        for (int e = t.row_ptr[r]; e < t.row_ptr[r + 1]; ++e) s += t.fraction[e];
        worst = std::max(worst, std::abs(s - 1.0));
    }
    out.push_back(check_line("deposition_mass", json{{"M", 64}}, worst, 1e-14, worst <= 1e-14));
}

void dynamics_suite(std::vector<json> &out, std::uint64_t seed) {
    SimConfig cfg;
    cfg.space = ManifoldSpace::circle();
    cfg.kernel = KernelSpec::midpoint(cfg.space);
    cfg.grid_size = 128;
    cfg.dt = 0.01;
    cfg.t_end = 1.0;
    cfg.record_interval = 0.5;
    cfg.init.kind = InitSpec::Kind::Uniform;
    const GridRun u = run_circle_grid(cfg);
    double dev = 0.0;
    for (double v : u.final_state.values) dev = std::max(dev, std::abs(v - 0.5 / std::numbers::pi));
    out.push_back(check_line("uniform_stationary", json{{"M", 128}, {"t", 1.0}}, dev, 1e-10, dev <= 1e-10));

    cfg.init.kind = InitSpec::Kind::Bump;
    cfg.t_end = 2.0;
    const GridRun g = run_circle_grid(cfg);
    const GridRun gs = run_circle_grid(cfg, true);
    double mass_err = 0.0, ref_err = 0.0;
    for (const auto &d : g.record.densities) {
        double m = 0.0;
        for (double v : d) m += v;
        mass_err = std::max(mass_err, std::abs(m * 2.0 * std::numbers::pi / 128 - 1.0));
    }
    for (int k = 0; k < 128; ++k) ref_err = std::max(ref_err, std::abs(g.final_state.values[k] - gs.final_state.values[k]));
    out.push_back(check_line("grid_mass_conservation", json{{"M", 128}}, mass_err, 1e-10, mass_err < 1e-10));
    out.push_back(check_line("grid_step_drift", json{{"M", 128}}, g.max_mass_drift, 1e-12, g.max_mass_drift < 1e-12));
    out.push_back(check_line("gather_matches_scatter", json{{"M", 128}}, ref_err, 1e-12, ref_err <= 1e-12));

    SimConfig pc;
    pc.space = ManifoldSpace::sphere(2);
    pc.kernel = KernelSpec::parse("noisy-gamma:0.1", pc.space);
    pc.n_particles = 50;
    pc.t_end = 1.0;
    pc.record_interval = 0.25;
    pc.seed = seed;
    pc.replicas = 2;
    pc.init.kind = InitSpec::Kind::Uniform;
    const auto r1 = simulate_particles(pc);
    const auto r2 = simulate_particles(pc);
    bool same = true;
    for (std::size_t r = 0; r < r1.size(); ++r) same = same && r1[r].energy == r2[r].energy && r1[r].w2_best == r2[r].w2_best;
    out.push_back(check_line("particle_determinism", json{{"seed", seed}}, same ? 0.0 : 1.0, 0.0, same));

    pc.kernel = KernelSpec::midpoint(pc.space);
    pc.init.kind = InitSpec::Kind::Point;
    pc.init.center = sphere_point({0, 0, 1});
    const auto rd = simulate_particles(pc);
    double emax = 0.0;
    for (const auto &r : rd)
        for (double e : r.energy) emax = std::max(emax, e);
    out.push_back(check_line("dirac_invariant", json{{"N", 50}}, emax, 0.0, emax == 0.0));
}

void analysis_suite(std::vector<json> &out) {
    std::vector<double> t, v;
    for (int k = 0; k <= 100; ++k) {
        t.push_back(0.1 * k);
        v.push_back(3.0 * std::exp(-0.05 * k));
    }
    const RateFit f = fit_decay_rate(t, v);
    out.push_back(check_line("fit_synthetic_exponential", json{{"rate", -0.5}}, std::abs(f.slope + 0.5), 1e-12,
                             std::abs(f.slope + 0.5) <= 1e-12));

    const double eps = 0.01;
    const Example2Result e = example2_moment_derivative(eps);
    const double mdev = std::max(std::abs(e.moment(0) + 1.0 / 3.0), std::abs(e.moment(1) - eps / 3.0));
    out.push_back(check_line("example2_moment", json{{"epsilon", eps}}, mdev, 1e-3, mdev <= 1e-3));
    const double ddev = std::max(std::abs(e.derivative(0) - (-4.0 / 9.0 + eps / 3.0)), std::abs(e.derivative(1) + eps / 9.0));
    out.push_back(check_line("example2_derivative", json{{"epsilon", eps}}, ddev, 1e-3, ddev <= 1e-3));
    out.push_back(check_line("example2_non_collinear", json{{"epsilon", eps}}, std::abs(e.cross), 0.0, e.cross != 0.0));
}

} // namespace

const std::vector<std::string> &suite_names() {
    static const std::vector<std::string> names{"geometry", "measures", "kernels", "dynamics", "analysis", "all"};
    return names;
}

std::vector<json> run_suite(const std::string &name, std::uint64_t seed) {
    const auto &names = suite_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw UsageError("unknown suite '" + name + "'");
    std::vector<json> out;
    const bool all = name == "all";
    if (all || name == "geometry") {
        Rng rng = make_stream(seed, 1);
        geometry_suite(out, rng);
    }
    if (all || name == "measures") {
        Rng rng = make_stream(seed, 2);
        measures_suite(out, rng);
    }
    if (all || name == "kernels") {
        Rng rng = make_stream(seed, 3);
        kernels_suite(out, rng);
    }
    if (all || name == "dynamics") dynamics_suite(out, seed);
    if (all || name == "analysis") analysis_suite(out);
    return out;
}

} // namespace geoflock
