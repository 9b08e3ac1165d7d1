#include "geoflock/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "geoflock/errors.hpp"
#include "geoflock/parallel.hpp"

namespace geoflock {

namespace {

std::size_t uniform_index(Rng &rng, std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

std::vector<std::size_t> largest_remainder(const std::vector<double> &w, std::size_t n) {
    std::vector<std::size_t> counts(w.size());
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t used = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double exact = w[k] * static_cast<double>(n);
        counts[k] = static_cast<std::size_t>(std::floor(exact));
        used += counts[k];
        rem.emplace_back(-(exact - std::floor(exact)), k);
    }
    std::sort(rem.begin(), rem.end());
    for (std::size_t k = 0; used < n; ++k, ++used) ++counts[rem[k % rem.size()].second];
    return counts;
}

Vec ambient_moment(const DiscreteMeasure &rho) {
    if (rho.space().sphere_like()) return embedded_first_moment(rho);
    Vec m = Vec::Zero(rho.space().ambient_dim());
    for (std::size_t i = 0; i < rho.size(); ++i) m += rho.weight(i) * rho.point(i).coords;
    return m;
}

} // namespace

std::vector<Point> initial_particles(const SimConfig &cfg, Rng &rng) {
    const ManifoldSpace &space = cfg.space;
    const InitSpec &init = cfg.init;
    const std::size_t n = cfg.n_particles;
    if (n < 2) throw UsageError("particle runs need at least 2 particles");
    std::vector<Point> pts;
    pts.reserve(n);
    switch (init.kind) {
    case InitSpec::Kind::Point:
        check_point(space, init.center);
        pts.assign(n, init.center);
        break;
    case InitSpec::Kind::Atoms: {
        if (init.atoms.empty() || init.atoms.size() != init.weights.size())
            throw UsageError("atoms init needs matching atoms and weights");
        const auto counts = largest_remainder(init.weights, n);
        for (std::size_t k = 0; k < init.atoms.size(); ++k) {
            check_point(space, init.atoms[k]);
            for (std::size_t c = 0; c < counts[k]; ++c) pts.push_back(init.atoms[k]);
        }
        break;
    }
    case InitSpec::Kind::UniformBox: {
        if (space.family() != Family::Euclidean) throw UsageError("uniform box init needs a euclidean space");
        for (std::size_t i = 0; i < n; ++i) {
            Vec c(space.dim());
            for (int d = 0; d < space.dim(); ++d) c(d) = init.lo + (init.hi - init.lo) * uniform01(rng);
            pts.emplace_back(Family::Euclidean, c);
        }
        break;
    }
    case InitSpec::Kind::Cap:
        for (std::size_t i = 0; i < n; ++i) pts.push_back(sample_ball(space, init.center, init.radius, rng));
        break;
    case InitSpec::Kind::Uniform:
        for (std::size_t i = 0; i < n; ++i) pts.push_back(sample_uniform(space, rng));
        break;
    case InitSpec::Kind::Geodesic: {
        const Vec e = tangent_basis(space, init.center).front();
        for (std::size_t i = 0; i < n; ++i)
            pts.push_back(exp_map(space, init.center, init.radius * (2.0 * uniform01(rng) - 1.0) * e));
        break;
    }
    default: throw UsageError("bump initial data is only defined for grid runs");
    }
    return pts;
}

std::vector<double> record_times(double t_end, double interval) {
    if (!(t_end > 0.0) || !(interval > 0.0)) throw UsageError("t_end and record_interval must be positive");
    std::vector<double> t;
    const auto n = static_cast<long>(std::floor(t_end / interval + 1e-9));
    for (long k = 0; k <= n; ++k) t.push_back(static_cast<double>(k) * interval);
    return t;
}

void record_diagnostics(TrajectoryRecord &rec, const DiscreteMeasure &rho) {
    const DiracCenter c = best_dirac_center(rho);
    rec.energy.push_back(energy(rho));
    rec.w2_best.push_back(c.value);
    rec.centers.push_back(c.center);
    rec.center_converged.push_back(c.converged ? 1 : 0);
    rec.moments.push_back(ambient_moment(rho));
}

TrajectoryRecord simulate_replica(const SimConfig &cfg, int replica) {
    if (cfg.kernel.space != cfg.space)
        throw UsageError("kernel space " + cfg.kernel.space.spec() + " differs from run space " + cfg.space.spec());
    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(replica));
    std::vector<Point> x = initial_particles(cfg, rng);
    const std::size_t n = x.size();

    TrajectoryRecord rec;
    rec.space_spec = cfg.space.spec();
    rec.kernel_spec = cfg.kernel.spec();
    rec.seed = cfg.seed;
    rec.replica = replica;

    const std::vector<double> times = record_times(cfg.t_end, cfg.record_interval);
    auto snapshot = [&](double t) {
        rec.times.push_back(t);
        if (cfg.keep_snapshots) rec.particles.push_back(x);
        if (cfg.diagnostics) record_diagnostics(rec, DiscreteMeasure::uniform(cfg.space, x));
    };

    const double rate = cfg.mode == UpdateMode::Single ? static_cast<double>(n) : 0.5 * static_cast<double>(n);
    double t = 0.0;
    std::size_t r = 0;
    while (true) {
        const double wait = -std::log1p(-uniform01(rng)) / rate;
        const double t_next = t + wait;
        // Cadlag sampling: record times before the next event see the current state.
        while (r < times.size() && times[r] < t_next) snapshot(times[r++]);
        if (r >= times.size()) break;
        t = t_next;
        const std::size_t i = uniform_index(rng, n);
        std::size_t j = uniform_index(rng, n - 1);
        if (j >= i) ++j;
        Point post = sample_post_collision(cfg.kernel, x[i], x[j], rng);
        if (cfg.mode == UpdateMode::Pair) x[j] = post;
        x[i] = std::move(post);
    }
    return rec;
}

std::vector<TrajectoryRecord> simulate_particles(const SimConfig &cfg) {
    if (cfg.replicas < 1) throw UsageError("replica count must be positive");
    std::vector<TrajectoryRecord> out(cfg.replicas);
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < cfg.replicas; ++r) {
        try {
            out[r] = simulate_replica(cfg, r);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

double GridDensity::dtheta() const { return 2.0 * std::numbers::pi / M; }

double GridDensity::mass() const {
    return std::accumulate(values.begin(), values.end(), 0.0) * dtheta();
}

GridDensity initial_grid(const InitSpec &init, int M) {
    if (M < 4 || M % 2 != 0) throw UsageError("grid size must be even and >= 4");
    GridDensity g;
    g.M = M;
    g.values.assign(M, 0.0);
    const double dt = g.dtheta();
    auto split = [&](double theta, double w) {
        const double pos = wrap_angle(theta) / dt;
        const int k = std::min(M - 1, static_cast<int>(std::floor(pos)));
        const double f = pos - k;
        g.values[k] += (1.0 - f) * w;
        g.values[(k + 1) % M] += f * w;
    };
    switch (init.kind) {
    case InitSpec::Kind::Uniform: std::fill(g.values.begin(), g.values.end(), 1.0); break;
    case InitSpec::Kind::Bump:
        for (int k = 0; k < M; ++k) g.values[k] = 1.0 + init.amplitude * std::cos(k * dt - std::numbers::pi);
        break;
    case InitSpec::Kind::BumpSquared:
        for (int k = 0; k < M; ++k) {
            const double b = 1.0 + std::cos(k * dt - std::numbers::pi);
            g.values[k] = b * b;
        }
        break;
    case InitSpec::Kind::Point: {
        const int k = static_cast<int>(std::lround(wrap_angle(init.center.coords(0)) / dt)) % M;
        g.values[k] = 1.0;
        break;
    }
    case InitSpec::Kind::Atoms:
        if (init.atoms.empty() || init.atoms.size() != init.weights.size())
            throw UsageError("atoms init needs matching atoms and weights");
        for (std::size_t a = 0; a < init.atoms.size(); ++a) split(init.atoms[a].coords(0), init.weights[a]);
        break;
    default: throw UsageError("this initial data kind is not available on the grid");
    }
    for (double v : g.values)
        if (v < 0.0) throw UsageError("initial density is negative");
    const double mass = g.mass();
    if (!(mass > 0.0)) throw UsageError("initial density has no mass");
    for (double &v : g.values) v /= mass;
    return g;
}

DiscreteMeasure grid_measure(const GridDensity &g) {
    const double dt = g.dtheta();
    std::vector<Point> pts;
    std::vector<double> w;
    pts.reserve(g.M);
    w.reserve(g.M);
    for (int k = 0; k < g.M; ++k) {
        pts.push_back(circle_point(k * dt));
        w.push_back(g.values[k] * dt);
    }
    return DiscreteMeasure(ManifoldSpace::circle(), std::move(pts), std::move(w));
}

GridRun run_circle_grid(const SimConfig &cfg, bool serial_reference) {
    return run_circle_grid(cfg, initial_grid(cfg.init, cfg.grid_size), serial_reference);
}

GridRun run_circle_grid(const SimConfig &cfg, GridDensity init, bool serial_reference) {
    if (cfg.space.family() != Family::Circle || cfg.kernel.family != KernelFamily::Midpoint)
        throw UsageError("grid solver needs the midpoint kernel on the circle");
    const int M = init.M;
    if (M < 4 || M % 2 != 0) throw UsageError("grid size must be even and >= 4");
    if (!(cfg.dt > 0.0)) throw UsageError("dt must be positive");
    const long steps_per_record = std::lround(cfg.record_interval / cfg.dt);
    if (steps_per_record < 1 || std::abs(steps_per_record * cfg.dt - cfg.record_interval) > 1e-9 * cfg.record_interval)
        throw UsageError("record_interval must be a multiple of dt");
    const long n_records = static_cast<long>(record_times(cfg.t_end, cfg.record_interval).size());

    DepositionTable table;
    if (serial_reference) table = grid_pushforward(cfg.kernel, M);
    auto rhs = [&](const std::vector<double> &rho) {
        std::vector<double> g = serial_reference ? par::gain_scatter_serial(table, rho) : par::gain_gather_omp(rho);
        for (int k = 0; k < M; ++k) g[k] -= rho[k];
        return g;
    };

    GridRun run;
    run.record.space_spec = cfg.space.spec();
    run.record.kernel_spec = cfg.kernel.spec();
    run.record.seed = cfg.seed;
    GridDensity g = std::move(init);
    g.time = 0.0;
    const double dth = g.dtheta();

    auto record = [&]() {
        run.record.times.push_back(g.time);
        run.record.densities.push_back(g.values);
        if (cfg.diagnostics) {
            record_diagnostics(run.record, grid_measure(g));
            const Vec &m = run.record.moments.back();
            run.theta1.push_back(wrap_angle(std::atan2(m(1), m(0))));
        }
    };

    record();
    std::vector<double> tmp(M);
    double mass_before = g.mass();
    for (long r = 1; r < n_records; ++r) {
        for (long s = 0; s < steps_per_record; ++s) {
            const double h = cfg.dt;
            const auto k1 = rhs(g.values);
            for (int k = 0; k < M; ++k) tmp[k] = g.values[k] + 0.5 * h * k1[k];
            const auto k2 = rhs(tmp);
            for (int k = 0; k < M; ++k) tmp[k] = g.values[k] + 0.5 * h * k2[k];
            const auto k3 = rhs(tmp);
            for (int k = 0; k < M; ++k) tmp[k] = g.values[k] + h * k3[k];
            const auto k4 = rhs(tmp);
            for (int k = 0; k < M; ++k) g.values[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
            double mass = 0.0;
            for (double v : g.values) mass += v;
            mass *= dth;
            run.max_mass_drift = std::max(run.max_mass_drift, std::abs(mass - mass_before));
            mass_before = mass;
            if (std::abs(mass - 1.0) > 1e-12) {
                for (double &v : g.values) v /= mass;
                mass_before = g.mass();
            }
        }
        g.time = static_cast<double>(r) * cfg.record_interval;
        record();
    }
    run.final_state = g;
    return run;
}

Confinement semicircle_confinement_check(const TrajectoryRecord &rec) {
    const double pi = std::numbers::pi;
    auto support = [&](std::size_t r) {
        std::vector<double> s;
        if (!rec.particles.empty()) {
            for (const Point &p : rec.particles[r]) s.push_back(p.coords(0));
        } else {
            const auto &v = rec.densities[r];
            const double dt = 2.0 * pi / static_cast<double>(v.size());
            for (std::size_t k = 0; k < v.size(); ++k)
                if (v[k] > 0.0) s.push_back(k * dt);
        }
        return s;
    };
    const std::size_t n = !rec.particles.empty() ? rec.particles.size() : rec.densities.size();
    if (n == 0) return Confinement::NotApplicable;

    std::vector<double> s0 = support(0);
    if (s0.empty()) return Confinement::NotApplicable;
    std::sort(s0.begin(), s0.end());
    double gap = 2.0 * pi - (s0.back() - s0.front());
    double start = s0.front();
    for (std::size_t k = 1; k < s0.size(); ++k) {
        if (s0[k] - s0[k - 1] > gap) {
            gap = s0[k] - s0[k - 1];
            start = s0[k];
        }
    }
    // Support fits in an open semicircle iff some gap exceeds pi.
    if (!(gap > pi)) return Confinement::NotApplicable;
    const double center = start + 0.5 * (2.0 * pi - gap);
    for (std::size_t r = 0; r < n; ++r)
        for (double th : support(r))
            if (!(std::abs(signed_angle(th - center)) < 0.5 * pi)) return Confinement::Escaped;
    return Confinement::Confined;
}

} // namespace geoflock
