#include "geoflock/kernels.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "geoflock/errors.hpp"

namespace geoflock {

KernelSpec KernelSpec::parse(const std::string &spec, const ManifoldSpace &space) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    KernelSpec k;
    k.space = space;
    if (name == "midpoint") {
        if (colon != std::string::npos) throw ConfigError("kernel", "'midpoint' takes no parameter");
        return k;
    }
    if (colon == std::string::npos) throw ConfigError("kernel", "unrecognised kernel spec '" + spec + "'");
    const std::string arg = spec.substr(colon + 1);
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(arg, &pos);
    } catch (const std::exception &) {
        pos = 0;
    }
    if (pos == 0 || pos != arg.size() || !std::isfinite(v))
        throw ConfigError("kernel", "bad parameter '" + arg + "' in '" + spec + "'");
    k.param = v;
    if (name == "noisy-eps") {
        k.family = KernelFamily::NoisyEps;
        if (!(v > 0.0) || v >= space.injectivity_radius())
            throw ConfigError("kernel", "noisy-eps needs 0 < eps < injectivity radius");
    } else if (name == "noisy-gamma" || name == "bdg") {
        k.family = name == "bdg" ? KernelFamily::BDG : KernelFamily::NoisyGamma;
        if (v < 0.0) throw ConfigError("kernel", name + " needs gamma >= 0");
    } else {
        throw ConfigError("kernel", "unrecognised kernel spec '" + spec + "'");
    }
    return k;
}

std::string KernelSpec::spec() const {
    std::ostringstream os;
    os.precision(17);
    switch (family) {
    case KernelFamily::Midpoint: os << "midpoint"; break;
    case KernelFamily::NoisyEps: os << "noisy-eps:" << param; break;
    case KernelFamily::NoisyGamma: os << "noisy-gamma:" << param; break;
    case KernelFamily::BDG: os << "bdg:" << param; break;
    case KernelFamily::PerpendicularOffset: os << "perpendicular-offset:" << param; break;
    case KernelFamily::ShiftedMidpoint: os << "shifted-midpoint:" << param; break;
    }
    return os.str();
}

bool KernelSpec::deterministic() const {
    switch (family) {
    case KernelFamily::Midpoint:
    case KernelFamily::ShiftedMidpoint: return true;
    case KernelFamily::NoisyEps: return false;
    default: return param == 0.0;
    }
}

namespace {

Point midpoint_sample(const ManifoldSpace &space, const Point &a, const Point &b, Rng &rng) {
    const MidpointSet ms = midpoints(space, a, b);
    return ms.unique() ? ms.point : sample_equator(space, ms, rng);
}

// Midpoint of (fixed, Y) with Y uniform in ball(around, r); resample Y if it lands antipodal to `fixed`.
Point noisy_branch(const ManifoldSpace &space, const Point &fixed, const Point &around, double r, Rng &rng) {
    MidpointSet ms;
    for (int attempt = 0; attempt < 100; ++attempt) {
        const Point y = sample_ball(space, around, r, rng);
        ms = midpoints(space, fixed, y);
        if (ms.unique()) return ms.point;
    }
    return sample_equator(space, ms, rng);
}

} // namespace

Point sample_post_collision(const KernelSpec &kernel, const Point &xs, const Point &xs2, Rng &rng) {
    const ManifoldSpace &space = kernel.space;
    check_point(space, xs);
    check_point(space, xs2);
    switch (kernel.family) {
    case KernelFamily::Midpoint: return midpoint_sample(space, xs, xs2, rng);
    case KernelFamily::NoisyEps:
    case KernelFamily::NoisyGamma: {
        const double r = kernel.family == KernelFamily::NoisyEps ? kernel.param : kernel.param * distance(space, xs, xs2);
        if (r >= space.injectivity_radius()) throw DomainError("noisy kernel ball radius reaches the injectivity radius");
        if (uniform01(rng) < 0.5) return noisy_branch(space, xs, xs2, r, rng);
        return noisy_branch(space, xs2, xs, r, rng);
    }
    case KernelFamily::BDG: {
        const Point m = midpoint_sample(space, xs, xs2, rng);
        const double r = kernel.param * distance(space, m, xs);
        if (r >= space.injectivity_radius()) throw DomainError("BDG ball radius reaches the injectivity radius");
        return sample_ball(space, m, r, rng);
    }
    case KernelFamily::PerpendicularOffset: {
        if (space.family() != Family::Euclidean || space.dim() != 2)
            throw UsageError("perpendicular-offset kernel is defined on euclidean:2 only");
        const Vec v = xs2.coords - xs.coords;
        Vec n(2);
        n << -v(1), v(0);
        const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        return Point(Family::Euclidean, 0.5 * (xs.coords + xs2.coords) + sign * 0.5 * kernel.param * n);
    }
    case KernelFamily::ShiftedMidpoint: {
        const Point m = midpoint_sample(space, xs, xs2, rng);
        return exp_map(space, m, kernel.param * tangent_basis(space, m).front());
    }
    }
    throw UsageError("unknown kernel family");
}

Estimate alpha(const KernelSpec &kernel, const Point &xs, const Point &xs2, const Point &y, std::size_t n_mc,
               Rng &rng) {
    const ManifoldSpace &space = kernel.space;
    const double b = distance(space, xs, y);
    const double b2 = distance(space, xs2, y);
    const double base = 0.5 * (b * b + b2 * b2);
    const MidpointSet ms = midpoints(space, xs, xs2);
    if (kernel.deterministic() && kernel.family != KernelFamily::ShiftedMidpoint) {
        if (ms.unique()) {
            const double m = distance(space, ms.point, y);
            return {m * m - base, 0.0};
        }
        if (space.family() == Family::Circle) {
            const auto pts = circle_equator_points(ms);
            const double m0 = distance(space, pts[0], y), m1 = distance(space, pts[1], y);
            return {0.5 * (m0 * m0 + m1 * m1) - base, 0.0};
        }
    }
    if (kernel.family == KernelFamily::ShiftedMidpoint && ms.unique()) {
        const double m = distance(space, sample_post_collision(kernel, xs, xs2, rng), y);
        return {m * m - base, 0.0};
    }
    const std::size_t n = std::max<std::size_t>(n_mc, 2);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = distance(space, sample_post_collision(kernel, xs, xs2, rng), y);
        sum += d * d;
        sum2 += d * d * d * d;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, (sum2 - n * mean * mean) / static_cast<double>(n - 1));
    return {mean - base, kZ99 * std::sqrt(var / static_cast<double>(n))};
}

namespace {

struct PairStats {
    double beta = 0.0, beta_ci = 0.0;
    double tilde = 0.0, tilde_ci = 0.0;
    double pc = 0.0, pc_ci = 0.0;
    double gap = -1.0;
    bool valid = false;
};

struct Moment {
    double sum = 0.0, sum2 = 0.0;
    void add(double v) {
        sum += v;
        sum2 += v * v;
    }
    double mean(std::size_t n) const { return sum / static_cast<double>(n); }
    double ci(std::size_t n) const {
        if (n < 2) return 0.0;
        const double m = mean(n);
        const double var = std::max(0.0, (sum2 - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
        return kZ99 * std::sqrt(var / static_cast<double>(n));
    }
};

std::pair<Point, Point> sample_pair(const ManifoldSpace &space, std::size_t k, double ref_radius, Rng &rng) {
    const bool compact = space.sphere_like();
    const Point a = compact ? sample_uniform(space, rng) : sample_ball(space, origin(space), ref_radius, rng);
    const int stratum = static_cast<int>(k % 10);
    if (stratum < 8) {
        Point b = compact ? sample_uniform(space, rng) : sample_ball(space, origin(space), ref_radius, rng);
        return {a, b};
    }
    const double diameter = compact ? std::numbers::pi * space.length_scale() : 2.0 * ref_radius;
    const double r = stratum == 8 ? 1e-3 + (0.1 - 1e-3) * uniform01(rng) : diameter - 0.1 * uniform01(rng);
    return {a, exp_map(space, a, r * sample_direction(space, a, rng))};
}

} // namespace

ContractionReport estimate_contraction(const KernelSpec &kernel, std::size_t n_pairs, Rng &rng,
                                       const ContractionOptions &opt) {
    if (n_pairs < 100) throw UsageError("estimate_contraction needs at least 100 pairs");
    const ManifoldSpace &space = kernel.space;
    const std::uint64_t master = rng();
    const std::size_t n_mc = kernel.deterministic() && kernel.family != KernelFamily::PerpendicularOffset ? 1 : opt.n_mc;
    std::vector<PairStats> stats(n_pairs);

#pragma omp parallel for schedule(dynamic, 8)
    for (long kk = 0; kk < static_cast<long>(n_pairs); ++kk) {
        const auto k = static_cast<std::size_t>(kk);
        Rng local = make_stream(master, k);
        const auto [a, b] = sample_pair(space, k, opt.reference_radius, local);
        const double d = distance(space, a, b);
        if (d < 1e-9) continue;
        const MidpointSet ms = midpoints(space, a, b);
        Moment da2, db2, dm2, dap, dbp;
        for (std::size_t s = 0; s < n_mc; ++s) {
            const Point x = sample_post_collision(kernel, a, b, local);
            const double xa = distance(space, x, a), xb = distance(space, x, b);
            const double xm = distance_to_set(space, x, ms);
            da2.add(xa * xa);
            db2.add(xb * xb);
            dm2.add(xm * xm);
            dap.add(std::pow(xa, opt.p));
            dbp.add(std::pow(xb, opt.p));
        }
        PairStats &st = stats[k];
        const double s2 = 4.0 / (d * d);
        const double ba = s2 * da2.mean(n_mc) - 1.0, bb = s2 * db2.mean(n_mc) - 1.0;
        st.beta = std::max(ba, bb);
        st.beta_ci = s2 * (ba >= bb ? da2.ci(n_mc) : db2.ci(n_mc));
        st.tilde = s2 * dm2.mean(n_mc);
        st.tilde_ci = s2 * dm2.ci(n_mc);
        const double dp = std::pow(d, opt.p);
        st.pc = std::max(dap.mean(n_mc), dbp.mean(n_mc)) / dp;
        st.pc_ci = (dap.mean(n_mc) >= dbp.mean(n_mc) ? dap.ci(n_mc) : dbp.ci(n_mc)) / dp;
        st.gap = st.beta - (st.tilde + 2.0 * std::sqrt(st.tilde));
        st.valid = true;
    }

    ContractionReport rep;
    rep.p = opt.p;
    rep.n_pairs = n_pairs;
    rep.n_mc = n_mc;
    rep.bound_gap = -std::numeric_limits<double>::infinity();
    for (const PairStats &st : stats) {
        if (!st.valid) continue;
        if (st.beta > rep.beta_hat) {
            rep.beta_hat = st.beta;
            rep.beta_ci = st.beta_ci;
        }
        if (st.tilde > rep.beta_tilde_hat) {
            rep.beta_tilde_hat = st.tilde;
            rep.beta_tilde_ci = st.tilde_ci;
        }
        if (st.pc > rep.p_constant_hat) {
            rep.p_constant_hat = st.pc;
            rep.p_constant_ci = st.pc_ci;
        }
        rep.bound_gap = std::max(rep.bound_gap, st.gap);
    }
    return rep;
}

namespace {

double chi2_two_sample(const std::vector<int> &a, const std::vector<int> &b) {
    double chi2 = 0.0;
    int bins = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double s = a[k] + b[k];
        if (s == 0) continue;
        ++bins;
        chi2 += (a[k] - b[k]) * static_cast<double>(a[k] - b[k]) / s;
    }
    if (bins < 2) return 1.0;
    return boost::math::gamma_q(0.5 * (bins - 1), 0.5 * chi2);
}

std::vector<double> tangent_coords(const ManifoldSpace &space, const Point &base, const std::vector<Vec> &basis,
                                   const Point &x) {
    const Vec v = log_map(space, base, x);
    std::vector<double> c(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i)
        c[i] = space.family() == Family::Hyperbolic ? minkowski(v, basis[i]) : v.dot(basis[i]);
    return c;
}

// Bin labels for two clouds of tangent coordinates: pooled quantiles in 1-D,
// angular sectors (times two radial rings when `rings`) otherwise.
std::pair<std::vector<int>, std::vector<int>> bin_counts(const std::vector<std::vector<double>> &a,
                                                         const std::vector<std::vector<double>> &b, int n_bins,
                                                         bool rings) {
    const int dim = static_cast<int>(a.front().size());
    std::vector<int> ca, cb;
    if (dim == 1) {
        std::vector<double> pooled;
        for (const auto &v : a) pooled.push_back(v[0]);
        for (const auto &v : b) pooled.push_back(v[0]);
        std::sort(pooled.begin(), pooled.end());
        std::vector<double> edges;
        for (int k = 1; k < n_bins; ++k) edges.push_back(pooled[pooled.size() * k / n_bins]);
        auto label = [&](double x) {
            return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin());
        };
        ca.assign(n_bins, 0);
        cb.assign(n_bins, 0);
        for (const auto &v : a) ++ca[label(v[0])];
        for (const auto &v : b) ++cb[label(v[0])];
        return {ca, cb};
    }
    double median_r = 0.0;
    if (rings) {
        std::vector<double> radii;
        for (const auto &v : a) radii.push_back(std::hypot(v[0], v[1]));
        for (const auto &v : b) radii.push_back(std::hypot(v[0], v[1]));
        std::nth_element(radii.begin(), radii.begin() + radii.size() / 2, radii.end());
        median_r = radii[radii.size() / 2];
    }
    const int total = rings ? 2 * n_bins : n_bins;
    ca.assign(total, 0);
    cb.assign(total, 0);
    auto label = [&](const std::vector<double> &v) {
        const double ang = std::atan2(v[1], v[0]) + std::numbers::pi;
        int s = std::min(n_bins - 1, static_cast<int>(ang / (2.0 * std::numbers::pi) * n_bins));
        if (rings && std::hypot(v[0], v[1]) > median_r) s += n_bins;
        return s;
    };
    for (const auto &v : a) ++ca[label(v)];
    for (const auto &v : b) ++cb[label(v)];
    return {ca, cb};
}

bool all_near_zero(const std::vector<std::vector<double>> &cloud) {
    for (const auto &v : cloud)
        for (double c : v)
            if (std::abs(c) > 1e-12) return false;
    return true;
}

} // namespace

double check_midpoint_symmetry(const KernelSpec &kernel, const Point &xs, const Point &xs2, std::size_t n_mc,
                               int n_bins, Rng &rng, double kappa0) {
    const ManifoldSpace &space = kernel.space;
    if (kappa0 <= 0.0) kappa0 = 0.5 * space.injectivity_radius();
    if (!(distance(space, xs, xs2) < kappa0)) throw DomainError("symmetry check needs d(x*, x*') < kappa0");
    if (n_mc < 4 || n_bins < 2) throw UsageError("symmetry check needs n_mc >= 4 and n_bins >= 2");
    const Point xm = midpoints(space, xs, xs2).point;
    const auto basis = tangent_basis(space, xm);
    std::vector<std::vector<double>> cloud;
    for (std::size_t k = 0; k < n_mc; ++k)
        cloud.push_back(tangent_coords(space, xm, basis, sample_post_collision(kernel, xs, xs2, rng)));
    if (all_near_zero(cloud)) return 1.0;
    const std::size_t h = n_mc / 2;
    std::vector<std::vector<double>> a(cloud.begin(), cloud.begin() + h), b(cloud.begin() + h, cloud.begin() + 2 * h);
    for (auto &v : b)
        for (double &c : v) c = -c;
    const auto [ca, cb] = bin_counts(a, b, n_bins, false);
    return chi2_two_sample(ca, cb);
}

double check_exchange_symmetry(const KernelSpec &kernel, const Point &xs, const Point &xs2, std::size_t n_mc,
                               int n_bins, Rng &rng) {
    const ManifoldSpace &space = kernel.space;
    const MidpointSet ms = midpoints(space, xs, xs2);
    if (!ms.unique()) throw DomainError("exchange symmetry check needs a unique midpoint");
    const auto basis = tangent_basis(space, ms.point);
    std::vector<std::vector<double>> a, b;
    for (std::size_t k = 0; k < n_mc; ++k) {
        a.push_back(tangent_coords(space, ms.point, basis, sample_post_collision(kernel, xs, xs2, rng)));
        b.push_back(tangent_coords(space, ms.point, basis, sample_post_collision(kernel, xs2, xs, rng)));
    }
    if (all_near_zero(a) && all_near_zero(b)) return 1.0;
    const auto [ca, cb] = bin_counts(a, b, n_bins, true);
    return chi2_two_sample(ca, cb);
}

DepositionTable grid_pushforward(const KernelSpec &kernel, int M) {
    if (kernel.family != KernelFamily::Midpoint || kernel.space.family() != Family::Circle)
        throw UsageError("grid deposition needs the midpoint kernel on the circle");
    if (M < 4 || M % 2 != 0) throw UsageError("grid size must be even and >= 4");
    const ManifoldSpace &space = kernel.space;
    const double dtheta = 2.0 * std::numbers::pi / M;
    DepositionTable t;
    t.M = M;
    t.row_ptr.reserve(static_cast<std::size_t>(M) * M + 1);
    t.row_ptr.push_back(0);
    auto deposit = [&](double theta, double w) {
        const double h = 2.0 * theta / dtheta;
        const long r = std::lround(h);
        if (std::abs(h - static_cast<double>(r)) > 1e-6) throw std::logic_error("grid midpoint off the half-node lattice");
        if (r % 2 == 0) {
            t.node.push_back(static_cast<int>((r / 2) % M));
            t.fraction.push_back(w);
        } else {
            t.node.push_back(static_cast<int>(((r - 1) / 2) % M));
            t.fraction.push_back(0.5 * w);
            t.node.push_back(static_cast<int>(((r + 1) / 2) % M));
            t.fraction.push_back(0.5 * w);
        }
    };
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            const MidpointSet ms = midpoints(space, circle_point(i * dtheta), circle_point(j * dtheta));
            if (ms.unique()) {
                deposit(ms.point.coords(0), 1.0);
            } else {
                for (const Point &p : circle_equator_points(ms)) deposit(p.coords(0), 0.5);
            }
            t.row_ptr.push_back(static_cast<int>(t.node.size()));
        }
    }
    return t;
}

} // namespace geoflock
