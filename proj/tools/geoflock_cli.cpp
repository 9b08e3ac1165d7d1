#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <omp.h>
#include <set>
#include <sstream>

#include "geoflock/analysis.hpp"
#include "geoflock/errors.hpp"
#include "geoflock/measure_io.hpp"
#include "geoflock/parallel.hpp"
#include "geoflock/report.hpp"
#include "geoflock/verify.hpp"

namespace fs = std::filesystem;
using namespace geoflock;

namespace {

/// A check that ran and did not hold; exit code 3.
struct CheckFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Typed access to one JSON object with unknown-field detection.
class Fields {
public:
    Fields(const json &j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
        if (!j_.is_object()) throw ConfigError(ctx_.empty() ? "config" : ctx_, "expected a JSON object");
    }

    bool has(const std::string &key) {
        seen_.insert(key);
        return j_.contains(key);
    }
    std::string path(const std::string &key) const { return "field '" + (ctx_.empty() ? key : ctx_ + "." + key) + "'"; }

    const json &raw(const std::string &key) {
        if (!has(key)) throw ConfigError(path(key), "is required");
        return j_.at(key);
    }
    std::string str(const std::string &key) {
        const json &v = raw(key);
        if (!v.is_string()) throw ConfigError(path(key), "must be a string");
        return v.get<std::string>();
    }
    std::string str(const std::string &key, const std::string &def) { return has(key) ? str(key) : def; }
    double num(const std::string &key) {
        const json &v = raw(key);
        if (!v.is_number()) throw ConfigError(path(key), "must be a number");
        return v.get<double>();
    }
    double num(const std::string &key, double def) { return has(key) ? num(key) : def; }
    double positive(const std::string &key, double def) {
        const double v = num(key, def);
        if (!(v > 0.0)) throw ConfigError(path(key), "must be positive");
        return v;
    }
    long integer(const std::string &key, long def, long min) {
        if (!has(key)) return def;
        const json &v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(path(key), "must be an integer");
        const long x = v.get<long>();
        if (x < min) throw ConfigError(path(key), "must be >= " + std::to_string(min));
        return x;
    }
    std::uint64_t seed(const std::string &key) {
        if (!has(key)) return 0;
        const json &v = j_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError(path(key), "must be a nonnegative integer");
        return v.get<std::uint64_t>();
    }
    bool flag(const std::string &key, bool def) {
        if (!has(key)) return def;
        const json &v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(path(key), "must be true or false");
        return v.get<bool>();
    }
    std::vector<double> numbers(const std::string &key) {
        const json &v = raw(key);
        if (!v.is_array()) throw ConfigError(path(key), "must be an array of numbers");
        std::vector<double> out;
        for (const json &x : v) {
            if (!x.is_number()) throw ConfigError(path(key), "must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "is not a known field for this mode");
    }

private:
    const json &j_;
    std::string ctx_;
    std::set<std::string> seen_;
};

ManifoldSpace parse_space(Fields &f, const std::string &def = "") {
    const std::string spec = def.empty() ? f.str("space") : f.str("space", def);
    try {
        return ManifoldSpace::parse(spec);
    } catch (const ConfigError &e) {
        throw ConfigError(f.path("space"), e.what());
    }
}

KernelSpec parse_kernel(Fields &f, const ManifoldSpace &space) {
    try {
        return KernelSpec::parse(f.str("kernel", "midpoint"), space);
    } catch (const ConfigError &e) {
        throw ConfigError(f.path("kernel"), e.what());
    }
}

Point parse_point(const ManifoldSpace &space, const json &v, const std::string &where) {
    if (!v.is_array()) throw ConfigError(where, "a point must be an array of coordinates");
    Vec c(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!v[k].is_number()) throw ConfigError(where, "coordinates must be numbers");
        c(static_cast<Eigen::Index>(k)) = v[k].get<double>();
    }
    try {
        return make_point(space, c);
    } catch (const UsageError &e) {
        throw ConfigError(where, e.what());
    }
}

InitSpec parse_init(Fields &parent, const ManifoldSpace &space, bool grid) {
    Fields f(parent.raw("init"), "init");
    InitSpec init;
    const std::string kind = f.str("kind");
    if (kind == "point") {
        init.kind = InitSpec::Kind::Point;
        init.center = parse_point(space, f.raw("center"), f.path("center"));
    } else if (kind == "atoms") {
        init.kind = InitSpec::Kind::Atoms;
        const json &pts = f.raw("points");
        if (!pts.is_array() || pts.empty()) throw ConfigError(f.path("points"), "must be a nonempty array of points");
        for (std::size_t k = 0; k < pts.size(); ++k)
            init.atoms.push_back(parse_point(space, pts[k], f.path("points") + "[" + std::to_string(k) + "]"));
        init.weights = f.has("weights") ? f.numbers("weights")
                                        : std::vector<double>(init.atoms.size(), 1.0 / static_cast<double>(init.atoms.size()));
        if (init.weights.size() != init.atoms.size()) throw ConfigError(f.path("weights"), "must match the number of points");
    } else if (kind == "uniform-box" && !grid) {
        init.kind = InitSpec::Kind::UniformBox;
        init.lo = f.num("lo", 0.0);
        init.hi = f.num("hi", 1.0);
        if (!(init.hi > init.lo)) throw ConfigError(f.path("hi"), "must exceed lo");
    } else if (kind == "cap" && !grid) {
        init.kind = InitSpec::Kind::Cap;
        init.center = parse_point(space, f.raw("center"), f.path("center"));
        init.radius = f.positive("radius", 0.1);
    } else if (kind == "uniform") {
        init.kind = InitSpec::Kind::Uniform;
    } else if (kind == "geodesic" && !grid) {
        init.kind = InitSpec::Kind::Geodesic;
        init.center = parse_point(space, f.raw("center"), f.path("center"));
        init.radius = f.positive("half_length", 0.1);
    } else if (kind == "bump" && grid) {
        init.kind = InitSpec::Kind::Bump;
        init.amplitude = f.num("amplitude", 0.25);
        if (std::abs(init.amplitude) > 1.0) throw ConfigError(f.path("amplitude"), "must lie in [-1, 1]");
    } else if (kind == "bump-squared" && grid) {
        init.kind = InitSpec::Kind::BumpSquared;
    } else {
        throw ConfigError(f.path("kind"), "'" + kind + "' is not an initial condition for " +
                                              (grid ? "grid runs" : "particle runs"));
    }
    f.finish();
    return init;
}

void prepare_dir(const std::string &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("field 'output'", "cannot create directory '" + dir + "'");
}

std::string join(const std::string &dir, const std::string &name) { return (fs::path(dir) / name).string(); }

void print_fit(const RateFit &fit) {
    std::printf("slope %.6f over [%g, %g] (%zu points, r2 %.6f)\n", fit.slope, fit.t_min, fit.t_max, fit.n_points, fit.r2);
}

void write_fit(const std::string &path, const RateFit &fit) {
    write_table_csv(path, {"t_min", "t_max", "slope", "intercept", "r2", "residual_rms"},
                    {{fit.t_min}, {fit.t_max}, {fit.slope}, {fit.intercept}, {fit.r2}, {fit.residual_rms}});
}

// ---- modes ---------------------------------------------------------------

struct ParticlesJob {
    SimConfig cfg;
    std::string out;
};

ParticlesJob parse_particles(Fields &f) {
    ParticlesJob job;
    SimConfig &c = job.cfg;
    c.space = parse_space(f);
    c.kernel = parse_kernel(f, c.space);
    c.n_particles = static_cast<std::size_t>(f.integer("n", 1000, 2));
    c.t_end = f.positive("t_end", 1.0);
    c.record_interval = f.positive("record_interval", 0.1);
    c.seed = f.seed("seed");
    c.replicas = static_cast<int>(f.integer("replicas", 1, 1));
    const std::string mode = f.str("update_mode", "single");
    if (mode == "single")
        c.mode = UpdateMode::Single;
    else if (mode == "pair")
        c.mode = UpdateMode::Pair;
    else
        throw ConfigError(f.path("update_mode"), "must be 'single' or 'pair'");
    c.init = parse_init(f, c.space, false);
    c.keep_snapshots = f.flag("snapshots", false);
    job.out = f.str("output", "out");
    return job;
}

int do_particles(const ParticlesJob &job) {
    const auto recs = simulate_particles(job.cfg);
    prepare_dir(job.out);
    for (const auto &rec : recs) {
        write_trajectory_csv(join(job.out, "trajectory_" + std::to_string(rec.replica) + ".csv"), rec);
        for (std::size_t k = 0; k < rec.particles.size(); ++k) {
            char name[96];
            std::snprintf(name, sizeof name, "particles_%d_t%g.csv", rec.replica, rec.times[k]);
            write_measure_csv(join(job.out, name), DiscreteMeasure::uniform(job.cfg.space, rec.particles[k]));
        }
    }
    std::printf("%d replica(s) written to %s\n", job.cfg.replicas, job.out.c_str());
    return 0;
}

struct GridJob {
    SimConfig cfg;
    std::string out;
    std::vector<double> snapshot_times;
    bool has_window = false;
    double w0 = 0.0, w1 = 0.0;
};

GridJob parse_grid(Fields &f) {
    GridJob job;
    SimConfig &c = job.cfg;
    c.space = parse_space(f, "circle");
    if (c.space.family() != Family::Circle) throw ConfigError(f.path("space"), "grid runs live on the circle");
    c.kernel = parse_kernel(f, c.space);
    if (c.kernel.family != KernelFamily::Midpoint) throw ConfigError(f.path("kernel"), "grid runs use the midpoint kernel");
    c.grid_size = static_cast<int>(f.integer("m", 256, 4));
    if (c.grid_size % 2 != 0) throw ConfigError(f.path("m"), "must be even");
    c.dt = f.positive("dt", 0.01);
    c.t_end = f.positive("t_end", 20.0);
    c.record_interval = f.positive("record_interval", 0.1);
    const double steps = c.record_interval / c.dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
        throw ConfigError(f.path("record_interval"), "must be a multiple of dt");
    c.init = f.has("init") ? parse_init(f, c.space, true) : InitSpec{InitSpec::Kind::Bump};
    if (f.has("snapshot_times")) job.snapshot_times = f.numbers("snapshot_times");
    if (f.has("fit_window")) {
        const auto w = f.numbers("fit_window");
        if (w.size() != 2 || !(w[1] > w[0])) throw ConfigError(f.path("fit_window"), "must be [t_min, t_max] with t_min < t_max");
        job.has_window = true;
        job.w0 = w[0];
        job.w1 = w[1];
    }
    c.seed = f.seed("seed");
    job.out = f.str("output", "out");
    return job;
}

void write_grid_outputs(const GridJob &job, const GridRun &run, bool figure_reference) {
    const auto &rec = run.record;
    write_trajectory_csv(join(job.out, "trajectory.csv"), rec);
    write_table_csv(join(job.out, "theta1.csv"), {"t", "theta1"}, {rec.times, run.theta1});
    for (double ts : job.snapshot_times) {
        for (std::size_t k = 0; k < rec.times.size(); ++k)
            if (std::abs(rec.times[k] - ts) < 1e-9) write_snapshot_csv(join(job.out, snapshot_name(ts)), rec.densities[k]);
    }
    const RateFit fit = job.has_window ? fit_decay_rate(rec.times, rec.energy, job.w0, job.w1)
                                       : fit_decay_rate(rec.times, rec.energy);
    write_fit(join(job.out, "energy_fit.csv"), fit);
    if (figure_reference) {
        // e^{-t/2} reference through the value at t = 10 (or the closest recorded time).
        std::size_t anchor = 0;
        for (std::size_t k = 0; k < rec.times.size(); ++k)
            if (std::abs(rec.times[k] - 10.0) < std::abs(rec.times[anchor] - 10.0)) anchor = k;
        std::vector<double> ref;
        for (double t : rec.times) ref.push_back(rec.energy[anchor] * std::exp(-0.5 * (t - rec.times[anchor])));
        write_table_csv(join(job.out, "energy.csv"), {"t", "energy", "reference"}, {rec.times, rec.energy, ref});
    }
    print_fit(fit);
}

int do_grid(const GridJob &job) {
    const GridRun run = run_circle_grid(job.cfg);
    prepare_dir(job.out);
    write_grid_outputs(job, run, false);
    return 0;
}

GridJob figures_job(const std::string &out) {
    GridJob job;
    job.cfg.space = ManifoldSpace::circle();
    job.cfg.kernel = KernelSpec::midpoint(job.cfg.space);
    job.cfg.grid_size = 256;
    job.cfg.dt = 0.01;
    job.cfg.t_end = 20.0;
    job.cfg.record_interval = 0.1;
    job.cfg.init.kind = InitSpec::Kind::Bump;
    job.cfg.init.amplitude = 0.25;
    job.snapshot_times = {0.0, 1.0, 2.0, 5.0, 10.0, 20.0};
    job.has_window = true;
    job.w0 = 10.0;
    job.w1 = 20.0;
    job.out = out;
    return job;
}

int do_figures(const GridJob &job) {
    const GridRun run = run_circle_grid(job.cfg);
    prepare_dir(job.out);
    write_grid_outputs(job, run, true);
    std::printf("figure data written to %s\n", job.out.c_str());
    return 0;
}

int report_checks(const std::vector<json> &lines, std::ostream &os) {
    std::vector<std::string> failed;
    for (const json &l : lines) {
        append_ndjson(os, l);
        if (!l.at("pass").get<bool>()) failed.push_back(l.at("check").get<std::string>());
    }
    if (failed.empty()) return 0;
    std::string msg = "failed checks:";
    for (const auto &s : failed) msg += " " + s;
    throw CheckFailed(msg);
}

int do_verify(const std::string &suite, std::uint64_t seed, const std::string &out_file) {
    const auto lines = run_suite(suite, seed);
    if (out_file.empty()) return report_checks(lines, std::cout);
    std::ofstream os(out_file);
    if (!os) throw ConfigError(out_file, "cannot write report");
    return report_checks(lines, os);
}

int do_transport(const std::string &a, const std::string &b, const std::string &space_spec, const std::string &plan) {
    const ManifoldSpace space = ManifoldSpace::parse(space_spec);
    const DiscreteMeasure ra = read_measure_csv(a, space);
    const DiscreteMeasure rb = read_measure_csv(b, space);
    const W2Result r = w2_exact(ra, rb);
    std::printf("%.12g\n", r.value);
    if (!plan.empty()) write_plan_csv(plan, r.plan);
    return 0;
}

int do_example1(int M, double dt, double t_end, double offset, const std::string &out) {
    const Example1Result r = example1_grid_separation(M, dt, t_end, offset);
    const bool pass = r.w2 >= 0.5 * std::numbers::pi;
    const json line = check_line("example1_separation", json{{"M", M}, {"dt", dt}, {"offset", offset}, {"t", r.t}}, r.w2,
                                 0.5 * std::numbers::pi, pass);
    if (!out.empty()) {
        prepare_dir(out);
        std::ofstream os(join(out, "example1.ndjson"));
        append_ndjson(os, line);
        write_snapshot_csv(join(out, "lower_final.csv"), r.lower.final_state.values);
        write_snapshot_csv(join(out, "upper_final.csv"), r.upper.final_state.values);
    }
    return report_checks({line}, std::cout);
}

int do_example2(double eps) {
    const Example2Result r = example2_moment_derivative(eps);
    const double ex_m[2] = {-1.0 / 3.0, eps / 3.0};
    const double ex_d[2] = {-4.0 / 9.0 + eps / 3.0, -eps / 9.0};
    std::printf("moment     (%.12f, %.12f)  expected (%.12f, %.12f)\n", r.moment(0), r.moment(1), ex_m[0], ex_m[1]);
    std::printf("derivative (%.12f, %.12f)  expected (%.12f, %.12f)\n", r.derivative(0), r.derivative(1), ex_d[0], ex_d[1]);
    std::printf("cross      %.6e\n", r.cross);
    const double mdev = std::max(std::abs(r.moment(0) - ex_m[0]), std::abs(r.moment(1) - ex_m[1]));
    const double ddev = std::max(std::abs(r.derivative(0) - ex_d[0]), std::abs(r.derivative(1) - ex_d[1]));
    const json p{{"epsilon", eps}};
    return report_checks({check_line("example2_moment", p, mdev, 1e-3, mdev <= 1e-3),
                          check_line("example2_derivative", p, ddev, 1e-3, ddev <= 1e-3),
                          check_line("example2_non_collinear", p, std::abs(r.cross), 0.0, r.cross != 0.0)},
                         std::cout);
}

json load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k < upto; ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col), "invalid JSON");
    }
}

int run_config(const std::string &path) {
    const json cfg = load_config(path);
    Fields f(cfg, "");
    const std::string mode = f.str("mode");
    if (f.has("threads")) {
        const long t = f.integer("threads", 1, 1);
        if (!std::getenv("GEOFLOCK_THREADS")) omp_set_num_threads(static_cast<int>(t));
    }
    if (mode == "particles") {
        const ParticlesJob job = parse_particles(f);
        f.finish();
        return do_particles(job);
    }
    if (mode == "grid") {
        const GridJob job = parse_grid(f);
        f.finish();
        return do_grid(job);
    }
    if (mode == "figures") {
        const GridJob job = figures_job(f.str("output", "figures"));
        f.finish();
        return do_figures(job);
    }
    if (mode == "verify") {
        const std::string suite = f.str("suite", "all");
        const std::uint64_t seed = f.seed("seed");
        const std::string out = f.str("output", "");
        f.finish();
        std::string file;
        if (!out.empty()) {
            prepare_dir(out);
            file = join(out, "report.ndjson");
        }
        return do_verify(suite, seed, file);
    }
    if (mode == "transport") {
        const std::string a = f.str("a"), b = f.str("b");
        const std::string space = f.str("space");
        const std::string out = f.str("output", "");
        f.finish();
        std::string plan;
        if (!out.empty()) {
            prepare_dir(out);
            plan = join(out, "plan.csv");
        }
        return do_transport(a, b, space, plan);
    }
    if (mode == "example1") {
        const int M = static_cast<int>(f.integer("m", 256, 4));
        if (M % 2 != 0) throw ConfigError(f.path("m"), "must be even");
        const double dt = f.positive("dt", 0.01);
        const double t_end = f.positive("t_end", 4.0 * std::log(4.0) + 1.0);
        const double offset = f.positive("offset", 0.05);
        const std::string out = f.str("output", "");
        f.finish();
        return do_example1(M, dt, t_end, offset, out);
    }
    if (mode == "example2") {
        const double eps = f.num("epsilon", 0.01);
        if (!(eps > 0.0 && eps < 0.3)) throw ConfigError(f.path("epsilon"), "must lie in (0, 0.3)");
        f.finish();
        return do_example2(eps);
    }
    throw ConfigError(f.path("mode"), "unknown mode '" + mode + "'");
}

} // namespace

int main(int argc, char **argv) {
    par::configure_threads();

    CLI::App app{"geoflock: kinetic alignment on constant-curvature spaces"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (GEOFLOCK_THREADS takes precedence)")->check(CLI::PositiveNumber);

    std::string config_path;
    auto *run = app.add_subcommand("run", "run an experiment described by a JSON config");
    run->add_option("config", config_path, "config file")->required();

    std::string a, b, space_spec, plan_path = "plan.csv";
    auto *transport = app.add_subcommand("transport", "exact W2 between two measure CSV files");
    transport->add_option("a", a, "first measure")->required();
    transport->add_option("b", b, "second measure")->required();
    transport->add_option("--space", space_spec, "space spec, e.g. sphere:2")->required();
    transport->add_option("--plan", plan_path, "where to write the optimal plan");

    std::string suite = "all", report_path;
    std::uint64_t seed = 0;
    auto *verify = app.add_subcommand("verify", "run an invariant suite and print NDJSON");
    verify->add_option("--suite", suite, "geometry, measures, kernels, dynamics, analysis or all");
    verify->add_option("--seed", seed, "master seed");
    verify->add_option("--out", report_path, "write the report here instead of stdout");

    std::string figures_dir = "figures";
    auto *figures = app.add_subcommand("figures", "write the CSV data behind the density and energy figures");
    figures->add_option("--out", figures_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (threads > 0 && !std::getenv("GEOFLOCK_THREADS")) omp_set_num_threads(threads);

    try {
        if (*run) return run_config(config_path);
        if (*transport) return do_transport(a, b, space_spec, plan_path);
        if (*verify) return do_verify(suite, seed, report_path);
        if (*figures) return do_figures(figures_job(figures_dir));
    } catch (const ConfigError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const UsageError &e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const CheckFailed &e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 3;
    } catch (const DomainError &e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const ResourceError &e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
