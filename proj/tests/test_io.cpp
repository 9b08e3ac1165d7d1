#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "geoflock/analysis.hpp"
#include "geoflock/errors.hpp"
#include "geoflock/measure_io.hpp"
#include "geoflock/report.hpp"

using namespace geoflock;
namespace fs = std::filesystem;

namespace {

std::string tmp(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / "geoflock_io_tests";
    fs::create_directories(dir);
    return (dir / name).string();
}

void write_text(const std::string &path, const std::string &text) { std::ofstream(path) << text; }

} // namespace

TEST_CASE("doubles print and parse exactly") {
    Rng rng = make_stream(70, 0);
    for (int k = 0; k < 1000; ++k) {
        const double x = (uniform01(rng) - 0.5) * std::pow(10.0, static_cast<int>(uniform01(rng) * 40) - 20);
        CHECK(parse_double(format_double(x), "x") == x);
    }
    CHECK_THROWS_AS(parse_double("1.5x", "here"), ConfigError);
    CHECK_THROWS_AS(parse_double("", "here"), ConfigError);
}

TEST_CASE("measure files round trip bitwise") {
    Rng rng = make_stream(71, 0);
    for (const auto &s : {ManifoldSpace::circle(), ManifoldSpace::sphere(2), ManifoldSpace::hyperbolic(-1),
                          ManifoldSpace::euclidean(3)}) {
        for (int k = 0; k < 20; ++k) {
            const DiscreteMeasure m = random_measure(s, 30, rng);
            const std::string p = tmp("m.csv");
            write_measure_csv(p, m);
            const DiscreteMeasure r = read_measure_csv(p, s);
            REQUIRE(r.size() == m.size());
            for (std::size_t i = 0; i < m.size(); ++i) {
                CHECK(r.weight(i) == m.weight(i));
                CHECK(r.point(i).coords == m.point(i).coords);
            }
        }
    }
}

TEST_CASE("measure file errors name the line") {
    const auto S2 = ManifoldSpace::sphere(2);
    const std::string p = tmp("bad.csv");
    write_text(p, "weight,c0,c1\n1,0,1\n");
    CHECK_THROWS_AS(read_measure_csv(p, S2), ConfigError);
    write_text(p, "weight,c0,c1,c2\n0.5,1,0,0\n0.5,0,1\n");
    try {
        read_measure_csv(p, S2);
        FAIL("expected an error");
    } catch (const ConfigError &e) {
        CHECK(e.where() == p + ":3");
    }
    write_text(p, "weight,c0,c1,c2\n0.5,1,0,0\n0.5,0,2,0\n");
    CHECK_THROWS_AS(read_measure_csv(p, S2), ConfigError);
    write_text(p, "weight,c0,c1,c2\n0.5,1,0,0\n0.4,0,1,0\n");
    CHECK_THROWS_AS(read_measure_csv(p, S2), ConfigError);
    CHECK_THROWS_AS(read_measure_csv(tmp("missing.csv"), S2), ConfigError);
}

TEST_CASE("plan file") {
    const auto S1 = ManifoldSpace::circle();
    const auto a = DiscreteMeasure::uniform(S1, {circle_point(0), circle_point(1)});
    const auto b = DiscreteMeasure::uniform(S1, {circle_point(1.1), circle_point(0.1)});
    const std::string p = tmp("plan.csv");
    write_plan_csv(p, w2_exact(a, b).plan);
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    CHECK(line == "source,target,mass");
    std::getline(in, line);
    CHECK((line == "0,1,0.5" || line == "1,0,0.5"));
}

TEST_CASE("trajectory files round trip bitwise") {
    SimConfig c;
    c.space = ManifoldSpace::sphere(2);
    c.kernel = KernelSpec::midpoint(c.space);
    c.n_particles = 40;
    c.t_end = 1.0;
    c.record_interval = 0.25;
    c.init.kind = InitSpec::Kind::Cap;
    c.init.center = sphere_point({0, 0, 1});
    c.init.radius = 0.5;
    const auto rec = simulate_replica(c, 0);
    const std::string p = tmp("traj.csv");
    write_trajectory_csv(p, rec);
    const auto back = read_trajectory_csv(p, c.space);
    CHECK(back.times == rec.times);
    CHECK(back.energy == rec.energy);
    CHECK(back.w2_best == rec.w2_best);
    REQUIRE(back.centers.size() == rec.centers.size());
    for (std::size_t k = 0; k < rec.size(); ++k) {
        CHECK(back.centers[k].coords == rec.centers[k].coords);
        CHECK(back.moments[k] == rec.moments[k]);
    }
    write_text(p, "t,energy\n0,1\n");
    CHECK_THROWS_AS(read_trajectory_csv(p, c.space), ConfigError);
}

TEST_CASE("check lines carry the report fields") {
    const json l = check_line("x", json{{"n", 3}}, 0.5, 1.0, true);
    for (const char *f : {"check", "params", "statistic", "bound", "pass"}) CHECK(l.contains(f));
    std::ostringstream os;
    append_ndjson(os, l);
    CHECK(json::parse(os.str()) == l);
}
