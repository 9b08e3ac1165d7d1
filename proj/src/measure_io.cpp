#include "geoflock/measure_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "geoflock/errors.hpp"

namespace geoflock {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string &s, const std::string &where) {
    if (s.empty()) throw ConfigError(where, "empty number");
    errno = 0;
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) throw ConfigError(where, "bad number '" + s + "'");
    return v;
}

namespace {

std::vector<std::string> split_csv(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

DiscreteMeasure read_measure_csv(const std::string &path, const ManifoldSpace &space) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open measure file");
    const int dim = space.ambient_dim();
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ":1", "missing header");
    const auto header = split_csv(line);
    std::string expected = "weight";
    for (int d = 0; d < dim; ++d) expected += ",c" + std::to_string(d);
    if (static_cast<int>(header.size()) != dim + 1 || header[0] != "weight")
        throw ConfigError(path + ":1", "header must be '" + expected + "' for " + space.spec());
    for (int d = 0; d < dim; ++d)
        if (header[d + 1] != "c" + std::to_string(d))
            throw ConfigError(path + ":1", "header must be '" + expected + "' for " + space.spec());

    std::vector<Point> pts;
    std::vector<double> w;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const std::string where = path + ":" + std::to_string(lineno);
        const auto cells = split_csv(line);
        if (static_cast<int>(cells.size()) != dim + 1)
            throw ConfigError(where, "expected " + std::to_string(dim + 1) + " fields, got " + std::to_string(cells.size()));
        w.push_back(parse_double(cells[0], where));
        Vec c(dim);
        for (int d = 0; d < dim; ++d) c(d) = parse_double(cells[d + 1], where);
        try {
            pts.push_back(make_point(space, c));
        } catch (const UsageError &e) {
            throw ConfigError(where, e.what());
        }
    }
    try {
        return DiscreteMeasure(space, std::move(pts), std::move(w));
    } catch (const UsageError &e) {
        throw ConfigError(path, e.what());
    }
}

void write_measure_csv(const std::string &path, const DiscreteMeasure &rho) {
    std::ofstream out(path);
    if (!out) throw ConfigError(path, "cannot write measure file");
    out << "weight";
    for (int d = 0; d < rho.space().ambient_dim(); ++d) out << ",c" << d;
    out << "\n";
    for (std::size_t i = 0; i < rho.size(); ++i) {
        out << format_double(rho.weight(i));
        for (Eigen::Index d = 0; d < rho.point(i).coords.size(); ++d) out << "," << format_double(rho.point(i).coords(d));
        out << "\n";
    }
}

void write_plan_csv(const std::string &path, const TransportPlan &plan) {
    std::ofstream out(path);
    if (!out) throw ConfigError(path, "cannot write plan file");
    out << "source,target,mass\n";
    for (const auto &e : plan.pairs) out << e.source << "," << e.target << "," << format_double(e.mass) << "\n";
}

} // namespace geoflock
