#include "geoflock/report.hpp"

#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "geoflock/errors.hpp"
#include "geoflock/measure_io.hpp"

namespace geoflock {

json check_line(const std::string &check, json params, double statistic, double bound, bool pass) {
    return json{{"check", check}, {"params", std::move(params)}, {"statistic", statistic}, {"bound", bound}, {"pass", pass}};
}

void append_ndjson(std::ostream &os, const json &line) { os << line.dump() << "\n"; }

void write_trajectory_csv(const std::string &path, const TrajectoryRecord &rec) {
    std::ofstream out(path);
    if (!out) throw ConfigError(path, "cannot write trajectory file");
    const std::size_t nc = rec.centers.empty() ? 0 : static_cast<std::size_t>(rec.centers.front().coords.size());
    const std::size_t nm = rec.moments.empty() ? 0 : static_cast<std::size_t>(rec.moments.front().size());
    out << "t,energy,w2_best_dirac";
    for (std::size_t d = 0; d < nc; ++d) out << ",center_" << d;
    for (std::size_t d = 0; d < nm; ++d) out << ",moment_" << d;
    out << "\n";
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
        out << format_double(rec.times[k]);
        out << "," << (k < rec.energy.size() ? format_double(rec.energy[k]) : "nan");
        out << "," << (k < rec.w2_best.size() ? format_double(rec.w2_best[k]) : "nan");
        for (std::size_t d = 0; d < nc; ++d) out << "," << format_double(rec.centers[k].coords(static_cast<Eigen::Index>(d)));
        for (std::size_t d = 0; d < nm; ++d) out << "," << format_double(rec.moments[k](static_cast<Eigen::Index>(d)));
        out << "\n";
    }
}

TrajectoryRecord read_trajectory_csv(const std::string &path, const ManifoldSpace &space) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open trajectory file");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ":1", "missing header");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) header.push_back(c);
    }
    if (header.size() < 3 || header[0] != "t" || header[1] != "energy" || header[2] != "w2_best_dirac")
        throw ConfigError(path + ":1", "header must start with t,energy,w2_best_dirac");
    std::size_t nc = 0, nm = 0;
    for (std::size_t k = 3; k < header.size(); ++k) {
        if (header[k].rfind("center_", 0) == 0) ++nc;
        else if (header[k].rfind("moment_", 0) == 0) ++nm;
        else throw ConfigError(path + ":1", "unexpected column '" + header[k] + "'");
    }
    TrajectoryRecord rec;
    rec.space_spec = space.spec();
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (cells.size() != header.size()) throw ConfigError(where, "wrong field count");
        rec.times.push_back(parse_double(cells[0], where));
        rec.energy.push_back(parse_double(cells[1], where));
        rec.w2_best.push_back(parse_double(cells[2], where));
        if (nc > 0) {
            Vec c(static_cast<Eigen::Index>(nc));
            for (std::size_t d = 0; d < nc; ++d) c(static_cast<Eigen::Index>(d)) = parse_double(cells[3 + d], where);
            rec.centers.emplace_back(space.family(), c);
        }
        if (nm > 0) {
            Vec m(static_cast<Eigen::Index>(nm));
            for (std::size_t d = 0; d < nm; ++d) m(static_cast<Eigen::Index>(d)) = parse_double(cells[3 + nc + d], where);
            rec.moments.push_back(m);
        }
    }
    return rec;
}

void write_snapshot_csv(const std::string &path, const std::vector<double> &values) {
    std::ofstream out(path);
    if (!out) throw ConfigError(path, "cannot write snapshot file");
    const double dt = 2.0 * std::numbers::pi / static_cast<double>(values.size());
    out << "theta,rho\n";
    for (std::size_t k = 0; k < values.size(); ++k)
        out << format_double(static_cast<double>(k) * dt) << "," << format_double(values[k]) << "\n";
}

std::string snapshot_name(double t) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "snapshot_%g.csv", t);
    return buf;
}

void write_table_csv(const std::string &path, const std::vector<std::string> &header,
                     const std::vector<std::vector<double>> &columns) {
    if (header.size() != columns.size()) throw UsageError("header and column counts differ");
    std::ofstream out(path);
    if (!out) throw ConfigError(path, "cannot write table");
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << "\n";
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_double(columns[c][r]);
        out << "\n";
    }
}

} // namespace geoflock
