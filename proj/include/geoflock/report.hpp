#pragma once

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "geoflock/trajectory.hpp"

namespace geoflock {

using json = nlohmann::json;

/// One NDJSON report object.
json check_line(const std::string &check, json params, double statistic, double bound, bool pass);
void append_ndjson(std::ostream &os, const json &line);

/// `t,energy,w2_best_dirac,center_0..,moment_0..`
void write_trajectory_csv(const std::string &path, const TrajectoryRecord &rec);
TrajectoryRecord read_trajectory_csv(const std::string &path, const ManifoldSpace &space);

/// `theta,rho`
void write_snapshot_csv(const std::string &path, const std::vector<double> &values);
std::string snapshot_name(double t);

/// Plain numeric table with the given header.
void write_table_csv(const std::string &path, const std::vector<std::string> &header,
                     const std::vector<std::vector<double>> &columns);

} // namespace geoflock
