#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoflock/report.hpp"

namespace geoflock {

/// Suite names accepted by run_suite.
const std::vector<std::string> &suite_names();

/// Runs the invariant checks of one suite ("geometry", "measures", "kernels",
/// "dynamics", "analysis" or "all"); one NDJSON object per check.
std::vector<json> run_suite(const std::string &name, std::uint64_t seed);

} // namespace geoflock
