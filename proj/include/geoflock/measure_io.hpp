#pragma once

#include <string>

#include "geoflock/measures.hpp"

namespace geoflock {

/// "%.17g": enough digits for an exact round trip.
std::string format_double(double x);
/// Whole-string strtod; throws ConfigError(where, ...) on trailing junk.
double parse_double(const std::string &s, const std::string &where);

/// CSV with header `weight,c0,c1,...`, one atom per line.
DiscreteMeasure read_measure_csv(const std::string &path, const ManifoldSpace &space);
void write_measure_csv(const std::string &path, const DiscreteMeasure &rho);
/// CSV `source,target,mass`.
void write_plan_csv(const std::string &path, const TransportPlan &plan);

} // namespace geoflock
