#pragma once

#include "dat/analysis.hpp"
#include "dat/sim.hpp"

#include <json.hpp>

#include <ostream>
#include <string>

namespace dat::cli {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// One row per (sample, node):
//   t,node,x_0..,s_0..,p_0..,r_0..,u_0..,mu,alpha,V1,V2,consensus_err,avg_track_err
// An aborted run ends with a "# aborted ..." line.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

nlohmann::json trajectory_json(const Trajectory& traj);

// status is "ok", "aborted" or "assumption-violated".
nlohmann::json report_json(const RunReport& rep, const std::string& status);

}  // namespace dat::cli
