#ifndef QFPC_IO_HPP
#define QFPC_IO_HPP

#include <string>

#include <json.hpp>

#include "qfpc/config.hpp"
#include "qfpc/ensemble.hpp"

namespace qfpc {

/// Shortest-exact decimal rendering of a double (17 significant digits).
std::string format_double(double v);

/// Columns: t, u, fidelity, pop_0..pop_{l-1}, trace_drift.  Row k holds the
/// state after k steps; the u column carries the control that produced that
/// state (0 for the initial row).
void write_trajectory_csv(const std::string& path, const Trajectory& traj, const VecXc& x_e);

/// Columns: step, u.  Row k is the control applied on the transition k -> k+1.
void write_control_csv(const std::string& path, const MatX& control_signal);
MatX read_control_csv(const std::string& path);

void write_ensemble_json(const std::string& path, const EnsembleReport& report);

/// Resolved config, seed, code version and timestamp; everything needed to
/// reproduce the run.
void write_manifest(const std::string& path, const RunConfig& cfg, const std::string& command,
                    const nlohmann::ordered_json& outputs);

}  // namespace qfpc

#endif  // QFPC_IO_HPP
