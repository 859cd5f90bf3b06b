#ifndef QFPC_CONFIG_HPP
#define QFPC_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qfpc/ensemble.hpp"
#include "qfpc/fpd.hpp"
#include "qfpc/lindblad.hpp"

namespace qfpc {

/// Fully resolved run description.  Built from a flat key = value config
/// file; every default that was filled in is listed in defaulted_keys and
/// echoed into the run manifest.
struct RunConfig {
    SystemSpec system;
    std::optional<Preset> preset_used;
    NoiseIdealSpec noise;
    RowVecXc d_target;  // projector row used for fidelity
    VecXc x0;
    VecXc x_e;
    double dt = 0.0;
    int horizon = 0;
    int ensemble_size = 1000;
    std::uint64_t seed = 0;
    double stop_fidelity = 0.999;
    int dwell = 100;
    double riccati_tol = 1e-10;
    int riccati_max_iter = 100000;
    bool sample_control = false;
    std::string output_dir = "runs";

    nlohmann::ordered_json resolved;          // every key with its final value
    std::vector<std::string> defaulted_keys;  // keys that fell back to defaults

    RunOptions run_options() const {
        RunOptions opt;
        opt.dt = dt;
        opt.horizon = horizon;
        opt.seed = seed;
        opt.stop_fidelity = stop_fidelity;
        opt.dwell = dwell;
        opt.riccati_tol = riccati_tol;
        opt.riccati_max_iter = riccati_max_iter;
        opt.sample_control = sample_control;
        return opt;
    }
};

/// Parse and validate a config file.  Throws ConfigError with the offending
/// key name on missing or inconsistent fields.
RunConfig load_config(const std::string& path);

/// Same, from an in-memory string (used by tests).
RunConfig parse_config(const std::string& text);

}  // namespace qfpc

#endif  // QFPC_CONFIG_HPP
