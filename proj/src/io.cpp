#include "qfpc/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "qfpc/vectorization.hpp"

namespace qfpc {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file '" + path + "'");
    return out;
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, const VecXc& x_e) {
    const int l = dim_from_vec_size(x_e.size());
    std::ofstream out = open_out(path);
    out << "t,u,fidelity";
    for (int k = 0; k < l; ++k) out << ",pop_" << k;
    out << ",trace_drift\n";
    for (std::size_t row = 0; row < traj.states.size(); ++row) {
        const double u = row == 0 ? 0.0 : traj.controls[row - 1](0);
        out << format_double(traj.times[row]) << ',' << format_double(u) << ','
            << format_double(traj.fidelities[row]);
        const VecXc total = traj.states[row] + x_e;
        for (int k = 0; k < l; ++k) out << ',' << format_double(std::real(total(k)));
        out << ',' << format_double(traj.trace_drift[row]) << '\n';
    }
}

void write_control_csv(const std::string& path, const MatX& control_signal) {
    std::ofstream out = open_out(path);
    out << "step,u\n";
    for (Eigen::Index k = 0; k < control_signal.rows(); ++k) {
        out << k << ',' << format_double(control_signal(k, 0)) << '\n';
    }
}

MatX read_control_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open control file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("step,", 0) != 0) {
        throw Error("control file '" + path + "' is missing its 'step,u' header");
    }
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error("malformed control row: " + line);
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    MatX control(values.size(), 1);
    for (std::size_t k = 0; k < values.size(); ++k) control(static_cast<Eigen::Index>(k), 0) = values[k];
    return control;
}

void write_ensemble_json(const std::string& path, const EnsembleReport& report) {
    nlohmann::ordered_json j;
    j["n_members"] = report.n_members;
    j["seed"] = report.seed;
    j["mean"] = report.mean;
    j["min"] = report.min;
    j["max"] = report.max;
    j["fidelities"] = report.final_fidelities;
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_manifest(const std::string& path, const RunConfig& cfg, const std::string& command,
                    const nlohmann::ordered_json& outputs) {
    nlohmann::ordered_json j;
    j["version"] = QFPC_VERSION;
    j["command"] = command;
    j["timestamp"] = timestamp_utc();
    j["seed"] = cfg.seed;
    j["defaults_used"] = cfg.defaulted_keys;
    j["config"] = cfg.resolved;
    j["outputs"] = outputs;
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace qfpc
