#include "qfpc/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace qfpc {

namespace {

using json = nlohmann::json;

// Library-wide default for the multiplicative-noise variance.  The value is
// small because zeta multiplies the whole state every step: over the ~1e5
// step horizons of the shipped configs it compounds into percent-level
// fidelity spread.  See README for the calibration.
constexpr double kDefaultSigma = 1e-10;
constexpr double kDefaultG = 1e-6;

struct RawConfig {
    std::map<std::string, json> values;
    std::set<std::string> consumed;

    bool has(const std::string& key) const { return values.count(key) != 0; }

    const json& require(const std::string& key) {
        auto it = values.find(key);
        if (it == values.end()) throw ConfigError("missing required config key '" + key + "'");
        consumed.insert(key);
        return it->second;
    }

    template <typename T>
    T get_or(const std::string& key, const T& fallback, std::vector<std::string>& defaulted) {
        auto it = values.find(key);
        if (it == values.end()) {
            defaulted.push_back(key);
            return fallback;
        }
        consumed.insert(key);
        try {
            return it->second.get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config key '" + key + "' has the wrong type");
        }
    }
};

std::string strip_comment(const std::string& line) {
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_quotes = !in_quotes;
        if (line[i] == '#' && !in_quotes) return line.substr(0, i);
    }
    return line;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

RawConfig tokenize(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + " is not 'key = value'");
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + " is not 'key = value'");
        }
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::exception&) {
            parsed = value;  // bare string
        }
        if (raw.values.count(key)) {
            throw ConfigError("duplicate config key '" + key + "'");
        }
        raw.values[key] = parsed;
    }
    return raw;
}

cx to_complex(const json& j, const std::string& key) {
    if (j.is_number()) return cx(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return cx(j[0].get<double>(), j[1].get<double>());
    }
    throw ConfigError("config key '" + key + "' expects complex entries as numbers or [re, im] pairs");
}

VecXc complex_vector(const json& j, const std::string& key) {
    if (!j.is_array()) throw ConfigError("config key '" + key + "' must be a list");
    VecXc v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = to_complex(j[i], key);
    return v;
}

VecX real_vector(const json& j, const std::string& key) {
    if (j.is_number()) return VecX::Constant(1, j.get<double>());
    if (!j.is_array()) throw ConfigError("config key '" + key + "' must be a number or list");
    VecX v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError("config key '" + key + "' must hold numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

MatX real_square_matrix(const json& j, const std::string& key) {
    const VecX flat = real_vector(j, key);
    if (flat.size() == 1) return MatX::Constant(1, 1, flat(0));
    const int n = dim_from_vec_size(flat.size());
    MatX m(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) m(r, c) = flat(r * n + c);
    }
    return m;
}

json complex_vector_json(const VecXc& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
    return out;
}

SystemSpec load_system(RawConfig& raw, RunConfig& cfg) {
    if (raw.has("preset")) {
        std::string name;
        const json& j = raw.require("preset");
        if (j.is_string()) name = j.get<std::string>();
        else throw ConfigError("config key 'preset' must be a string");
        const Preset which = preset_from_name(name);
        cfg.preset_used = which;
        const json& th = raw.require("theta");
        if (!th.is_number()) throw ConfigError("config key 'theta' must be a number");
        return preset(which, th.get<double>());
    }

    SystemSpec spec;
    const json& jdim = raw.require("dim");
    if (!jdim.is_number_integer()) throw ConfigError("config key 'dim' must be an integer");
    spec.dim = jdim.get<int>();
    spec.h0_eigenvalues = real_vector(raw.require("h0_eigenvalues"), "h0_eigenvalues");
    if (spec.h0_eigenvalues.size() != spec.dim) {
        throw ConfigError("config key 'h0_eigenvalues' must have length dim");
    }
    const VecXc h1_flat = complex_vector(raw.require("h1"), "h1");
    if (h1_flat.size() != static_cast<Eigen::Index>(spec.dim) * spec.dim) {
        throw ConfigError("config key 'h1' must have dim*dim row-major entries");
    }
    spec.h1 = MatXc(spec.dim, spec.dim);
    for (int r = 0; r < spec.dim; ++r) {
        for (int c = 0; c < spec.dim; ++c) spec.h1(r, c) = h1_flat(r * spec.dim + c);
    }
    const VecX rates_flat = real_vector(raw.require("rates"), "rates");
    if (rates_flat.size() != static_cast<Eigen::Index>(spec.dim) * spec.dim) {
        throw ConfigError("config key 'rates' must have dim*dim row-major entries");
    }
    spec.rates = MatX(spec.dim, spec.dim);
    for (int r = 0; r < spec.dim; ++r) {
        for (int c = 0; c < spec.dim; ++c) spec.rates(r, c) = rates_flat(r * spec.dim + c);
    }
    spec.validate();
    return spec;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RawConfig raw = tokenize(text);
    RunConfig cfg;
    std::vector<std::string>& defaulted = cfg.defaulted_keys;

    cfg.system = load_system(raw, cfg);
    const int l = cfg.system.dim;
    const Eigen::Index n2 = static_cast<Eigen::Index>(l) * l;

    const json& jdt = raw.require("dt");
    if (!jdt.is_number() || jdt.get<double>() <= 0.0) throw ConfigError("config key 'dt' must be > 0");
    cfg.dt = jdt.get<double>();

    const json& jh = raw.require("horizon");
    if (!jh.is_number_integer() || jh.get<int>() < 1) throw ConfigError("config key 'horizon' must be >= 1");
    cfg.horizon = jh.get<int>();

    cfg.x0 = complex_vector(raw.require("x0"), "x0");
    if (cfg.x0.size() != n2) {
        throw ConfigError("config key 'x0' has length " + std::to_string(cfg.x0.size()) +
                          ", expected l^2 = " + std::to_string(n2));
    }
    if (raw.has("x_e")) {
        cfg.x_e = complex_vector(raw.require("x_e"), "x_e");
        if (cfg.x_e.size() != n2) {
            throw ConfigError("config key 'x_e' has length " + std::to_string(cfg.x_e.size()) +
                              ", expected l^2 = " + std::to_string(n2));
        }
    } else {
        cfg.x_e = VecXc::Zero(n2);
        defaulted.push_back("x_e");
    }

    // target projector and/or explicit output row
    const bool has_target = raw.has("target");
    const bool has_d = raw.has("d");
    if (!has_target && !has_d) {
        throw ConfigError("config key 'target' (pure-state amplitudes) or 'd' (output row) is required");
    }
    if (has_target) {
        const VecXc amplitudes = complex_vector(raw.require("target"), "target");
        if (amplitudes.size() != l) {
            throw ConfigError("config key 'target' has length " + std::to_string(amplitudes.size()) +
                              ", expected l = " + std::to_string(l));
        }
        cfg.d_target = projector_row(amplitudes);
    }
    if (has_d) {
        const VecXc drow = complex_vector(raw.require("d"), "d");
        if (drow.size() != n2) {
            throw ConfigError("config key 'd' has length " + std::to_string(drow.size()) +
                              ", expected l^2 = " + std::to_string(n2));
        }
        cfg.noise.d = drow.transpose();
        if (!has_target) cfg.d_target = drow.transpose();
    } else {
        cfg.noise.d = cfg.d_target;
    }

    cfg.noise.sigma = raw.get_or<double>("sigma", kDefaultSigma, defaulted);
    if (raw.has("g")) cfg.noise.g = real_square_matrix(raw.require("g"), "g");
    else { cfg.noise.g = MatX::Constant(1, 1, kDefaultG); defaulted.push_back("g"); }
    cfg.noise.g_r = real_square_matrix(raw.require("g_r"), "g_r");
    cfg.noise.omega = real_square_matrix(raw.require("omega"), "omega");
    if (raw.has("u_r")) cfg.noise.u_r = real_vector(raw.require("u_r"), "u_r");
    else { cfg.noise.u_r = VecX::Zero(1); defaulted.push_back("u_r"); }
    if (raw.has("o_d")) cfg.noise.o_d = real_vector(raw.require("o_d"), "o_d");
    else { cfg.noise.o_d = VecX::Constant(1, 1.0); defaulted.push_back("o_d"); }

    cfg.ensemble_size = raw.get_or<int>("ensemble_size", 1000, defaulted);
    cfg.seed = raw.get_or<std::uint64_t>("seed", 0, defaulted);
    cfg.stop_fidelity = raw.get_or<double>("stop_fidelity", 0.999, defaulted);
    cfg.dwell = raw.get_or<int>("dwell", 100, defaulted);
    cfg.riccati_tol = raw.get_or<double>("riccati_tol", 1e-10, defaulted);
    cfg.riccati_max_iter = raw.get_or<int>("riccati_max_iter", 100000, defaulted);
    cfg.sample_control = raw.get_or<bool>("sample_control", false, defaulted);
    cfg.output_dir = raw.get_or<std::string>("output_dir", "runs", defaulted);

    for (const auto& entry : raw.values) {
        if (!raw.consumed.count(entry.first)) throw ConfigError("unknown config key '" + entry.first + "'");
    }

    // cross validation
    cfg.noise.validate();
    if (cfg.noise.d.cols() != n2) {
        throw ConfigError("output map 'd' width does not match the system dimension");
    }
    if (cfg.noise.control_dim() != 1) {
        throw ConfigError("config keys 'omega'/'u_r' describe a single control field");
    }
    if (cfg.ensemble_size < 1) throw ConfigError("config key 'ensemble_size' must be >= 1");
    if (cfg.dwell < 1) throw ConfigError("config key 'dwell' must be >= 1");
    DensityState::from_vector(cfg.x0 + cfg.x_e);  // throws when not a density operator
    const GeneratorPair gen = build_generators(cfg.system);
    const double xe_residual = (gen.a_tilde * cfg.x_e).cwiseAbs().maxCoeff();
    if (xe_residual > 1e-8 * (1.0 + cfg.x_e.cwiseAbs().maxCoeff())) {
        throw ConfigError("config key 'x_e' must satisfy a_tilde * x_e = 0 (residual " +
                          std::to_string(xe_residual) + ")");
    }

    // echo the fully resolved configuration
    nlohmann::ordered_json& out = cfg.resolved;
    if (cfg.preset_used) {
        out["preset"] = preset_name(*cfg.preset_used);
        out["theta"] = cfg.system.rates.maxCoeff();
    } else {
        out["dim"] = cfg.system.dim;
        json h0 = json::array();
        for (Eigen::Index i = 0; i < cfg.system.h0_eigenvalues.size(); ++i) h0.push_back(cfg.system.h0_eigenvalues(i));
        out["h0_eigenvalues"] = h0;
        json h1 = json::array();
        for (int r = 0; r < l; ++r) {
            for (int c = 0; c < l; ++c) h1.push_back({cfg.system.h1(r, c).real(), cfg.system.h1(r, c).imag()});
        }
        out["h1"] = h1;
        json rates = json::array();
        for (int r = 0; r < l; ++r) for (int c = 0; c < l; ++c) rates.push_back(cfg.system.rates(r, c));
        out["rates"] = rates;
    }
    out["dt"] = cfg.dt;
    out["horizon"] = cfg.horizon;
    out["x0"] = complex_vector_json(cfg.x0);
    out["x_e"] = complex_vector_json(cfg.x_e);
    out["d"] = complex_vector_json(cfg.noise.d.row(0).transpose());
    out["d_target"] = complex_vector_json(cfg.d_target.transpose());
    out["sigma"] = cfg.noise.sigma;
    out["g"] = cfg.noise.g(0, 0);
    out["g_r"] = cfg.noise.g_r(0, 0);
    out["omega"] = cfg.noise.omega(0, 0);
    out["u_r"] = cfg.noise.u_r(0);
    out["o_d"] = cfg.noise.o_d(0);
    out["ensemble_size"] = cfg.ensemble_size;
    out["seed"] = cfg.seed;
    out["stop_fidelity"] = cfg.stop_fidelity;
    out["dwell"] = cfg.dwell;
    out["riccati_tol"] = cfg.riccati_tol;
    out["riccati_max_iter"] = cfg.riccati_max_iter;
    out["sample_control"] = cfg.sample_control;
    out["output_dir"] = cfg.output_dir;
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace qfpc
