#include "qfpc/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "qfpc/config.hpp"
#include "qfpc/ensemble.hpp"
#include "qfpc/io.hpp"
#include "qfpc/oracles.hpp"

namespace qfpc {

namespace {

namespace fs = std::filesystem;

struct CommonOverrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> sigma;
    std::optional<double> g;

    RunConfig load() const {
        RunConfig cfg = load_config(config_path);
        if (seed) {
            cfg.seed = *seed;
            cfg.resolved["seed"] = *seed;
        }
        if (out_dir) {
            cfg.output_dir = *out_dir;
            cfg.resolved["output_dir"] = *out_dir;
        }
        if (sigma) {
            cfg.noise.sigma = *sigma;
            cfg.resolved["sigma"] = *sigma;
        }
        if (g) {
            cfg.noise.g = MatX::Constant(1, 1, *g);
            cfg.resolved["g"] = *g;
        }
        cfg.noise.validate();
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonOverrides& common) {
    cmd->add_option("--config", common.config_path, "run configuration file")->required();
    cmd->add_option_function<std::uint64_t>("--seed", [&common](std::uint64_t v) { common.seed = v; },
                                            "override the config seed");
    cmd->add_option_function<std::string>("--out-dir", [&common](const std::string& v) { common.out_dir = v; },
                                          "override the output directory");
    cmd->add_option_function<double>("--sigma", [&common](double v) { common.sigma = v; },
                                     "override the multiplicative-noise variance");
    cmd->add_option_function<double>("--g", [&common](double v) { common.g = v; },
                                     "override the measurement-noise variance");
}

int run_optimize(const CommonOverrides& common, bool sample_control_flag) {
    RunConfig cfg = common.load();
    if (sample_control_flag) {
        cfg.sample_control = true;
        cfg.resolved["sample_control"] = true;
    }
    const GeneratorPair gen = build_generators(cfg.system);
    const OptimizationResult result =
        run_optimization(gen, cfg.noise, cfg.d_target, cfg.x0, cfg.x_e, cfg.run_options());

    fs::create_directories(cfg.output_dir);
    const std::string traj_path = (fs::path(cfg.output_dir) / "trajectory.csv").string();
    const std::string control_path = (fs::path(cfg.output_dir) / "control.csv").string();
    const std::string manifest_path = (fs::path(cfg.output_dir) / "manifest.json").string();
    write_trajectory_csv(traj_path, result.trajectory, cfg.x_e);
    write_control_csv(control_path, result.control_signal);

    nlohmann::ordered_json outputs;
    outputs["trajectory"] = traj_path;
    outputs["control"] = control_path;
    outputs["steps"] = result.trajectory.steps();
    outputs["stop_step"] = result.stop_step;
    outputs["final_fidelity"] = result.trajectory.fidelities.back();
    write_manifest(manifest_path, cfg, "optimize", outputs);

    std::cout << "optimize: " << result.trajectory.steps() << " steps, final fidelity "
              << format_double(result.trajectory.fidelities.back()) << "\n"
              << "wrote " << traj_path << ", " << control_path << ", " << manifest_path << "\n";
    return 0;
}

int run_test(const CommonOverrides& common, const std::string& control_path,
             std::optional<int> members) {
    RunConfig cfg = common.load();
    if (members) {
        cfg.ensemble_size = *members;
        cfg.resolved["ensemble_size"] = *members;
    }
    const GeneratorPair gen = build_generators(cfg.system);
    const MatX control = read_control_csv(control_path);
    const EnsembleReport report = run_testing(gen, cfg.noise, cfg.d_target, control, cfg.x0, cfg.x_e,
                                              cfg.dt, cfg.ensemble_size, cfg.seed);

    fs::create_directories(cfg.output_dir);
    const std::string ensemble_path = (fs::path(cfg.output_dir) / "ensemble.json").string();
    const std::string fid_path = (fs::path(cfg.output_dir) / "member_fidelities.csv").string();
    const std::string manifest_path = (fs::path(cfg.output_dir) / "manifest.json").string();
    write_ensemble_json(ensemble_path, report);
    {
        std::ofstream out(fid_path);
        if (!out) throw Error("cannot open output file '" + fid_path + "'");
        out << "member,fidelity\n";
        for (int k = 0; k < report.n_members; ++k) {
            out << k << ',' << format_double(report.final_fidelities[k]) << '\n';
        }
    }

    nlohmann::ordered_json outputs;
    outputs["ensemble"] = ensemble_path;
    outputs["member_fidelities"] = fid_path;
    outputs["control"] = control_path;
    write_manifest(manifest_path, cfg, "test", outputs);

    std::cout << "test: " << report.n_members << " members, fidelity mean "
              << format_double(report.mean) << " min " << format_double(report.min) << " max "
              << format_double(report.max) << "\n"
              << "wrote " << ensemble_path << ", " << fid_path << ", " << manifest_path << "\n";
    return 0;
}

int run_presets() {
    std::cout << "spin_half    two-level system, basis {|1>,|0>}, H0 = sigma3/2, "
                 "H1 = (sigma1+sigma2)/2, decay |1> -> |0> at rate theta\n"
              << "lambda_type  three-level system, basis {|2>,|1>,|0>}, H0 = diag(3/2, 1, 0), "
                 "0/1 coupling H1, decay |2> -> |0> at rate theta\n";
    return 0;
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
    CLI::App app{"Simulation and controller synthesis for dissipative quantum ensembles"};
    app.require_subcommand(1);

    CommonOverrides opt_common;
    bool sample_flag = false;
    CLI::App* optimize = app.add_subcommand("optimize", "synthesize a control signal on the nominal member");
    add_common(optimize, opt_common);
    optimize->add_flag("--sample-control", sample_flag, "apply sampled controls u ~ N(v, R) instead of the mean");

    CommonOverrides test_common;
    std::string control_path;
    std::optional<int> members;
    CLI::App* test = app.add_subcommand("test", "replay a stored control signal on an ensemble");
    add_common(test, test_common);
    test->add_option("--control", control_path, "stored control signal (control.csv)")->required();
    test->add_option_function<int>("--members", [&members](int v) { members = v; },
                                   "override ensemble size");

    CLI::App* presets = app.add_subcommand("presets", "list built-in systems");

    std::int64_t mc_samples = 1000000;
    CLI::App* oracle = app.add_subcommand("oracle", "run the independent numerical cross-checks");
    oracle->add_option("--mc-samples", mc_samples, "Monte Carlo sample count");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (app.got_subcommand(optimize)) return run_optimize(opt_common, sample_flag);
        if (app.got_subcommand(test)) return run_test(test_common, control_path, members);
        if (app.got_subcommand(presets)) return run_presets();
        if (app.got_subcommand(oracle)) {
            oracles::OracleOptions opts;
            opts.mc_samples = mc_samples;
            return oracles::run_all(std::cout, opts) ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace qfpc
