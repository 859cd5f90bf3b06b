#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "qfpc/cli.hpp"
#include "qfpc/config.hpp"
#include "qfpc/io.hpp"
#include "qfpc/rng.hpp"

using namespace qfpc;
namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"(
# two-level demo, coarse sampling so runs stay short
preset = spin_half
theta = 0.1
dt = 0.001
horizon = 40
x0 = [0, 1, 0, 0]
target = [[1, 0], [0, 0]]
g_r = 1e-5
omega = 10
u_r = 0.5
sigma = 1e-6
seed = 9
ensemble_size = 16
stop_fidelity = 2.0
dwell = 5
riccati_tol = 2.5e5
riccati_max_iter = 200
)";

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string strip_timestamp(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find("\"timestamp\"") != std::string::npos) continue;
        out << line << '\n';
    }
    return out.str();
}

std::string normalize_dir(std::string text, const std::string& dir) {
    std::size_t pos = 0;
    while ((pos = text.find(dir, pos)) != std::string::npos) {
        text.replace(pos, dir.size(), "<out>");
    }
    return text;
}

struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = fs::temp_directory_path() /
               ("qfpc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing resolves values and defaults") {
    const RunConfig cfg = parse_config(kTinyConfig);
    CHECK(cfg.system.dim == 2);
    CHECK(cfg.dt == 0.001);
    CHECK(cfg.horizon == 40);
    CHECK(cfg.noise.g_r(0, 0) == 1e-5);
    CHECK(cfg.noise.omega(0, 0) == 10.0);
    CHECK(cfg.noise.u_r(0) == 0.5);
    CHECK(cfg.noise.sigma == 1e-6);
    CHECK(cfg.seed == 9);
    CHECK(cfg.d_target(0) == cx(1, 0));
    // g and o_d fell back to defaults and are recorded as such
    CHECK(std::find(cfg.defaulted_keys.begin(), cfg.defaulted_keys.end(), "g") != cfg.defaulted_keys.end());
    CHECK(std::find(cfg.defaulted_keys.begin(), cfg.defaulted_keys.end(), "o_d") != cfg.defaulted_keys.end());
    CHECK(cfg.resolved["g"].get<double>() == 1e-6);
    CHECK(cfg.resolved["o_d"].get<double>() == 1.0);
}

TEST_CASE("config errors carry the offending key") {
    SUBCASE("target of the wrong length") {
        std::string text = kTinyConfig;
        const auto pos = text.find("target = [[1, 0], [0, 0]]");
        text.replace(pos, std::string("target = [[1, 0], [0, 0]]").size(),
                     "target = [[1, 0], [0, 0], [0, 0]]");
        try {
            parse_config(text);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("target") != std::string::npos);
        }
    }
    SUBCASE("missing required key") {
        std::string text = kTinyConfig;
        const auto pos = text.find("g_r = 1e-5");
        text.erase(pos, std::string("g_r = 1e-5").size());
        try {
            parse_config(text);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("g_r") != std::string::npos);
        }
    }
    SUBCASE("unknown key") {
        CHECK_THROWS_AS(parse_config(std::string(kTinyConfig) + "\nmystery = 1\n"), ConfigError);
    }
    SUBCASE("x0 must be a density operator") {
        std::string text = kTinyConfig;
        const auto pos = text.find("x0 = [0, 1, 0, 0]");
        text.replace(pos, std::string("x0 = [0, 1, 0, 0]").size(), "x0 = [0, 2, 0, 0]");
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    }
    SUBCASE("x_e must be a null vector of the drift") {
        std::string text = kTinyConfig;
        text += "\nx_e = [[0.1, 0], [0, 0], [0, 0], [0, 0]]\n";
        // x0 + x_e must still be a density; shift x0 down accordingly
        const auto pos = text.find("x0 = [0, 1, 0, 0]");
        text.replace(pos, std::string("x0 = [0, 1, 0, 0]").size(), "x0 = [[-0.1,0], 1, 0, 0]");
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    }
    SUBCASE("duplicate key") {
        CHECK_THROWS_AS(parse_config(std::string(kTinyConfig) + "\ntheta = 0.2\n"), ConfigError);
    }
}

TEST_CASE("explicit system matrices") {
    const char* text = R"(
dim = 2
h0_eigenvalues = [0.5, -0.5]
h1 = [[0,0], [0.5,-0.5], [0.5,0.5], [0,0]]
rates = [0, 0.1, 0, 0]
dt = 0.001
horizon = 10
x0 = [0, 1, 0, 0]
target = [[1, 0], [0, 0]]
g_r = 1e-5
omega = 10
)";
    const RunConfig cfg = parse_config(text);
    const GeneratorPair gen = build_generators(cfg.system);
    const GeneratorPair ref = build_generators(preset(Preset::SpinHalf, 0.1));
    CHECK((gen.a_tilde - ref.a_tilde).cwiseAbs().maxCoeff() == 0.0);
    CHECK((gen.n_tilde - ref.n_tilde).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("seventeen-digit floats round trip") {
    RngStream rng(2718, 7);
    for (int i = 0; i < 200; ++i) {
        const double v = std::pow(10.0, 300.0 * (rng.uniform01() - 0.5)) * rng.normal();
        const double back = std::stod(format_double(v));
        CHECK(back == v);
    }
}

TEST_CASE("control csv round trip") {
    TempDir tmp;
    MatX control(5, 1);
    control << 0.1, -2.5e-7, 3.33333333333333315e2, 0.0, 1e300;
    const std::string path = (tmp.path / "control.csv").string();
    write_control_csv(path, control);
    const MatX back = read_control_csv(path);
    CHECK((back - control).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cli optimize and test produce reproducible files") {
    TempDir tmp;
    const std::string cfg_path = (tmp.path / "tiny.cfg").string();
    {
        std::ofstream out(cfg_path);
        out << kTinyConfig;
    }
    const std::string run1 = (tmp.path / "run1").string();
    const std::string run2 = (tmp.path / "run2").string();

    REQUIRE(cli_run({"optimize", "--config", cfg_path, "--out-dir", run1}) == 0);
    REQUIRE(cli_run({"optimize", "--config", cfg_path, "--out-dir", run2}) == 0);
    CHECK(read_file(fs::path(run1) / "trajectory.csv") == read_file(fs::path(run2) / "trajectory.csv"));
    CHECK(read_file(fs::path(run1) / "control.csv") == read_file(fs::path(run2) / "control.csv"));
    CHECK(normalize_dir(strip_timestamp(read_file(fs::path(run1) / "manifest.json")), run1) ==
          normalize_dir(strip_timestamp(read_file(fs::path(run2) / "manifest.json")), run2));

    const std::string test1 = (tmp.path / "test1").string();
    const std::string test2 = (tmp.path / "test2").string();
    const std::string control = (fs::path(run1) / "control.csv").string();
    REQUIRE(cli_run({"test", "--config", cfg_path, "--control", control, "--out-dir", test1,
                     "--members", "32"}) == 0);
    REQUIRE(cli_run({"test", "--config", cfg_path, "--control", control, "--out-dir", test2,
                     "--members", "32"}) == 0);
    CHECK(read_file(fs::path(test1) / "ensemble.json") == read_file(fs::path(test2) / "ensemble.json"));

    const auto report = nlohmann::json::parse(read_file(fs::path(test1) / "ensemble.json"));
    CHECK(report["n_members"] == 32);
    CHECK(report["fidelities"].size() == 32);
    CHECK(report.contains("mean"));
    CHECK(report.contains("min"));
    CHECK(report.contains("max"));
    CHECK(report.contains("seed"));

    // a different seed changes the trajectory bytes
    const std::string run3 = (tmp.path / "run3").string();
    REQUIRE(cli_run({"optimize", "--config", cfg_path, "--out-dir", run3, "--seed", "77"}) == 0);
    CHECK(read_file(fs::path(run1) / "trajectory.csv") != read_file(fs::path(run3) / "trajectory.csv"));
}

TEST_CASE("cli rejects bad input") {
    CHECK(cli_run({"optimize", "--config", "/nonexistent/qfpc.cfg"}) == 1);
    CHECK(cli_run({"presets"}) == 0);
}

TEST_CASE("trajectory csv layout") {
    TempDir tmp;
    Trajectory traj;
    traj.times = {0.0, 0.5};
    VecXc x0 = VecXc::Zero(4);
    x0(1) = 1.0;
    VecXc x1 = VecXc::Zero(4);
    x1(0) = cx(0.25, 0);
    x1(1) = cx(0.75, 0);
    traj.states = {x0, x1};
    traj.controls = {VecX::Constant(1, 1.5)};
    traj.outputs = {VecX::Zero(1), VecX::Constant(1, 0.25)};
    traj.fidelities = {0.0, 0.25};
    traj.trace_drift = {0.0, 0.0};
    const std::string path = (tmp.path / "traj.csv").string();
    write_trajectory_csv(path, traj, VecXc::Zero(4));
    const std::string text = read_file(path);
    CHECK(text.rfind("t,u,fidelity,pop_0,pop_1,trace_drift\n", 0) == 0);
    CHECK(text.find("\n0.5,1.5,0.25,0.25,0.75,0\n") != std::string::npos);
}
