#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("DTSYNC_CLI");
    REQUIRE(p != nullptr);
    return p;
}

int run_cmd(const std::string& args, const std::string& log) {
    const std::string cmd = "\"" + cli_path() + "\" " + args + " > " + log + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// quick ideal-mode settings so CLI round trips stay fast
const std::string kFast =
    " --override measurement=ideal --override iterations=5 --override trials=2"
    " --override drift_diffusion=0";

}  // namespace

TEST_CASE("list-presets names the documented experiments") {
    REQUIRE(run_cmd("list-presets", "cli_list.log") == 0);
    const auto out = slurp("cli_list.log");
    for (const char* name : {"fig9-cabled", "fig11-wireless", "topo-full", "fig16-bw-sweep"})
        CHECK(out.find(name) != std::string::npos);
    fs::remove("cli_list.log");
}

TEST_CASE("run writes the artifact set and an accurate manifest") {
    const fs::path out = "cli_run_out";
    fs::remove_all(out);
    REQUIRE(run_cmd("run --preset topo-full --out " + out.string() + kFast, "cli_run.log") == 0);
    for (const char* name : {"offsets.csv", "truth.csv", "iterations.csv", "summary.json",
                             "manifest.json"})
        CHECK(fs::exists(out / name));

    const auto manifest = slurp(out / "manifest.json");
    CHECK(manifest.find("\"artifact_version\"") != std::string::npos);
    CHECK(manifest.find("offsets.csv") != std::string::npos);
    const auto offsets = slurp(out / "offsets.csv");
    CHECK(offsets.rfind("trial,iteration,node_i,node_j,measured_offset_s", 0) == 0);
    // topo-full: 6 edges x 5 iterations x 2 trials data rows plus the header
    CHECK(std::count(offsets.begin(), offsets.end(), '\n') == 61);
    fs::remove_all(out);
    fs::remove("cli_run.log");
}

TEST_CASE("config files, seeds and overrides reach the run") {
    const fs::path out = "cli_cfg_out";
    fs::remove_all(out);
    {
        std::ofstream f("cli_test.cfg");
        f << "topology = 3conn\nmeasurement = ideal\niterations = 4\ntrials = 2\n";
    }
    REQUIRE(run_cmd("run --config cli_test.cfg --seed 77 --override iterations=6 --out " +
                        out.string(),
                    "cli_cfg.log") == 0);
    const auto manifest = slurp(out / "manifest.json");
    CHECK(manifest.find("\"seed\": 77") != std::string::npos);
    CHECK(manifest.find("\"iterations\": 6") != std::string::npos);
    CHECK(manifest.find("\"topology\": \"3conn\"") != std::string::npos);
    fs::remove("cli_test.cfg");
    fs::remove_all(out);
    fs::remove("cli_cfg.log");
}

TEST_CASE("configuration mistakes exit with status 1 and an explanation") {
    CHECK(run_cmd("run --preset no-such-preset --out cli_err_out", "cli_err.log") == 1);
    CHECK(slurp("cli_err.log").find("config error") != std::string::npos);
    CHECK(run_cmd("run --override nodes=1 --out cli_err_out" + kFast, "cli_err.log") == 1);
    CHECK(slurp("cli_err.log").find("nodes") != std::string::npos);
    CHECK(run_cmd("run --override snr_db", "cli_err.log") == 1);
    fs::remove_all("cli_err_out");
    fs::remove("cli_err.log");
}

TEST_CASE("a sweep run produces the sweep table instead of iteration files") {
    const fs::path out = "cli_sweep_out";
    fs::remove_all(out);
    REQUIRE(run_cmd("run --preset fig18-snr-sweep --out " + out.string() + kFast +
                        " --override sweep_snr_db=20,30",
                    "cli_sweep.log") == 0);
    CHECK(fs::exists(out / "sweep_snr.csv"));
    CHECK(!fs::exists(out / "offsets.csv"));
    const auto table = slurp(out / "sweep_snr.csv");
    CHECK(table.rfind("average_snr_db,precision_s,bound_std_s", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 3);
    fs::remove_all(out);
    fs::remove("cli_sweep.log");
}
