#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "emlab/cli.hpp"
#include "oracles.hpp"

using namespace emlab;
namespace fs = std::filesystem;

namespace {
fs::path fresh_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("emlab_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Data rows of a CSV, provenance comments and header dropped.
std::vector<std::vector<std::string>> rows(const fs::path& p) {
    std::ifstream f(p);
    std::vector<std::vector<std::string>> out;
    std::string line;
    bool header = true;
    while (std::getline(f, line)) {
        if (line.rfind("#", 0) == 0) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        out.push_back(cells);
    }
    return out;
}

int run_cfg(const std::string& doc, const fs::path& dir) {
    auto j = json::parse(doc);
    j["output"]["dir"] = dir.string();
    std::ostringstream log;
    return execute(parse_config(j), log);
}
}  // namespace

TEST(Cli, FixedPointRunHasOneRow) {
    const auto dir = fresh_dir("fixed");
    ASSERT_EQ(run_cfg(R"({"command":"run-population","model":{"theta_star":[0.6,0.8]},"init":{"b":[0.6,0.8]}})", dir), 0);
    EXPECT_EQ(rows(dir / "trajectory.csv").size(), 1u);
    const auto summary = json::parse(slurp(dir / "summary.json"));
    EXPECT_TRUE(summary.contains("provenance"));
}

TEST(Cli, KernelTableMatchesOracle) {
    const auto dir = fresh_dir("kernels");
    ASSERT_EQ(run_cfg(R"({"command":"kernels"})", dir), 0);
    const auto r = rows(dir / "kernels.csv");
    ASSERT_EQ(r.size(), 8000u);
    std::mt19937_64 rng(11);
    for (int k = 0; k < 10; ++k) {
        const auto& row = r[rng() % r.size()];
        ASSERT_EQ(row.size(), 8u);
        const double xa = std::stod(row[0]), xb = std::stod(row[1]), xt = std::stod(row[2]);
        EXPECT_NEAR(std::stod(row[3]), oracle::P(xa, xb, xt), 1e-9);
        EXPECT_NEAR(std::stod(row[4]), oracle::Gamma(xa, xb, xt), 1e-9);
        EXPECT_NEAR(std::stod(row[5]), oracle::S(xa, xb, xt), 1e-9);
        EXPECT_NEAR(std::stod(row[6]), oracle::F(xb, xt), 1e-9);
        EXPECT_NEAR(std::stod(row[7]), oracle::K(xt, xb), 1e-9);
    }
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
    const std::string doc =
        R"({"command":"run-sample","model":{"theta_star":[0.6,0.8]},"init":{"a":[0.1,0],"b":[1,0.2]},"n":3000,"seed":4,"export_dataset":true})";
    const auto d1 = fresh_dir("rep");
    const std::vector<std::string> files{"trajectory.csv", "summary.json", "dataset.csv"};
    ASSERT_EQ(run_cfg(doc, d1), 0);
    std::vector<std::string> first;
    for (const auto& f : files) first.push_back(slurp(d1 / f));
    ASSERT_EQ(run_cfg(doc, d1), 0);
    for (std::size_t i = 0; i < files.size(); ++i) EXPECT_EQ(slurp(d1 / files[i]), first[i]) << files[i];
    const auto text = slurp(d1 / "trajectory.csv");
    for (const char* key : {"# emlab_version:", "# config_hash:", "# quadrature:", "# generator:", "# config:"})
        EXPECT_NE(text.find(key), std::string::npos) << key;
}

TEST(Cli, OtherCommandsWriteArtifacts) {
    const auto d = fresh_dir("others");
    ASSERT_EQ(run_cfg(R"({"command":"coupled","model":{"theta_star":[1,0]},"init":{"b":[0.5,0.5]},"n":2000,"T":5})", d), 0);
    EXPECT_EQ(rows(d / "coupled.csv").size(), 6u);
    ASSERT_EQ(run_cfg(R"({"command":"landscape","model":{"theta_star":[1]},"landscape":{"points":5}})", d), 0);
    EXPECT_EQ(rows(d / "landscape.csv").size(), 25u);
    const auto st = json::parse(slurp(d / "stationary.json"));
    EXPECT_FALSE(st["points"].empty());
    ASSERT_EQ(run_cfg(R"({"command":"consistency","model":{"theta_star":[1]},"init":{"b":[0.5]},
                          "n_ladder":[100,200,400,800],"trials":3,"T":5})",
                      d),
              0);
    EXPECT_EQ(rows(d / "trials.csv").size(), 12u);
    EXPECT_TRUE(fs::exists(d / "consistency.json"));
}

#ifdef EMLAB_CLI_PATH
TEST(Cli, BinaryReportsConfigErrors) {
    const auto dir = fresh_dir("binary");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "bad.json");
        f << R"({"command":"run-population","model":{"theta_star":[1,0]},"init":{"b":[1,0,0]}})";
    }
    const std::string cmd = std::string(EMLAB_CLI_PATH) + " --config " + (dir / "bad.json").string() +
                            " run-population 2> " + (dir / "err.txt").string();
    const int status = std::system(cmd.c_str());
    ASSERT_NE(status, -1);
    EXPECT_EQ(WEXITSTATUS(status), 2);
    const auto err = json::parse(slurp(dir / "err.txt"));
    EXPECT_EQ(err["error"]["kind"], "ConfigError");
    EXPECT_EQ(err["error"]["field"], "init.b");

    const std::string ok = std::string(EMLAB_CLI_PATH) + " --out " + (dir / "k").string() + " kernels tabulate > /dev/null";
    EXPECT_EQ(std::system(ok.c_str()), 0);
    EXPECT_TRUE(fs::exists(dir / "k" / "kernels.csv"));
}
#endif
