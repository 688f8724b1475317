// Runs the built command-line tool end to end.

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "aidx_cli_tests";

int run(const std::string& args)
{
    fs::create_directories(kWork);
    const std::string cmd = std::string(AIDX_CLI) + " " + args + " > " + (kWork / "stdout.txt").string() + " 2> " +
                            (kWork / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string workload(const char* name) { return (fs::path(AIDX_WORKLOADS) / name).string(); }

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

/// Per-row ratios for the two blobs_mlp crossbars (64 + bias and 16 + bias rows).
std::string manifest(double a, double d)
{
    nlohmann::json layers = nlohmann::json::array();
    for (int rows : {65, 17}) {
        layers.push_back({{"A", std::vector<double>(rows, a)},
                          {"D", std::vector<double>(rows, d)},
                          {"base_amplitude_v", 0.25},
                          {"base_width_s", 3e6}});
    }
    return nlohmann::json{{"version", "test"}, {"mode", "aidx-a"}, {"layers", layers}}.dump();
}

} // namespace

TEST(Cli, BenchmarkIsByteReproducible)
{
    const std::string common = " --workload " + workload("blobs_mlp.json") +
                               " --manifest identity --total-ops 300 --checkpoint-every 100 --seeds 2 --seed 9";
    ASSERT_EQ(run("benchmark" + common + " --out " + (kWork / "a.csv").string()), 0) << slurp(kWork / "stderr.txt");
    ASSERT_EQ(run("benchmark" + common + " --out " + (kWork / "b.csv").string()), 0);
    const auto a = slurp(kWork / "a.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a.rfind("# aidx ", 0), 0u);
    EXPECT_EQ(a, slurp(kWork / "b.csv"));
}

TEST(Cli, SweepThenFitWritesDeviceJson)
{
    const auto iv = (kWork / "iv.csv").string();
    ASSERT_EQ(run("generate-sweep --out " + iv), 0);
    ASSERT_EQ(run("fit --iv " + iv + " --out " + (kWork / "fit.json").string()), 0) << slurp(kWork / "stderr.txt");
    const auto j = slurp(kWork / "fit.json");
    EXPECT_NE(j.find("\"k_s_on\""), std::string::npos);
    EXPECT_NE(j.find("\"alpha_s_off\""), std::string::npos);
}

TEST(Cli, DriftDemoWritesBothGroups)
{
    ASSERT_EQ(run("drift-demo --pulses 200 --out " + (kWork / "dd.csv").string()), 0);
    const auto s = slurp(kWork / "dd.csv");
    EXPECT_NE(s.find("positive_skew,aidx"), std::string::npos);
    EXPECT_NE(s.find("negative_skew,baseline"), std::string::npos);
}

TEST(Cli, InvalidInputExitsWithTwo)
{
    EXPECT_EQ(run("benchmark --workload " + (kWork / "missing.json").string() + " --out x.csv"), 2);
    const auto bad = kWork / "bad_device.json";
    std::ofstream(bad) << R"({"k_s_on": 1.0})";
    EXPECT_EQ(run("generate-sweep --device " + bad.string() + " --out " + (kWork / "s.csv").string()), 2);
    const auto broken = kWork / "broken.json";
    std::ofstream(broken) << "{";
    EXPECT_EQ(run("generate-sweep --config " + broken.string() + " --out " + (kWork / "s.csv").string()), 2);
    EXPECT_EQ(run("optimize --workload " + workload("blobs_mlp.json") + " --mode aidx-x --out m.json"), 2);
    EXPECT_EQ(run("fit --out f.json"), 2);
}

TEST(Cli, VersionFlag)
{
    ASSERT_EQ(run("--version"), 0);
    EXPECT_NE(slurp(kWork / "stdout.txt").find('.'), std::string::npos);
}

TEST(Cli, DriftFreeDeviceGivesIdenticalVariants)
{
    std::ofstream(kWork / "still.json") << R"({"k_s_on": 0, "k_s_off": 0, "k_on": 0, "k_off": 0})";
    std::ofstream(kWork / "m.json") << manifest(2.0, 3.0);
    ASSERT_EQ(run("benchmark --workload " + workload("blobs_mlp.json") + " --device " + (kWork / "still.json").string() +
                  " --manifest " + (kWork / "m.json").string() + " --total-ops 600 --checkpoint-every 200 --seeds 2" +
                  " --out " + (kWork / "still.csv").string() + " --summary " + (kWork / "still_summary.json").string()),
              0)
        << slurp(kWork / "stderr.txt");
    const auto j = load(kWork / "still_summary.json");
    EXPECT_EQ(j["baseline_mean"], j["aidx_mean"]);
    EXPECT_EQ(j["baseline_loss"].get<double>(), 0.0);
}

TEST(Cli, FitOnBundledSweepRecoversFittedParameters)
{
    const auto src = fs::path(AIDX_SOURCE_DIR);
    ASSERT_EQ(run("fit --iv " + (src / "data/iv_sweep.csv").string() + " --out " + (kWork / "bundled.json").string()), 0)
        << slurp(kWork / "stderr.txt");
    const auto fit = load(kWork / "bundled.json");
    const auto ref = load(src / "params/tiox_fig2.json");
    for (const char* k : {"k_s_on", "k_s_off"})
        EXPECT_NEAR(fit[k].get<double>() / ref[k].get<double>(), 1.0, 0.05) << k;
    for (const char* a : {"alpha_s_on", "alpha_s_off"})
        EXPECT_NEAR(fit[a].get<double>(), ref[a].get<double>(), 0.25) << a;
}

TEST(Cli, OptimizedManifestDominatesBaselineOnBundledMlp)
{
    const auto m = (kWork / "aidx_a.json").string();
    ASSERT_EQ(run("optimize --workload " + workload("blobs_mlp.json") + " --mode aidx-a --out " + m), 0)
        << slurp(kWork / "stderr.txt");
    ASSERT_EQ(run("benchmark --workload " + workload("blobs_mlp.json") + " --manifest " + m +
                  " --seeds 4 --out " + (kWork / "dom.csv").string() + " --summary " +
                  (kWork / "dom_summary.json").string()),
              0);
    const auto j = load(kWork / "dom_summary.json");
    const auto ops = j["op_counts"].get<std::vector<long>>();
    const auto base = j["baseline_mean"].get<std::vector<double>>();
    const auto aidx = j["aidx_mean"].get<std::vector<double>>();
    ASSERT_EQ(ops.back(), 10000);
    for (std::size_t c = 0; c < ops.size(); ++c)
        if (ops[c] >= 2000) EXPECT_GT(aidx[c], base[c]) << "checkpoint " << ops[c];
}
