#include "agentmem_cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace agentmem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("agentmem_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text)
    {
        auto p = (dir_ / name).string();
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }

    static std::string read(const fs::path& p)
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    int run(std::vector<std::string> args)
    {
        out_.str("");
        err_.str("");
        return cli::run_cli(std::move(args), out_, err_);
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

const char* kSimulateConfig = R"([policy]
variant = w_tinylfu
capacity = 10
window = 9
main = 1
[workload]
distribution = zipf:1
length = 2000
seed = 3
)";

} // namespace

TEST_F(CliTest, SimulatePrintsGoldenHeaderAndOneRow)
{
    auto cfg = write("run.ini", kSimulateConfig);
    ASSERT_EQ(run({"simulate", "--config", cfg}), 0) << err_.str();
    std::istringstream lines(out_.str());
    std::string header, row, extra;
    std::getline(lines, header);
    std::getline(lines, row);
    EXPECT_EQ(header, "policy,capacity,window,main,seed,mhr,mra,re,rt,warmup_step");
    EXPECT_EQ(row.rfind("w_tinylfu,10,9,1,3,", 0), 0u) << row;
    EXPECT_FALSE(std::getline(lines, extra));
    EXPECT_NE(err_.str().find("warm-up step"), std::string::npos);
}

TEST_F(CliTest, SimulateIsByteDeterministic)
{
    auto cfg = write("run.ini", kSimulateConfig);
    auto a = (dir_ / "a.csv").string(), b = (dir_ / "b.csv").string();
    ASSERT_EQ(run({"simulate", "--config", cfg, "--out", a}), 0);
    ASSERT_EQ(run({"simulate", "--config", cfg, "--out", b}), 0);
    EXPECT_EQ(read(a), read(b));
    ASSERT_EQ(run({"simulate", "--config", cfg, "--out", b, "--force", "--seed", "4"}), 0);
    EXPECT_NE(read(a), read(b));
}

TEST_F(CliTest, SimulateRefusesOverwriteWithoutForce)
{
    auto cfg = write("run.ini", kSimulateConfig);
    auto a = write("a.csv", "keep");
    EXPECT_EQ(run({"simulate", "--config", cfg, "--out", a}), 1);
    EXPECT_EQ(read(a), "keep");
}

TEST_F(CliTest, SimulateWritesTrace)
{
    auto trace = (dir_ / "trace.tsv").string();
    auto cfg = write("run.ini", std::string(kSimulateConfig) + "[output]\ntrace = " + trace + "\n");
    ASSERT_EQ(run({"simulate", "--config", cfg}), 0) << err_.str();
    auto text = read(trace);
    EXPECT_EQ(text.rfind("1\taccess-miss\t", 0), 0u) << text.substr(0, 80);
    EXPECT_NE(text.find("\tevict\t"), std::string::npos);
}

TEST_F(CliTest, ConfigAndUsageErrors)
{
    EXPECT_EQ(run({"simulate", "--config", (dir_ / "missing.ini").string()}), 1);
    EXPECT_NE(err_.str().find("missing.ini"), std::string::npos);
    EXPECT_EQ(run({"simulate"}), 1);
    EXPECT_EQ(run({"frobnicate"}), 1);
    auto bad = write("bad.ini", "[policy]\ncapacity = -3\n");
    EXPECT_EQ(run({"simulate", "--config", bad}), 1);
    EXPECT_NE(err_.str().find("policy.capacity"), std::string::npos);
}

TEST_F(CliTest, SweepPolicySplitGridWritesFourSeries)
{
    auto cfg = write("splits.ini", R"([workload]
length = 1000
[sweep]
policies = fifo, w_tinylfu
capacities = 10
splits = 9:1, 5:5, 1:9
seeds = 1
)");
    auto out = (dir_ / "out").string();
    ASSERT_EQ(run({"sweep", "--config", cfg, "--out", out, "--jobs", "2"}), 0) << err_.str();
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir_ / "out" / "series")) {
        ++n;
        EXPECT_EQ(read(e.path()).rfind("step,hit_rate,occupancy\n", 0), 0u);
    }
    EXPECT_EQ(n, 4u);
    auto csv = read(dir_ / "out" / "sweep.csv");
    EXPECT_EQ(csv.rfind(std::string(cli::kSweepHeader) + "\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);

    EXPECT_EQ(run({"sweep", "--config", cfg, "--out", out}), 1);
    EXPECT_NE(err_.str().find("--force"), std::string::npos);
    EXPECT_EQ(run({"sweep", "--config", cfg, "--out", out, "--force"}), 0);
}

TEST_F(CliTest, SweepCapacityGridFiveRows)
{
    auto cfg = write("cap.ini", R"([workload]
length = 1000
[sweep]
policies = fifo
capacities = 5, 10, 15, 20, 25
seeds = 2
)");
    ASSERT_EQ(run({"sweep", "--config", cfg, "--out", (dir_ / "cap").string()}), 0) << err_.str();
    auto csv = read(dir_ / "cap" / "sweep.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
    EXPECT_NE(csv.find("\nfifo,25,0,0,zipf:1,2,"), std::string::npos) << csv;
}

TEST_F(CliTest, SweepNeedsOutputDirectory)
{
    auto cfg = write("cap.ini", "[sweep]\ncapacities = 5\n");
    EXPECT_EQ(run({"sweep", "--config", cfg}), 1);
}

TEST_F(CliTest, GraphCommands)
{
    auto file = std::string(AGENTMEM_DATA_DIR) + "/fixtures/home.graph";
    ASSERT_EQ(run({"graph", "check", file}), 0) << err_.str();
    EXPECT_EQ(out_.str().rfind("ok: ", 0), 0u);
    ASSERT_EQ(run({"graph", "render", file}), 0);
    EXPECT_NE(out_.str().find("{name: kitchen, type: Area"), std::string::npos);
    ASSERT_EQ(run({"graph", "query", file, "kitchen", "bedroom"}), 0);
    EXPECT_EQ(out_.str(), "true\n");
    ASSERT_EQ(run({"graph", "query", file, "kitchen", "garage"}), 0);
    EXPECT_EQ(out_.str(), "false\n");

    auto broken = write("broken.graph", "agentmem-scene-graph 1\nfloor f\narea a f 0 0\nend\n");
    EXPECT_EQ(run({"graph", "check", broken}), 2);
    EXPECT_NE(err_.str().find("line 3"), std::string::npos);
}
