#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <nkcomm/cli.hpp>

using namespace nkcomm;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::initializer_list<std::string> args)
{
    std::vector<std::string> storage{"nkcomm"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : storage) argv.push_back(s.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("nkcomm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write(const std::string& name, const std::string& text) const
    {
        std::ofstream(dir_ / name, std::ios::binary) << text;
    }

    fs::path dir_;
};

std::string block_csv()
{
    // Two blocks of five with rho = 0.9 inside and 0 across.
    std::string s;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            if (j) s += ',';
            s += i == j ? "1" : (i / 5 == j / 5 ? "0.9" : "0");
        }
        s += '\n';
    }
    return s;
}

} // namespace

TEST_F(CliTest, ModelEchoesDescriptor)
{
    const auto r = run({"model", "--n", "10", "--k", "3", "--mode", "adjacent", "--seed", "42"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["n"], 10);
    EXPECT_EQ(j["k"], 3);
    EXPECT_EQ(j["mode"], "adjacent");
    EXPECT_EQ(j["seed"], 42);
}

TEST_F(CliTest, ModelRejectsBadK)
{
    const auto r = run({"model", "--n", "10", "--k", "10"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("k must be <= n-1"), std::string::npos);
    EXPECT_EQ(run({"model", "--n", "10"}).code, 2);
    EXPECT_EQ(run({"model", "--n", "10", "--k", "1", "--mode", "ring"}).code, 2);
}

TEST_F(CliTest, ModelTableDumps)
{
    const auto r = run({"model", "--n", "5", "--k", "2", "--tables-json", path("t.json"), "--tables-bin",
                        path("t.bin"), "--out", path("m.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(fs::file_size(path("t.bin")), 5U * 8U * 8U);
    const auto t = json::parse(slurp(path("t.json")));
    EXPECT_EQ(t["tables"].size(), 5U);
    EXPECT_EQ(json::parse(slurp(path("m.json")))["k"], 2);
}

TEST_F(CliTest, CorrelateIsByteStable)
{
    const auto a = run({"correlate", "--n", "8", "--k", "2", "--seed", "5"});
    const auto b = run({"correlate", "--n", "8", "--k", "2", "--seed", "5"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    std::istringstream in(a.out);
    EXPECT_EQ(read_correlation_csv(in).n(), 8U);
}

TEST_F(CliTest, CorrelateFromDescriptorMatchesFlags)
{
    ASSERT_EQ(run({"model", "--n", "7", "--k", "4", "--mode", "random", "--seed", "9", "--out", path("m.json")}).code,
              0);
    const auto a = run({"correlate", "--model", path("m.json")});
    const auto b = run({"correlate", "--n", "7", "--k", "4", "--mode", "random", "--seed", "9"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, CorrelateZeroEpistasisIsDiagonal)
{
    const auto r = run({"correlate", "--n", "6", "--k", "0"});
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "1.0000000000,0.0000000000,0.0000000000,0.0000000000,0.0000000000,0.0000000000");
}

TEST_F(CliTest, CorrelateAboveCapExits3)
{
    const auto r = run({"correlate", "--n", "30", "--k", "1"});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("n <= 28"), std::string::npos);
    EXPECT_EQ(run({"correlate", "--n", "12", "--k", "1", "--max-n", "11"}).code, 3);
}

TEST_F(CliTest, DetectIdentityGivesSingletons)
{
    write("id.csv", "1,0,0\n0,1,0\n0,0,1\n");
    const auto r = run({"detect", "--in-csv", path("id.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "nc=3 q=0\n");
}

TEST_F(CliTest, DetectTwoBlocksAgreesWithBruteForce)
{
    write("b.csv", block_csv());
    const auto r =
        run({"detect", "--in-csv", path("b.csv"), "--out-net", path("b.net"), "--out-clu", path("b.clu")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("nc=2 q=", 0), 0U);
    EXPECT_EQ(slurp(path("b.clu")), "*Vertices 10\n1\n1\n1\n1\n1\n2\n2\n2\n2\n2\n");

    std::istringstream in(block_csv());
    const auto g = graph_from_correlation(read_correlation_csv(in));
    const auto best = brute_force_max_modularity(g);
    EXPECT_EQ(r.out, "nc=2 q=" + sig10(best.q) + "\n");
    EXPECT_EQ(slurp(path("b.net")).rfind("*Vertices 10\n1 \"F_1\"\n", 0), 0U);
}

TEST_F(CliTest, DetectMalformedCsvReportsLine)
{
    write("bad.csv", "1,0\n0,x\n");
    const auto r = run({"detect", "--in-csv", path("bad.csv")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 2"), std::string::npos);
    EXPECT_EQ(run({"detect", "--in-csv", path("missing.csv")}).code, 2);
    EXPECT_EQ(run({"detect", "--in-csv", path("bad.csv"), "--weight", "cubic"}).code, 2);
}

TEST_F(CliTest, SweepWithoutTimingIsByteIdentical)
{
    const auto a = run({"sweep", "--k-values", "0..3", "--replicates", "3", "--no-timing"});
    const auto b = run({"sweep", "--k-values", "0..3", "--replicates", "3", "--no-timing", "--threads", "1"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.rfind(std::string(kSweepCsvHeader) + "\n", 0), 0U);
    EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 1 + 2 * 4 * 3);
}

TEST_F(CliTest, SweepConfigWithFlagOverride)
{
    write("cfg.json", R"({"n": 6, "k_values": [0, 1, 2], "modes": ["random"], "replicates": 5, "base_seed": 3})");
    const auto r = run({"sweep", "--config", path("cfg.json"), "--replicates", "2", "--no-timing", "--out-summary",
                        path("s.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    const auto records = read_sweep_csv(in);
    ASSERT_EQ(records.size(), 6U);
    for (const auto& rec : records) {
        EXPECT_EQ(rec.mode, EpistasisMode::Random);
        EXPECT_EQ(rec.seed, derive_seed(3, EpistasisMode::Random, rec.k, rec.replicate));
        EXPECT_LE(rec.nc, 6U);
    }
    const auto s = json::parse(slurp(path("s.json")));
    EXPECT_EQ(s["random"]["2"]["count"], 2);
    EXPECT_FALSE(s.contains("adjacent"));

    write("broken.json", "{\"n\": ");
    EXPECT_EQ(run({"sweep", "--config", path("broken.json")}).code, 2);
}

TEST_F(CliTest, SweepRejectsBadArguments)
{
    EXPECT_EQ(run({"sweep", "--n", "5", "--k-values", "0..5"}).code, 2);
    EXPECT_EQ(run({"sweep", "--modes", "adjacent,ring"}).code, 2);
    EXPECT_EQ(run({"sweep", "--replicates", "0"}).code, 2);
    EXPECT_EQ(run({"sweep", "--n", "1"}).code, 2);
}

TEST_F(CliTest, PlotMarksPeakAndRejectsEmpty)
{
    const auto s = run({"sweep", "--replicates", "5", "--no-timing", "--out-csv", path("s.csv")});
    ASSERT_EQ(s.code, 0) << s.err;
    const auto r = run({"plot", "--in-csv", path("s.csv"), "--metric", "msc"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto at = r.out.find("class=\"peak\" data-mode=\"random\" data-k=\"");
    ASSERT_NE(at, std::string::npos);
    const char k = r.out[at + std::string("class=\"peak\" data-mode=\"random\" data-k=\"").size()];
    EXPECT_TRUE(k == '1' || k == '2') << k;

    write("empty.csv", "");
    const auto e = run({"plot", "--in-csv", path("empty.csv")});
    EXPECT_EQ(e.code, 2);
    EXPECT_NE(e.err.find("no records"), std::string::npos);
    EXPECT_EQ(run({"plot", "--in-csv", path("s.csv"), "--metric", "area"}).code, 2);
}

TEST_F(CliTest, UsageErrors)
{
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"model", "--n", "abc", "--k", "1"}).code, 2);
}

TEST_F(CliTest, ThreadsEnvironmentVariable)
{
    ::setenv("NKCOMM_THREADS", "2", 1);
    EXPECT_LE(cli::worker_count(), 2U);
    const auto a = run({"sweep", "--k-values", "0,4", "--replicates", "2", "--no-timing"});
    ::setenv("NKCOMM_THREADS", "nope", 1);
    EXPECT_THROW(cli::worker_count(), ParameterError);
    EXPECT_EQ(run({"sweep", "--k-values", "0", "--replicates", "1"}).code, 2);
    ::unsetenv("NKCOMM_THREADS");
    const auto b = run({"sweep", "--k-values", "0,4", "--replicates", "2", "--no-timing"});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}
