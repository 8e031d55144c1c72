// End-to-end checks of the lob binary: exit codes, file contracts, and
// idempotence of outputs. Each test drives the real executable.

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* cli_path() {
    return LOB_CLI_PATH;
}

int run(const std::string& args) {
    const std::string command = std::string(cli_path()) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("lob_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(dir_);
        config_ = dir_ / "sim.cfg";
        std::ofstream out(config_);
        out << "N = 20000\n"
               "T_ms = 2000000\n"
               "L = 25\n"
               "P_market = 0.0147\n"
               "l0 = 3.045\n"
               "t_lt_ms = 13240\n"
               "l_lt = 5.46\n"
               "S0_ticks = 2340\n"
               "seed = 42\n";
    }

    void TearDown() override { fs::remove_all(dir_); }

    fs::path dir_;
    fs::path config_;
};

}  // namespace

TEST_F(CliTest, HelpOnEverySubcommand) {
    EXPECT_EQ(run("--help"), 0);
    for (const char* sub :
         {"simulate", "validate", "reconstruct", "analyze", "fit", "roundtrip"}) {
        EXPECT_EQ(run(std::string(sub) + " --help"), 0) << sub;
    }
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
    EXPECT_EQ(run("validate --no-such-flag x"), 1);
    EXPECT_EQ(run("frobnicate"), 1);
}

TEST_F(CliTest, SimulateValidateRoundTrip) {
    const fs::path events = dir_ / "events.lob";
    const fs::path report = dir_ / "report.json";
    ASSERT_EQ(run("simulate --config " + config_.string() + " --out " + events.string() +
                  " --report " + report.string()),
              0);
    ASSERT_TRUE(fs::exists(events));
    ASSERT_TRUE(fs::exists(report));
    EXPECT_EQ(run("validate --events " + events.string()), 0);

    // Header contract.
    std::ifstream in(events);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "# lob-events v1 tick_cents=1 open_ms=0 close_ms=2000000");
}

TEST_F(CliTest, SimulateIsIdempotent) {
    const fs::path a = dir_ / "a.lob";
    const fs::path b = dir_ / "b.lob";
    ASSERT_EQ(run("simulate --config " + config_.string() + " --out " + a.string()), 0);
    ASSERT_EQ(run("simulate --config " + config_.string() + " --out " + b.string()), 0);
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST_F(CliTest, ValidateRejectsCorruptStream) {
    const fs::path bad = dir_ / "bad.lob";
    {
        std::ofstream out(bad);
        out << "# lob-events v1 tick_cents=1 open_ms=0 close_ms=1000\n";
        out << "0,A,1,B,100,10\n";
        out << "1,C,2,B,100,10\n";  // unknown id
    }
    EXPECT_EQ(run("validate --events " + bad.string()), 2);
}

TEST_F(CliTest, ValidateMissingFileIsIoError) {
    EXPECT_EQ(run("validate --events " + (dir_ / "missing.lob").string()), 3);
}

TEST_F(CliTest, ReconstructWritesQuoteCsv) {
    const fs::path events = dir_ / "events.lob";
    const fs::path quotes = dir_ / "quotes.csv";
    const fs::path depth = dir_ / "depth.csv";
    ASSERT_EQ(run("simulate --config " + config_.string() + " --out " + events.string()), 0);
    ASSERT_EQ(run("reconstruct --events " + events.string() + " --quotes-out " + quotes.string() +
                  " --depth-out " + depth.string() + " --sample-ms 100000 --window-ticks 30"),
              0);
    std::ifstream in(quotes);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "timestamp_ms,best_bid_ticks,best_ask_ticks,spread_ticks,midpoint_half_ticks");
    std::string first_row;
    std::getline(in, first_row);
    EXPECT_EQ(first_row.rfind("0,2339,2341,2,4680", 0), 0u);

    std::ifstream din(depth);
    std::getline(din, header);
    EXPECT_EQ(header, "timestamp_ms,p_rel_half_ticks,side,volume_shares,order_count");
}

TEST_F(CliTest, AnalyzeOccupationColumns) {
    const fs::path events = dir_ / "events.lob";
    const fs::path out = dir_ / "occupation.csv";
    ASSERT_EQ(run("simulate --config " + config_.string() + " --out " + events.string()), 0);
    ASSERT_EQ(run("analyze occupation --events " + events.string() + " --out " + out.string() +
                  " --range-half-ticks 128"),
              0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "p_rel_half_ticks,o_av");
    size_t rows = 0;
    std::string row;
    while (std::getline(in, row)) {
        ++rows;
    }
    EXPECT_EQ(rows, 257u);  // every half-tick in [-128, 128]
}

TEST_F(CliTest, AnalyzeLifetimesWeightsAndRegimeSplit) {
    const fs::path events = dir_ / "events.lob";
    ASSERT_EQ(run("simulate --config " + config_.string() + " --out " + events.string()), 0);
    for (const char* weight : {"none", "lifetime", "volume", "lifetime-volume"}) {
        const fs::path out = dir_ / (std::string("lifetimes_") + weight + ".csv");
        ASSERT_EQ(run("analyze lifetimes --events " + events.string() + " --out " + out.string() +
                      " --weight " + weight),
                  0)
            << weight;
        std::ifstream in(out);
        std::string header;
        std::getline(in, header);
        EXPECT_EQ(header, "lifetime_ms,icdf");
    }
    const fs::path split = dir_ / "lifetimes_split.csv";
    ASSERT_EQ(run("analyze lifetimes --events " + events.string() + " --out " + split.string() +
                  " --split-regime --width 49"),
              0);
    std::ifstream in(split);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "lifetime_ms,icdf,icdf_cushion_share,icdf_distant_share");
}

TEST_F(CliTest, AnalyzeSummaryAcceptsMultipleFiles) {
    const fs::path a = dir_ / "a.lob";
    const fs::path b = dir_ / "b.lob";
    const fs::path out = dir_ / "summary.csv";
    ASSERT_EQ(run("simulate --config " + config_.string() + " --out " + a.string()), 0);
    ASSERT_EQ(run("simulate --config " + config_.string() + " --seed 43 --out " + b.string()), 0);
    ASSERT_EQ(run("analyze summary --events " + a.string() + " " + b.string() + " --out " +
                  out.string() + " --range-half-ticks 128"),
              0);
    std::ifstream in(out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("file,mean_spread_ticks", 0), 0u);
    size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 2u);
}

TEST_F(CliTest, FitPrintsParameters) {
    const fs::path events = dir_ / "events.lob";
    const fs::path fit_report = dir_ / "fit.json";
    ASSERT_EQ(run("simulate --config " + config_.string() + " --out " + events.string()), 0);
    ASSERT_EQ(run("fit levels --events " + events.string() + " --out " + fit_report.string()), 0);
    const std::string text = slurp(fit_report);
    EXPECT_NE(text.find("\"scale\""), std::string::npos);
    EXPECT_NE(text.find("\"amplitude\""), std::string::npos);
}

TEST_F(CliTest, RoundtripProducesReport) {
    const fs::path report = dir_ / "roundtrip.json";
    const fs::path out_dir = dir_ / "rt";
    ASSERT_EQ(run("roundtrip --config " + config_.string() + " --out-dir " + out_dir.string() +
                  " --report " + report.string()),
              0);
    const std::string text = slurp(report);
    EXPECT_NE(text.find("\"fitted\""), std::string::npos);
    EXPECT_NE(text.find("\"relative_error\""), std::string::npos);
    EXPECT_NE(text.find("\"l0\""), std::string::npos);
    EXPECT_TRUE(fs::exists(out_dir / "events.lob"));
}

TEST_F(CliTest, AnalyzeIsIdempotent) {
    const fs::path events = dir_ / "events.lob";
    ASSERT_EQ(run("simulate --config " + config_.string() + " --out " + events.string()), 0);
    const fs::path a = dir_ / "occ_a.csv";
    const fs::path b = dir_ / "occ_b.csv";
    ASSERT_EQ(run("analyze occupation --events " + events.string() + " --out " + a.string() +
                  " --range-half-ticks 128"),
              0);
    ASSERT_EQ(run("analyze occupation --events " + events.string() + " --out " + b.string() +
                  " --range-half-ticks 128"),
              0);
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST_F(CliTest, OutputsDoNotMutateInputs) {
    const fs::path events = dir_ / "events.lob";
    ASSERT_EQ(run("simulate --config " + config_.string() + " --out " + events.string()), 0);
    const std::string before = slurp(events);
    const fs::path out = dir_ / "spread.csv";
    ASSERT_EQ(run("analyze spread --events " + events.string() + " --out " + out.string()), 0);
    EXPECT_EQ(slurp(events), before);
}
