#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

struct CliRun {
    int code;
    std::string out;
};

// Runs the CLI with stderr folded into stdout.
CliRun run(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + (env.empty() ? "" : " ") + SUBPASS_CLI_PATH + std::string(" ") + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {-1, ""};
    std::string out;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, got);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

const char* kFpt = "sample --kind fpt --alpha 0.5 --theta 1 --q 0 --barrier const:1 --n 1000 --seed 7";

}  // namespace

TEST(Cli, SampleConstantBarrier)
{
    const CliRun r = run(kFpt);
    ASSERT_EQ(r.code, 0) << r.out;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 1001u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"tau", "undershoot", "value", "crept"}));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ASSERT_EQ(rows[i].size(), 4u);
        ASSERT_GT(std::stod(rows[i][0]), 0.0);
        ASSERT_EQ(rows[i][3], "false");
    }
}

TEST(Cli, ByteIdenticalReruns)
{
    EXPECT_EQ(run(kFpt).out, run(kFpt).out);
    const std::string out = testing::TempDir() + "subpass_cli_a.csv";
    ASSERT_EQ(run(std::string(kFpt) + " --out " + out).code, 0);
    std::ostringstream a;
    a << std::ifstream(out).rdbuf();
    EXPECT_EQ(a.str(), run(kFpt).out);
}

TEST(Cli, ThreadCountDoesNotChangeOutput)
{
    const std::string base = "sample --kind fpt --alpha 0.6 --q 1.5 --barrier linear:1,0.2 --n 200 --seed 3";
    EXPECT_EQ(run(base + " --threads 1").out, run(base + " --threads 3").out);
    const std::string fp = "fpde --n 50 --t-grid 0.5,1 --x-grid 1,2 --seed 2";
    EXPECT_EQ(run(fp + " --threads 1").out, run(fp + " --threads 2").out);
}

TEST(Cli, SeedFromEnvironment)
{
    const std::string base = "sample --kind stable --alpha 0.5 --n 20";
    EXPECT_EQ(run(base, "SUBPASS_SEED=9").out, run(base + " --seed 9").out);
    EXPECT_NE(run(base, "SUBPASS_SEED=9").out, run(base, "SUBPASS_SEED=10").out);
    EXPECT_EQ(run(base, "SUBPASS_SEED=x").code, 2);
}

TEST(Cli, InvalidAlphaIsAConfigError)
{
    const CliRun r = run("sample --kind fpt --alpha 1.2 --barrier const:1 --n 10");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("alpha in (0,1)"), std::string::npos) << r.out;
}

TEST(Cli, BarrierGrammar)
{
    for (const char* bad : {"const:-1", "linear:1", "linear:1,-2", "file:/nonexistent/b.csv", "ramp:1", "const:abc"}) {
        const CliRun r = run(std::string("sample --kind fpt --alpha 0.5 --n 5 --barrier ") + bad);
        EXPECT_EQ(r.code, 2) << bad << ": " << r.out;
    }
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("sample --n").code, 2);
}

TEST(Cli, JsonMirrorsCsv)
{
    const std::string base = "sample --kind fpt --alpha 0.5 --barrier linear:1,0.5 --n 30 --seed 4";
    const auto csv = parse_csv(run(base).out);
    const CliRun j = run(base + " --format json");
    ASSERT_EQ(j.code, 0);
    const auto doc = nlohmann::json::parse(j.out);
    ASSERT_TRUE(doc.is_array());
    ASSERT_EQ(doc.size(), 30u);
    for (std::size_t i = 0; i < doc.size(); ++i) {
        EXPECT_EQ(doc[i]["tau"].get<double>(), std::stod(csv[i + 1][0]));
        EXPECT_EQ(doc[i]["crept"].get<bool>(), csv[i + 1][3] == "true");
    }
}

TEST(Cli, ValidateInvariantsExitsZero)
{
    const CliRun r = run("validate --suite invariants");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(r.out.find("false"), std::string::npos) << r.out;
}

TEST(Cli, FpdeSquarePayoffConstancy)
{
    const CliRun r = run("fpde --n 100 --seed 1");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows[0], (std::vector<std::string>{"t", "x", "estimate", "se", "n"}));
    ASSERT_EQ(rows.size(), 1u + 20u * 100u);
    for (std::size_t j = 0; j < 20; ++j) {
        const auto& first = rows[1 + 100 * j];
        const double ref = std::stod(first[2]) / (std::stod(first[1]) * std::stod(first[1]));
        for (std::size_t i = 1; i < 100; ++i) {
            const auto& row = rows[1 + 100 * j + i];
            ASSERT_EQ(row[0], first[0]);
            const double x = std::stod(row[1]);
            ASSERT_NEAR(std::stod(row[2]) / (x * x), ref, 1e-13 * ref);
        }
    }
}

TEST(Cli, PriceCurveFallsTowardTheBarrier)
{
    const CliRun r = run("price --n 1000 --T 0.0383561643835616 --seed 5");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows[0], (std::vector<std::string>{"R0", "T", "price", "se", "n"}));
    ASSERT_EQ(rows.size(), 131u);
    double top = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double p = std::stod(rows[i][2]);
        ASSERT_GE(p, 0.0);
        top = std::max(top, p);
    }
    const double last = std::stod(rows.back()[2]), last_se = std::stod(rows.back()[3]);
    EXPECT_LT(last, 0.1 * top + 3.0 * last_se);
}

TEST(Cli, BenchCountersAreDeterministic)
{
    const std::string cmd = "bench --target sfp --grid 0.3,0.7 --n 100 --seed 2";
    const CliRun a = run(cmd), b = run(cmd);
    ASSERT_EQ(a.code, 0) << a.out;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.find("walltime"), std::string::npos);
    EXPECT_NE(run(cmd + " --metric walltime").out.find("walltime_s_per_1e4"), std::string::npos);
}
