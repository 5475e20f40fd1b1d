#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kData = EPECS_DATA_DIR;
const fs::path kTmp = fs::temp_directory_path() / "epecs_cli_test";

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Run
{
    int code = -1;
    std::string out, err;
};

Run cli(const std::string& args, const std::string& env = "")
{
    fs::create_directories(kTmp);
    const auto out = kTmp / "stdout.txt", err = kTmp / "stderr.txt";
    const std::string cmd = env + " \"" + std::string(EPECS_CLI_PATH) + "\" " + args + " >\"" + out.string() +
                            "\" 2>\"" + err.string() + "\"";
    const int st = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string write_file(const std::string& name, const std::string& text)
{
    fs::create_directories(kTmp);
    std::ofstream(kTmp / name, std::ios::binary) << text;
    return (kTmp / name).string();
}

bool same_tree(const fs::path& a, const fs::path& b)
{
    std::size_t n = 0;
    for (const auto& f : fs::recursive_directory_iterator(a)) {
        if (!f.is_regular_file()) continue;
        if (slurp(f.path()) != slurp(b / fs::relative(f.path(), a))) return false;
        ++n;
    }
    return n > 0;
}

} // namespace

TEST(Cli, ValidateBundled)
{
    const auto path = (kData / "mini3.scn").string();
    auto r = cli("validate \"" + path + "\"");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, path + ": valid\n");
    EXPECT_EQ(r.err, "");
}

TEST(Cli, MissingFileNamesPath)
{
    auto r = cli("validate /nonexistent/where.scn");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("/nonexistent/where.scn"), std::string::npos) << r.err;
    EXPECT_EQ(r.out, "");
}

TEST(Cli, InvalidAndMalformedScenarios)
{
    std::string text = slurp(kData / "mini3.scn");
    auto k = text.find("[generator gt1]");
    k = text.find("p_min = 10", k);
    text.replace(k, 10, "p_min = 120");
    auto r = cli("validate \"" + write_file("bad.scn", text) + "\"");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("gt1"), std::string::npos) << r.err;

    r = cli("validate \"" + write_file("junk.scn", "[network]\nswing\n") + "\"");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(cli("").code, 1);
    EXPECT_EQ(cli("frobnicate").code, 1);
    EXPECT_EQ(cli("simulate \"" + (kData / "mini3.scn").string() + "\"").code, 1); // --out missing
    EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, GenMiniMatchesBundled)
{
    const auto out = kTmp / "gen" / "mini3.scn";
    auto r = cli("gen-mini --out \"" + out.string() + "\"");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(out), slurp(kData / "mini3.scn"));
    EXPECT_EQ(cli("validate \"" + out.string() + "\"").code, 0);
}

TEST(Cli, SimulateIsDeterministicAndFeedsMetrics)
{
    const auto scn = (kData / "fixtures" / "two_bus.scn").string();
    const auto a = kTmp / "sim_a", b = kTmp / "sim_b", c = kTmp / "sim_c";
    for (const auto& d : {a, b, c}) fs::remove_all(d);
    ASSERT_EQ(cli("simulate \"" + scn + "\" --days 1 --seed 5 --out \"" + a.string() + "\"").code, 0);
    ASSERT_EQ(cli("simulate \"" + scn + "\" --days 1 --out \"" + b.string() + "\"", "EPECS_SEED=5").code, 0);
    EXPECT_TRUE(same_tree(a, b));
    ASSERT_EQ(cli("simulate \"" + scn + "\" --days 1 --seed 6 --out \"" + c.string() + "\"").code, 0);
    EXPECT_EQ(slurp(a / "manifest.txt").find("seed"), slurp(c / "manifest.txt").find("seed"));
    EXPECT_NE(slurp(a / "manifest.txt"), slurp(c / "manifest.txt"));

    const auto ra = kTmp / "rep_a", rb = kTmp / "rep_b";
    auto r = cli("metrics \"" + a.string() + "\" --out \"" + ra.string() + "\" --scenario \"" + scn + "\"");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(cli("metrics \"" + b.string() + "\" --out \"" + rb.string() + "\"").code, 0);
    EXPECT_TRUE(fs::exists(ra / "report.csv"));
    EXPECT_TRUE(same_tree(ra, rb));

    r = cli("metrics \"" + a.string() + "\" --out \"" + (kTmp / "rep_x").string() + "\" --scenario \"" +
            (kData / "mini3.scn").string() + "\"");
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(cli("metrics \"" + (kTmp / "nowhere").string() + "\" --out x").code, 1);
    fs::remove_all(kTmp);
}
