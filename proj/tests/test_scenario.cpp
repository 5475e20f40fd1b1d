#include "epecs/mini.hpp"
#include "epecs/scenario.hpp"
#include "epecs/scenario_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace epecs;

namespace {

const std::filesystem::path kData = EPECS_DATA_DIR;

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Replaces the first "key = ..." line after `section` with a new value.
std::string with_key(std::string text, const std::string& section, const std::string& key, const std::string& value)
{
    auto s = text.find(section);
    auto k = text.find("\n" + key + " =", s);
    auto e = text.find('\n', k + 1);
    return text.replace(k + 1, e - k - 1, key + " = " + value);
}

} // namespace

TEST(LoadScenario, BundledMiniShape)
{
    auto s = load_scenario(kData / "mini3.scn");
    EXPECT_EQ(s.name, "mini3");
    EXPECT_EQ(s.network.bubbles.size(), 3u);
    EXPECT_EQ(s.generators.size(), 4u);
    EXPECT_EQ(s.storage.size(), 1u);
    EXPECT_EQ(s.semis.size(), 1u);
    EXPECT_EQ(s.loads.size(), 2u);
    EXPECT_EQ(s.network.swing, "ext");
    ASSERT_EQ(s.network.interfaces.size(), 1u);
    EXPECT_EQ(s.network.interfaces[0].members[0].branch, "north-center");
    EXPECT_EQ(s.generators[0].kind, GeneratorKind::must_run);
    EXPECT_EQ(s.seed, 42u);
}

TEST(LoadScenario, BundledFileMatchesBuiltIn)
{
    EXPECT_EQ(slurp(kData / "mini3.scn"), std::string(kMini3Text));
    auto a = load_scenario(kData / "mini3.scn");
    auto b = mini3();
    b.base_dir = a.base_dir;
    EXPECT_EQ(a, b);
}

TEST(LoadScenario, EmptyFileNeedsNetwork)
{
    try {
        parse_scenario(std::string());
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("missing [network] section"), std::string::npos);
    }
}

TEST(LoadScenario, UndefinedBubbleIsNamed)
{
    std::string text = with_key(kMini3Text, "[generator coal1]", "bubble", "X");
    try {
        parse_scenario(text);
        FAIL() << "expected a reference error";
    } catch (const ReferenceError& e) {
        EXPECT_EQ(e.name(), "X");
        EXPECT_NE(std::string(e.what()).find("\"X\""), std::string::npos);
    }
}

TEST(LoadScenario, DuplicateIdRejected)
{
    std::string text = std::string(kMini3Text) + "\n[storage coal1]\nbubble = south\n";
    EXPECT_THROW(parse_scenario(text), ParseError);
}

TEST(LoadScenario, ParseErrorsCarryLineNumbers)
{
    try {
        parse_scenario(std::string("[network]\nswing = ext\nbogus = 1\n"));
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    EXPECT_THROW(parse_scenario(std::string("[network]\nswing = ext\n[generator g]\np_max = 1e\n")), ParseError);
    EXPECT_THROW(parse_scenario(std::string("[network]\nswing\n")), ParseError);
    EXPECT_THROW(parse_scenario(std::string("[planet x]\n[network]\n")), ParseError);
}

TEST(LoadScenario, CommentsAndExponents)
{
    auto s = parse_scenario(std::string("# head\n[network]  # trailing\nswing = ext\nloss_fraction = 2.5e-2\n"));
    EXPECT_DOUBLE_EQ(s.loss_fraction, 0.025);
}

TEST(LoadScenario, DefaultsApplied)
{
    auto s = parse_scenario(std::string("[network]\nswing = ext\n[bubble a]\n[branch ext a]\n"
                                        "[semi w]\nbubble = a\nkind = wind\npenetration = 0.1\n"));
    EXPECT_DOUBLE_EQ(s.loss_fraction, 0.03);
    EXPECT_DOUBLE_EQ(s.semis[0].threshold_price, -5.0);
    ASSERT_TRUE(s.semis[0].ver.has_value());
    EXPECT_DOUBLE_EQ(s.semis[0].ver->error_da, 0.12);
    EXPECT_DOUBLE_EQ(s.semis[0].ver->error_st, 0.03);
    EXPECT_DOUBLE_EQ(s.reserves.alpha_sys_tmor, 2.0);
    EXPECT_EQ(s.timing.sced_step_min, 10);
}

TEST(LoadScenario, FixtureWithProfileFile)
{
    auto s = load_scenario(kData / "fixtures" / "two_bus.scn");
    EXPECT_TRUE(validate_scenario(s).empty()) << validate_scenario(s).render();
    EXPECT_EQ(s.loads[0].profile.file, "step_load.csv");
    EXPECT_EQ(s.generators[0].fuel_price, (std::vector<double>{2.0, 2.5}));
    EXPECT_DOUBLE_EQ(s.super_price.at("west"), 5000.0);
    EXPECT_DOUBLE_EQ(s.supergen_price("west"), 5000.0);
    // default: ten times the dearest marginal cost at full output (2.5 * 10 $/MWh)
    EXPECT_DOUBLE_EQ(s.supergen_price("east"), 250.0);
    ASSERT_EQ(s.outages.size(), 1u);
    EXPECT_EQ(s.outages[0].start_minute, 30);
}

TEST(LoadScenario, MissingProfileFileFails)
{
    auto dir = std::filesystem::temp_directory_path() / "epecs_missing_profile";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "s.scn") << "[network]\nswing = ext\n[bubble a]\n[branch ext a]\n[load a]\nprofile = nope.csv\n";
    EXPECT_THROW(load_scenario(dir / "s.scn"), Error);
    std::filesystem::remove_all(dir);
}

TEST(ProfileCsv, HeaderAndContiguity)
{
    std::istringstream ok("minute,value_mw\n0,1.5\n1,2\n");
    EXPECT_EQ(parse_profile_csv(ok), (std::vector<double>{1.5, 2.0}));
    std::istringstream gap("minute,value_mw\n0,1\n2,3\n");
    EXPECT_THROW(parse_profile_csv(gap), ParseError);
    std::istringstream start("minute,value_mw\n1,1\n");
    EXPECT_THROW(parse_profile_csv(start), ParseError);
    std::istringstream header("t,mw\n0,1\n");
    EXPECT_THROW(parse_profile_csv(header), ParseError);
    std::istringstream empty("minute,value_mw\n");
    EXPECT_THROW(parse_profile_csv(empty), ParseError);
}

TEST(ProfileCsv, WriteReadBack)
{
    std::vector<double> v{0.0, 1.0 / 3.0, 1e-9, 12345.678};
    std::ostringstream os;
    write_profile_csv(os, v);
    std::istringstream is(os.str());
    EXPECT_EQ(parse_profile_csv(is), v);
}

TEST(ValidateScenario, MiniIsClean)
{
    auto rep = validate_scenario(mini3());
    EXPECT_TRUE(rep.empty()) << rep.render();
    EXPECT_EQ(rep.render(), "");
}

TEST(ValidateScenario, InvertedGeneratorBounds)
{
    auto s = mini3();
    s.generators[3].p_min = 120.0; // gt1, offline, p_max 100
    auto rep = validate_scenario(s);
    ASSERT_EQ(rep.size(), 1u) << rep.render();
    EXPECT_EQ(rep.violations[0].entity, "gt1");
    EXPECT_EQ(rep.render(), "error\tgt1\tp_min exceeds p_max\n");
}

TEST(ValidateScenario, StorageEnergyAboveMax)
{
    auto s = mini3();
    s.storage[0].initial_energy = 401.0;
    auto rep = validate_scenario(s);
    ASSERT_EQ(rep.size(), 1u) << rep.render();
    EXPECT_EQ(rep.violations[0].entity, "ps1");
}

TEST(ValidateScenario, StructuralViolations)
{
    {
        auto s = mini3();
        s.timing.sced_step_min = 7;
        auto rep = validate_scenario(s);
        ASSERT_FALSE(rep.clean());
        EXPECT_EQ(rep.violations[0].entity, "timing");
    }
    {
        auto s = mini3();
        s.network.branches.erase(s.network.branches.begin()); // north-center: north is cut off
        s.network.interfaces.clear();
        auto rep = validate_scenario(s);
        ASSERT_EQ(rep.size(), 1u) << rep.render();
        EXPECT_EQ(rep.violations[0].message, "network graph is not connected");
    }
    {
        auto s = mini3();
        s.network.interfaces[0].limit = 0.0;
        EXPECT_EQ(validate_scenario(s).size(), 1u);
    }
    {
        auto s = mini3();
        s.generators[0].online = false;
        s.generators[0].initial_output = 0.0;
        auto rep = validate_scenario(s);
        ASSERT_EQ(rep.size(), 1u);
        EXPECT_EQ(rep.violations[0].message, "must-run unit must start online");
    }
    {
        auto s = mini3();
        s.semis[0].curtailable = 1.5;
        EXPECT_EQ(validate_scenario(s).size(), 1u);
    }
    {
        auto s = mini3();
        s.storage[0].generating = s.storage[0].pumping = true;
        EXPECT_EQ(validate_scenario(s).size(), 1u);
    }
    {
        auto s = mini3();
        s.outages.push_back({"o1", "ghost", 10, 5, 1.0});
        auto rep = validate_scenario(s);
        ASSERT_EQ(rep.size(), 1u);
        EXPECT_NE(rep.violations[0].message.find("ghost"), std::string::npos);
    }
}

// Random perturbations of the bundled scenario; every numeric field must
// survive serialize -> parse exactly, and validation must be pure.
TEST(ScenarioProperties, RoundTripAndPureValidation)
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Scenario s = mini3();
        s.loss_fraction = U(rng) * 0.1;
        for (auto& g : s.generators) {
            g.h_l *= 0.5 + U(rng);
            g.h_q = U(rng) * 1e-2;
            g.fuel_price = {1.0 + U(rng), 1.0 + 3.0 * U(rng)};
            g.r_max = 1.0 / 3.0 + U(rng) * 10.0;
        }
        s.network.branches[0].weight = 0.1 + U(rng);
        s.network.interfaces[0].limit = 10.0 + 1000.0 * U(rng);
        s.storage[0].efficiency = 0.5 + 0.5 * U(rng);
        s.semis[0].ver->penetration = U(rng);
        s.semis[0].ver->seed = rng();
        s.reserves.alpha_tmsr["south"] = U(rng);
        if (trial % 2) s.reserves.lfr_override = 100.0 * U(rng);
        if (trial % 3 == 0) s.peak_load = 900.0 + U(rng);
        if (trial % 4 == 0) s.outages.push_back({"o" + std::to_string(trial), "coal1", trial * 7L, 30, 0.25 + 0.5 * U(rng)});
        s.seed = rng();

        const std::string text = serialize_scenario(s);
        Scenario back = parse_scenario(text);
        EXPECT_EQ(back, s) << text;
        EXPECT_EQ(serialize_scenario(back), text);
        EXPECT_EQ(scenario_hash(back), scenario_hash(s));

        auto r1 = validate_scenario(s), r2 = validate_scenario(s);
        EXPECT_EQ(r1.violations, r2.violations);
    }
}

TEST(ScenarioProperties, HashSeesEveryChange)
{
    auto a = mini3(), b = mini3();
    EXPECT_EQ(scenario_hash(a), scenario_hash(b));
    b.network.interfaces[0].limit += 1e-6;
    EXPECT_NE(scenario_hash(a), scenario_hash(b));
}
