#include "epecs/engine.hpp"
#include "epecs/mini.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace epecs;
namespace fs = std::filesystem;

namespace {

const fs::path kData = EPECS_DATA_DIR;

Scenario two_bus() { return load_scenario(kData / "fixtures" / "two_bus.scn"); }

// One simulated day of the bundled scenario, shared by the invariant tests.
const SimulationTrace& mini_day()
{
    static const SimulationTrace tr = simulate(mini3(), 1, 42);
    return tr;
}

std::vector<const LayerEvent*> events_of(const SimulationTrace& tr, const std::string& layer)
{
    std::vector<const LayerEvent*> out;
    for (const auto& e : tr.events)
        if (e.layer == layer) out.push_back(&e);
    return out;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST(Cascade, LayerCadence)
{
    auto s = two_bus();
    s.outages.clear();
    auto tr = simulate(s, 1, 9);
    auto scuc = events_of(tr, "scuc"), rtuc = events_of(tr, "rtuc"), sced = events_of(tr, "sced");
    ASSERT_EQ(scuc.size(), 1u);
    EXPECT_EQ(scuc[0]->minute, 0);
    ASSERT_EQ(rtuc.size(), 24u);
    for (std::size_t h = 0; h < rtuc.size(); ++h) {
        EXPECT_EQ(rtuc[h]->minute, static_cast<long>(60 * h));
        EXPECT_EQ(rtuc[h]->detail, "");
    }
    ASSERT_EQ(sced.size(), 144u);
    for (std::size_t k = 0; k < sced.size(); ++k) EXPECT_EQ(sced[k]->minute, static_cast<long>(10 * k));
    for (const auto& e : tr.events) EXPECT_EQ(e.status, "optimal") << e.layer << " " << e.minute;
}

TEST(Cascade, OutageTriggersEmergencyAndResync)
{
    auto s = two_bus();
    s.outages[0].start_minute = 7;
    auto tr = simulate(s, 1, 9);
    auto rtuc = events_of(tr, "rtuc");
    ASSERT_GE(rtuc.size(), 3u);
    EXPECT_EQ(rtuc[0]->minute, 0);
    EXPECT_EQ(rtuc[1]->minute, 7);
    EXPECT_EQ(rtuc[1]->detail, "emergency");
    EXPECT_EQ(rtuc[2]->minute, 15);
    EXPECT_EQ(rtuc[2]->detail, "resync");
    EXPECT_EQ(rtuc[3]->minute, 60);
    EXPECT_EQ(rtuc.size(), 26u);
    // half of g1 is out for 15 minutes
    for (long t = 7; t < 22; ++t) EXPECT_LE(tr.output[0][t], 150.0 + 1e-6) << t;
}

TEST(Cascade, OutageOnBoundaryNeedsNoResync)
{
    auto tr = simulate(two_bus(), 1, 9); // trip at minute 30
    auto rtuc = events_of(tr, "rtuc");
    ASSERT_EQ(rtuc.size(), 25u);
    EXPECT_EQ(rtuc[1]->minute, 30);
    EXPECT_EQ(rtuc[1]->detail, "emergency");
    EXPECT_EQ(rtuc[2]->minute, 60);
}

TEST(Cascade, TieLineOutageMasksDelivery)
{
    auto s = two_bus();
    s.outages = {{"cut", "tie_n", 20, 20, 1.0}};
    auto tr = simulate(s, 1, 9);
    for (long t = 0; t < 60; ++t) {
        const double expect = (t >= 20 && t < 40) ? 0.0 : 40.0;
        EXPECT_NEAR(tr.semi_available[0][t], expect, 1e-9) << t;
        EXPECT_NEAR(tr.curtailed[0][t], 0.0, 1e-9);
    }
    EXPECT_EQ(events_of(tr, "rtuc")[1]->detail, "emergency");
}

TEST(Cascade, OutageOfUnknownResource)
{
    auto s = two_bus();
    OutageEvent ev{"x", "ghost", 0, 10, 1.0};
    EXPECT_THROW(apply_outage(s, ev, SystemState::initial(s)), ReferenceError);
    s.outages.push_back(ev);
    EXPECT_THROW(simulate(s, 1, 9), Error);
}

TEST(Cascade, FullTripTakesUnitOffline)
{
    auto s = two_bus();
    auto st = apply_outage(s, {"t", "g1", 0, 10, 1.0}, SystemState::initial(s));
    EXPECT_FALSE(st.units[0].online);
    EXPECT_EQ(st.units[0].output, 0.0);
    auto half = apply_outage(s, {"t", "g1", 0, 10, 0.75}, SystemState::initial(s));
    EXPECT_TRUE(half.units[0].online);
    EXPECT_EQ(half.units[0].output, 75.0);
    EXPECT_EQ(active_outage(s, "g1", 29), 0.0);
    EXPECT_EQ(active_outage(s, "g1", 30), 0.5);
    EXPECT_EQ(active_outage(s, "g1", 45), 0.0);
}

TEST(Cascade, RejectsBadSpan)
{
    EXPECT_THROW(simulate(two_bus(), 0, 1), ModelError);
}

TEST(MiniDay, SeriesShapes)
{
    const auto& tr = mini_day();
    EXPECT_EQ(tr.minutes, 1440);
    EXPECT_EQ(tr.generators.size(), 4u);
    EXPECT_EQ(tr.mustrun_min, 150.0);
    for (const auto& v : tr.output) EXPECT_EQ(v.size(), 1440u);
    EXPECT_EQ(tr.interface_flows.size(), 1u);
}

TEST(MiniDay, CurtailmentWithinAvailable)
{
    const auto& tr = mini_day();
    for (std::size_t i = 0; i < tr.semis.size(); ++i)
        for (long t = 0; t < tr.minutes; ++t) {
            EXPECT_GE(tr.curtailed[i][t], -1e-9);
            EXPECT_LE(tr.curtailed[i][t], tr.semi_available[i][t] + 1e-9);
        }
}

TEST(MiniDay, ReservesNonNegative)
{
    const auto& tr = mini_day();
    for (long t = 0; t < tr.minutes; ++t) {
        EXPECT_GE(tr.lfr_up[t], 0.0);
        EXPECT_GE(tr.lfr_down[t], 0.0);
        EXPECT_GE(tr.rampr_up[t], 0.0);
        EXPECT_GE(tr.rampr_down[t], 0.0);
        EXPECT_LE(std::abs(tr.regulation[t]), tr.reg_saturation[t] + 1e-9);
    }
}

// E_t = E_{t-1} + (eta * pump - gen) / 60, with net power = gen - pump.
TEST(MiniDay, StorageEnergyContinuity)
{
    const auto s = mini3();
    const auto& tr = mini_day();
    for (std::size_t i = 0; i < s.storage.size(); ++i) {
        const auto& x = s.storage[i];
        double e = x.start_energy();
        for (long t = 0; t < tr.minutes; ++t) {
            const double p = tr.storage_power[i][t];
            e += (p < 0.0 ? -x.efficiency * p : -p) / 60.0;
            EXPECT_NEAR(tr.storage_energy[i][t], e, 1e-6) << t;
            EXPECT_GE(tr.storage_energy[i][t], x.e_min - 1e-9);
            EXPECT_LE(tr.storage_energy[i][t], x.e_max + 1e-9);
            e = tr.storage_energy[i][t];
        }
    }
}

// The recorded flows are the DC solution of the recorded injections, and the
// imbalance is what the swing absorbs.
TEST(MiniDay, FlowsMatchInjections)
{
    const auto s = mini3();
    const auto& tr = mini_day();
    for (long t = 0; t < tr.minutes; t += 37) {
        std::vector<double> inj;
        for (const auto& b : tr.injections) inj.push_back(b[t]);
        auto g = dc_flow(s.network, inj);
        for (std::size_t l = 0; l < g.branch_flows.size(); ++l) EXPECT_NEAR(g.branch_flows[l], tr.branch_flows[l][t], 1e-6);
        EXPECT_NEAR(g.swing, tr.imbalance[t], 1e-6);
        EXPECT_EQ(tr.imbalance[t], tr.swing[t]);
    }
}

TEST(MiniDay, UnitsRespectLimits)
{
    const auto s = mini3();
    const auto& tr = mini_day();
    for (std::size_t k = 0; k < s.generators.size(); ++k)
        for (long t = 0; t < tr.minutes; ++t) {
            EXPECT_GE(tr.output[k][t], -1e-6);
            EXPECT_LE(tr.output[k][t], s.generators[k].p_max + 1e-6) << s.generators[k].id << " " << t;
        }
    for (long t = 0; t < tr.minutes; ++t) EXPECT_GE(tr.output[0][t], 150.0 - 1e-6); // must-run
}

TEST(Trace, RoundTripAndRewrite)
{
    const auto& tr = mini_day();
    const auto a = fs::temp_directory_path() / "epecs_trace_a", b = fs::temp_directory_path() / "epecs_trace_b";
    fs::remove_all(a);
    fs::remove_all(b);
    write_trace(a, tr);
    auto back = read_trace(a);
    EXPECT_EQ(back.scenario_hash, tr.scenario_hash);
    EXPECT_EQ(back.minutes, tr.minutes);
    EXPECT_EQ(back.generators, tr.generators);
    EXPECT_EQ(back.events.size(), tr.events.size());
    for (long t = 0; t < tr.minutes; ++t) {
        EXPECT_NEAR(back.imbalance[t], tr.imbalance[t], 1e-6);
        EXPECT_NEAR(back.output[1][t], tr.output[1][t], 1e-6);
    }
    write_trace(b, back);
    for (const auto& f : fs::directory_iterator(a))
        EXPECT_EQ(slurp(f.path()), slurp(b / f.path().filename())) << f.path().filename();
    fs::remove_all(a);
    fs::remove_all(b);
    EXPECT_THROW(read_trace(fs::temp_directory_path() / "epecs_no_such_trace"), Error);
}

TEST(Trace, SameSeedSameBytes)
{
    const auto a = fs::temp_directory_path() / "epecs_det_a", b = fs::temp_directory_path() / "epecs_det_b";
    write_trace(a, simulate(two_bus(), 1, 123));
    write_trace(b, simulate(two_bus(), 1, 123));
    std::size_t files = 0;
    for (const auto& f : fs::directory_iterator(a)) {
        EXPECT_EQ(slurp(f.path()), slurp(b / f.path().filename())) << f.path().filename();
        ++files;
    }
    EXPECT_GT(files, 3u);
    fs::remove_all(a);
    fs::remove_all(b);
}
