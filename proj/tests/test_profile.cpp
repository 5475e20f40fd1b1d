#include "epecs/forecast.hpp"
#include "epecs/mini.hpp"
#include "epecs/profile.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace epecs;
using std::numbers::pi;

namespace {

Profile sinusoid(std::size_t n, double period, double amp = 0.5)
{
    Profile p(n);
    for (std::size_t t = 0; t < n; ++t) p[t] = 1.0 + amp * std::sin(2.0 * pi * static_cast<double>(t) / period);
    return p;
}

// Oracle: max |ramp| of block means computed directly from the definition.
double max_abs_block_ramp(const Profile& p, std::size_t block)
{
    const std::size_t n = p.size() / block;
    double prev = 0.0, best = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < block; ++j) s += p[k * block + j];
        s /= static_cast<double>(block);
        if (k > 0) best = std::max(best, std::abs(s - prev) / static_cast<double>(block));
        prev = s;
    }
    return best;
}

Profile random_profile(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Profile p(n);
    double level = 1000.0 * U(rng), drift = 0.0;
    const int kind = static_cast<int>(rng() % 3);
    for (std::size_t t = 0; t < n; ++t) {
        if (kind == 0) {
            level += (U(rng) - 0.5) * 20.0; // random walk
        } else if (kind == 1) {
            if (t % 37 == 0) drift = (U(rng) - 0.5) * 8.0; // piecewise linear
            level += drift;
        } else {
            level = 500.0 + 300.0 * std::sin(t / 90.0) + 50.0 * (U(rng) - 0.5); // noisy wave
        }
        p[t] = level;
    }
    return p;
}

} // namespace

TEST(ScaleVer, ConstantBase)
{
    VerSpec v;
    v.capacity_factor = 0.3;
    v.penetration = 0.4;
    auto out = scale_ver(Profile(100, 1.0), v, 10000.0);
    for (double x : out) EXPECT_NEAR(x, 1200.0, 1e-9);
    v.penetration = 0.0;
    for (double x : scale_ver(Profile(100, 1.0), v, 10000.0)) EXPECT_EQ(x, 0.0);
}

TEST(ScaleVer, Errors)
{
    VerSpec v;
    EXPECT_THROW(scale_ver(Profile{}, v, 1.0), Error);
    v.variability = 0.01;
    EXPECT_THROW(scale_ver(Profile(10, 1.0), v, 1.0), Error); // constant base cannot be scaled
    EXPECT_THROW(scale_ver(Profile(10, 2.0), VerSpec{}, 1.0), Error); // mean must be 1
}

TEST(ScaleVer, MeanPreservedOverAWeek)
{
    Profile base = unit_shape("wind", 10080, 5);
    VerSpec v;
    v.capacity_factor = 0.35;
    v.penetration = 0.2;
    v.variability = 2.0 * variability(base);
    auto out = scale_ver(base, v, 5000.0);
    EXPECT_NEAR(mean(out), 0.35 * 0.2 * 5000.0, 0.005 * 0.35 * 0.2 * 5000.0);
}

TEST(ScaleVer, DoubledVariability)
{
    Profile base = sinusoid(10080, 1440.0);
    VerSpec v;
    v.capacity_factor = 0.3;
    v.penetration = 0.5;
    const double a0 = variability(base);
    v.variability = 2.0 * a0;
    auto out = scale_ver(base, v, 1000.0);
    Profile ref = base;
    for (double& x : ref) x *= 0.3 * 0.5 * 1000.0;
    EXPECT_NEAR(variability(out) / variability(ref), 2.0, 0.02);
}

TEST(Variability, Examples)
{
    EXPECT_EQ(variability(Profile(10, 7.0)), 0.0);
    EXPECT_NEAR(variability(Profile{0.0, 10.0}), std::sqrt(2.0), 1e-12);
    const double w = 0.01;
    Profile s(20000);
    for (std::size_t t = 0; t < s.size(); ++t) s[t] = std::sin(w * static_cast<double>(t));
    EXPECT_NEAR(variability(s), w, 0.02 * w);
    EXPECT_THROW(variability(Profile(5, 0.0)), UndefinedVariability);
    EXPECT_THROW(variability(Profile{1.0}), Error);
}

// Scaling time by alpha scales variability by alpha on smooth periodic profiles.
TEST(Variability, TemporalScalingLaw)
{
    for (double period : {720.0, 1440.0, 2880.0})
        for (double alpha : {0.5, 1.5, 2.0, 3.0}) {
            Profile base = sinusoid(40320, period, 0.3); // whole periods before and after scaling
            double ratio = variability(time_scale(base, alpha)) / variability(base);
            EXPECT_NEAR(ratio, alpha, 0.01 * alpha) << period << " " << alpha;
        }
}

TEST(BestForecast, Examples)
{
    auto c = best_forecast(Profile(120, 500.0), 60);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c.values[0], 500.0);
    Profile lin(60);
    for (int i = 0; i < 60; ++i) lin[i] = i;
    EXPECT_DOUBLE_EQ(best_forecast(lin, 60).values[0], 29.5);
    EXPECT_THROW(best_forecast(lin, 0), Error);
    EXPECT_THROW(best_forecast(lin, 7), Error);
}

TEST(BestForecast, UnitBlockIsIdentity)
{
    std::mt19937_64 rng(3);
    Profile p = random_profile(rng, 300);
    EXPECT_EQ(best_forecast(p, 1).values, p);
}

TEST(BestForecast, AtMinuteLooksUpBlocks)
{
    auto f = best_forecast(Profile{1, 1, 2, 2, 3, 3}, 2, 100);
    EXPECT_EQ(f.at_minute(100), 1.0);
    EXPECT_EQ(f.at_minute(103), 2.0);
    EXPECT_EQ(f.at_minute(50), 1.0);  // before: first block
    EXPECT_EQ(f.at_minute(500), 3.0); // after: last block
    EXPECT_EQ(f.end(), 106);
}

TEST(SynthesizeError, ZeroAndDeterminism)
{
    for (double e : synthesize_error(1, 0.0, 0.4, 10000.0, 50, ErrorKind::day_ahead)) EXPECT_EQ(e, 0.0);
    auto a = synthesize_error(77, 0.12, 0.4, 10000.0, 500, ErrorKind::short_term);
    auto b = synthesize_error(77, 0.12, 0.4, 10000.0, 500, ErrorKind::short_term);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, synthesize_error(78, 0.12, 0.4, 10000.0, 500, ErrorKind::short_term));
}

TEST(SynthesizeError, CalibratedStdAndPersistence)
{
    for (auto kind : {ErrorKind::day_ahead, ErrorKind::short_term})
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            auto e = synthesize_error(seed, 0.12, 0.4, 10000.0, 10000, kind);
            EXPECT_NEAR(stddev(e), 480.0, 0.05 * 480.0);
            EXPECT_NEAR(mean(e), 0.0, 0.05 * 480.0);
            // lag-1 autocorrelation oracle
            double m = mean(e), num = 0.0, den = 0.0;
            for (std::size_t k = 0; k < e.size(); ++k) {
                den += (e[k] - m) * (e[k] - m);
                if (k > 0) num += (e[k] - m) * (e[k - 1] - m);
            }
            EXPECT_NEAR(num / den, ar1_coefficient(kind), 0.05);
        }
}

TEST(MakeForecast, Examples)
{
    Profile flat(60, 100.0);
    auto f0 = make_forecast(flat, {0.0}, 60);
    EXPECT_EQ(f0.values[0], 100.0);
    EXPECT_EQ(make_forecast(flat, {30.0}, 60).values[0], 70.0);
    auto low = make_forecast(Profile(60, 10.0), {30.0}, 60, 200.0);
    EXPECT_EQ(low.values[0], 0.0);
    EXPECT_EQ(low.clamped, 1u);
    auto high = make_forecast(Profile(60, 190.0), {-30.0}, 60, 200.0);
    EXPECT_EQ(high.values[0], 200.0);
    EXPECT_THROW(make_forecast(flat, {1.0, 2.0}, 60), Error);
}

// Long-run std of (best - forecast) / capacity approaches eps when no clamp binds.
TEST(MakeForecast, ErrorCalibration)
{
    const double cap = 4000.0, eps = 0.07;
    Profile actual(600000, 2000.0);
    auto err = synthesize_error(11, eps, 0.4, 10000.0, actual.size() / 60, ErrorKind::day_ahead);
    auto f = make_forecast(actual, err, 60, cap);
    auto best = best_forecast(actual, 60);
    std::vector<double> rel;
    for (std::size_t k = 0; k < f.size(); ++k) rel.push_back((best.values[k] - f.values[k]) / cap);
    EXPECT_EQ(f.clamped, 0u);
    EXPECT_NEAR(stddev(rel), eps, 0.05 * eps);
}

TEST(NetLoad, Examples)
{
    EXPECT_EQ(net_load({10000.0}, {{4000.0}})[0], 6000.0);
    EXPECT_EQ(net_load({7142.0}, {{13101.0}})[0], -5959.0);
    Profile load{1.0, 2.0, 3.0};
    EXPECT_EQ(net_load(load, {}), load);
    EXPECT_THROW(net_load(load, {{1.0}}), Error);
    EXPECT_EQ(net_load(load, {{1.0, 1.0, 1.0}, {0.5, 0.5, 0.5}}), (Profile{-0.5, 0.5, 1.5}));
}

TEST(RampStats, Examples)
{
    auto r = ramp_stats({0.0, 10.0, 20.0}, RampResolution::min1);
    EXPECT_EQ(r.max_up, 10.0);
    EXPECT_EQ(r.max_down, 0.0);
    Profile mono(241);
    for (int i = 0; i <= 240; ++i) mono[i] = i;
    EXPECT_DOUBLE_EQ(ramp_stats(mono, RampResolution::hour4).max_up, 1.0);
    Profile fall(mono.rbegin(), mono.rend());
    auto f4 = ramp_stats(fall, RampResolution::hour4);
    EXPECT_DOUBLE_EQ(f4.max_down, 1.0);
    EXPECT_EQ(f4.max_up, 0.0);
    EXPECT_THROW(ramp_stats({1.0}, RampResolution::min1), Error);
    EXPECT_THROW(ramp_stats(Profile(100, 1.0), RampResolution::hour1), Error);
    EXPECT_THROW(ramp_stats(Profile(200, 1.0), RampResolution::hour4), Error);
}

TEST(RampStats, BlockRampsMatchOracle)
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        Profile p = random_profile(rng, 1440);
        for (auto [res, block] : {std::pair{RampResolution::min10, 10u}, std::pair{RampResolution::hour1, 60u}}) {
            auto r = ramp_stats(p, res);
            EXPECT_NEAR(std::max(r.max_up, r.max_down), max_abs_block_ramp(p, block), 1e-9);
        }
    }
}

// Coarser resolutions never report a larger ramp than finer ones.
TEST(RampStats, ResolutionOrdering)
{
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 40; ++trial) {
        Profile p = random_profile(rng, 600 + rng() % 3000);
        auto mag = [&](RampResolution r) {
            auto s = ramp_stats(p, r);
            return std::max(s.max_up, s.max_down);
        };
        const double m1 = mag(RampResolution::min1), m10 = mag(RampResolution::min10), h1 = mag(RampResolution::hour1);
        EXPECT_LE(h1, m10 + 1e-9);
        EXPECT_LE(m10, m1 + 1e-9);
    }
}

TEST(Shapes, UnitMeanAndDeterminism)
{
    for (const char* name : {"flat", "daily", "solar", "wind", "hydro"}) {
        auto p = unit_shape(name, 2880, 4);
        EXPECT_NEAR(mean(p), 1.0, 1e-9) << name;
        EXPECT_EQ(p, unit_shape(name, 2880, 4));
        for (double x : p) EXPECT_GE(x, 0.0);
    }
    EXPECT_THROW(unit_shape("tidal", 10), ReferenceError);
    auto sol = unit_shape("solar", 1440);
    EXPECT_EQ(sol[60 * 3], 0.0);
    EXPECT_GT(sol[60 * 12], sol[60 * 8]);
}

TEST(Forecasts, ZeroErrorEqualsBestForecast)
{
    auto s = mini3();
    auto fb = build_forecasts(s, 2880);
    auto best = best_forecast(fb.semi_actual[0], 60);
    ASSERT_EQ(fb.semi_da[0].values.size(), best.values.size());
    for (std::size_t k = 0; k < best.size(); ++k) EXPECT_NEAR(fb.semi_da[0].values[k], best.values[k], 1e-9);
    // capacity is penetration times system peak
    EXPECT_NEAR(fb.semi_capacity[0], 0.3 * fb.peak_load, 1e-9);
    EXPECT_NEAR(mean(fb.semi_actual[0]), 0.45 * 0.3 * fb.peak_load, 1e-6 * fb.peak_load);
}

TEST(Forecasts, SeedsAreIndependentPerLayer)
{
    auto s = mini3();
    s.semis[0].ver->error_da = 0.12;
    s.semis[0].ver->error_st = 0.03;
    auto a = build_forecasts(s, 1440), b = build_forecasts(s, 1440);
    EXPECT_EQ(a.semi_da[0].values, b.semi_da[0].values);
    s.seed = 43;
    auto c = build_forecasts(s, 1440);
    EXPECT_NE(a.semi_da[0].values, c.semi_da[0].values);
}
