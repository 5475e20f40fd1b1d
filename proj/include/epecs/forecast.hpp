#pragma once

// Actual minute profiles and the three forecast streams (day-ahead hourly,
// short-term 15-minute, real-time 10-minute) for every load and
// semi-dispatchable resource over a simulation horizon.

#include "epecs/commitment.hpp"
#include "epecs/profile.hpp"
#include "epecs/scenario.hpp"

#include <cstdint>
#include <vector>

namespace epecs {

enum class ForecastLayer : std::uint64_t { day_ahead = 1, short_term = 2, real_time = 3 };

struct ForecastBook
{
    long minutes = 0;   ///< horizon covered by actuals and forecasts
    double peak_load = 0.0;
    std::vector<Profile> load_actual; ///< [load][minute]
    std::vector<Profile> semi_actual; ///< [semi][minute]
    std::vector<double> semi_capacity;
    std::vector<ForecastSeries> load_da, load_st, load_rt;
    std::vector<ForecastSeries> semi_da, semi_st, semi_rt;

    /// Real-time blocks are centred on the SCED target: [t+5, t+15).
    static constexpr long rt_offset = 5;

    CommitmentForecast day_ahead(long start, int periods) const { return window(load_da, semi_da, start, periods); }
    CommitmentForecast short_term(long start, int periods) const { return window(load_st, semi_st, start, periods); }

    /// Real-time forecast for the SCED run at `minute`.
    std::vector<double> load_rt_at(long minute) const { return pick(load_rt, minute + rt_offset); }
    std::vector<double> semi_rt_at(long minute) const { return pick(semi_rt, minute + rt_offset); }

private:
    static CommitmentForecast window(const std::vector<ForecastSeries>& load, const std::vector<ForecastSeries>& semi,
                                     long start, int periods)
    {
        CommitmentForecast f;
        f.start_minute = start;
        f.step_minutes = load.empty() ? (semi.empty() ? 60 : semi.front().block_minutes) : load.front().block_minutes;
        auto slice = [&](const ForecastSeries& s) {
            std::vector<double> v(periods);
            for (int t = 0; t < periods; ++t) v[t] = s.at_minute(start + static_cast<long>(t) * s.block_minutes);
            return v;
        };
        for (const auto& s : load) f.load.push_back(slice(s));
        for (const auto& s : semi) f.semi.push_back(slice(s));
        return f;
    }

    static std::vector<double> pick(const std::vector<ForecastSeries>& series, long minute)
    {
        std::vector<double> v;
        for (const auto& s : series) v.push_back(s.at_minute(minute));
        return v;
    }
};

namespace detail {

inline ForecastSeries forecast_stream(const Profile& actual, int block, long offset, double eps, double pi,
                                      double peak, double capacity, std::uint64_t seed, ErrorKind kind)
{
    const std::size_t nb = (actual.size() - static_cast<std::size_t>(offset)) / static_cast<std::size_t>(block);
    Profile window(actual.begin() + offset, actual.begin() + offset + static_cast<long>(nb) * block);
    auto err = synthesize_error(seed, eps, pi, peak, nb, kind);
    return make_forecast(window, err, block, capacity, offset);
}

} // namespace detail

/// Builds actuals and forecasts for `minutes` minutes (a multiple of 60).
inline ForecastBook build_forecasts(const Scenario& s, long minutes)
{
    if (minutes <= 0 || minutes % 60 != 0) throw ModelError("forecast horizon must be a positive number of hours");
    ForecastBook b;
    b.minutes = minutes;
    const auto n = static_cast<std::size_t>(minutes);
    for (const auto& l : s.loads) b.load_actual.push_back(resolve_load_profile(s, l, n));
    b.peak_load = system_peak_load(s, b.load_actual);
    const int da = s.timing.scuc_step_min, st = s.timing.rtuc_step_min, rt = s.timing.sced_step_min;
    const auto layer = [](ForecastLayer l) { return static_cast<std::uint64_t>(l); };

    for (std::size_t i = 0; i < s.loads.size(); ++i) {
        const auto& l = s.loads[i];
        const auto& a = b.load_actual[i];
        const double own_peak = a.empty() ? 0.0 : *std::max_element(a.begin(), a.end());
        const std::uint64_t id = seed_of("load:" + l.bubble);
        b.load_da.push_back(detail::forecast_stream(a, da, 0, l.error_da, 1.0, own_peak, kInf,
                                                    derive_seed(s.seed, id, layer(ForecastLayer::day_ahead)),
                                                    ErrorKind::day_ahead));
        b.load_st.push_back(detail::forecast_stream(a, st, 0, l.error_st, 1.0, own_peak, kInf,
                                                    derive_seed(s.seed, id, layer(ForecastLayer::short_term)),
                                                    ErrorKind::short_term));
        b.load_rt.push_back(detail::forecast_stream(a, rt, ForecastBook::rt_offset, l.error_rt, 1.0, own_peak, kInf,
                                                    derive_seed(s.seed, id, layer(ForecastLayer::real_time)),
                                                    ErrorKind::short_term));
    }
    for (const auto& sd : s.semis) {
        Profile a = resolve_semi_profile(s, sd, n, b.peak_load);
        double cap = 0.0, eps_da = 0.0, eps_st = 0.0, pi = 0.0;
        std::uint64_t base_seed = derive_seed(s.seed, seed_of("semi:" + sd.id));
        if (sd.ver) {
            cap = ver_capacity(*sd.ver, b.peak_load);
            eps_da = sd.ver->error_da;
            eps_st = sd.ver->error_st;
            pi = sd.ver->penetration;
            base_seed = derive_seed(sd.ver->seed, s.seed);
        } else {
            cap = a.empty() ? 0.0 : *std::max_element(a.begin(), a.end());
        }
        b.semi_capacity.push_back(cap);
        b.semi_da.push_back(detail::forecast_stream(a, da, 0, eps_da, pi, b.peak_load, cap,
                                                    derive_seed(base_seed, layer(ForecastLayer::day_ahead)),
                                                    ErrorKind::day_ahead));
        b.semi_st.push_back(detail::forecast_stream(a, st, 0, eps_st, pi, b.peak_load, cap,
                                                    derive_seed(base_seed, layer(ForecastLayer::short_term)),
                                                    ErrorKind::short_term));
        b.semi_rt.push_back(detail::forecast_stream(a, rt, ForecastBook::rt_offset, eps_st, pi, b.peak_load, cap,
                                                    derive_seed(base_seed, layer(ForecastLayer::real_time)),
                                                    ErrorKind::short_term));
        b.semi_actual.push_back(std::move(a));
    }
    return b;
}

} // namespace epecs
