#pragma once

// Same-day commitment of fast-start units on a 15-minute grid. Slow units
// keep the day-ahead commitment and storage keeps its day-ahead schedule;
// past the day-ahead horizon both hold their last hour.

#include "epecs/commitment.hpp"
#include "epecs/scuc.hpp"

namespace epecs {

using FastStartSchedule = CommitmentSchedule;

/// `future_starts` counts starts a previous run already planned past this
/// run's window (per generator; empty means none).
inline CommitmentSpec rtuc_spec(const Scenario& s, const DayAheadSchedule& da, const SystemState& state, long minute,
                                const std::vector<int>& future_starts = {})
{
    const auto& tm = s.timing;
    CommitmentSpec spec;
    spec.layer = "rtuc";
    spec.periods = tm.rtuc_intervals;
    spec.storage_free = false;
    spec.outage_known_at = minute;
    spec.mip_gap = tm.mip_gap;
    spec.node_limit = tm.node_limit;
    const int T = spec.periods;
    spec.pin.assign(s.generators.size(), std::vector<signed char>(T, -1));
    for (std::size_t k = 0; k < s.generators.size(); ++k) {
        const auto& g = s.generators[k];
        if (g.kind == GeneratorKind::fast_start) {
            int m = future_starts.empty() ? 0 : future_starts[k];
            spec.startup_budget.push_back(std::max(0, g.u_max - state.units[k].starts_today - m));
            continue;
        }
        spec.startup_budget.push_back(g.u_max);
        for (int t = 0; t < T; ++t) {
            // past the day-ahead horizon the last hour persists
            long at = minute + static_cast<long>(t) * tm.rtuc_step_min;
            spec.pin[k][t] = static_cast<signed char>(da.w[k][da.period_at(at)] > 0.5 ? 1 : 0);
        }
    }
    spec.storage_p.assign(s.storage.size(), std::vector<double>(T, 0.0));
    spec.storage_s.assign(s.storage.size(), std::vector<double>(T, 0.0));
    for (std::size_t i = 0; i < s.storage.size(); ++i)
        for (int t = 0; t < T; ++t) {
            long at = minute + static_cast<long>(t) * tm.rtuc_step_min;
            spec.storage_p[i][t] = da.sp[i][da.period_at(at)];
            spec.storage_s[i][t] = da.ss[i][da.period_at(at)];
        }
    return spec;
}

inline CommitmentModel build_rtuc(const Scenario& s, const DayAheadSchedule& da, const CommitmentForecast& st,
                                  const SystemState& state, long minute, const std::vector<int>& future_starts = {})
{
    if (st.step_minutes != s.timing.rtuc_step_min)
        throw ModelError("rtuc: forecast step " + std::to_string(st.step_minutes) + " min, expected " +
                         std::to_string(s.timing.rtuc_step_min));
    if (st.start_minute != minute) throw ModelError("rtuc: forecast does not start at the run minute");
    return build_commitment(s, st, state, rtuc_spec(s, da, state, minute, future_starts));
}

inline FastStartSchedule run_rtuc(const Scenario& s, const DayAheadSchedule& da, const CommitmentForecast& st,
                                  const SystemState& state, long minute, const std::vector<int>& future_starts = {})
{
    return solve_commitment(s, build_rtuc(s, da, st, state, minute, future_starts), s.timing.mip_gap,
                            s.timing.node_limit);
}

} // namespace epecs
