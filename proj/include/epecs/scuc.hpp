#pragma once

// Day-ahead security-constrained unit commitment: hourly commitment and
// dispatch of the whole fleet, storage schedules and reserve procurement.

#include "epecs/commitment.hpp"

namespace epecs {

using DayAheadSchedule = CommitmentSchedule;

inline CommitmentSpec scuc_spec(const Scenario& s, const SystemState& state, long day_start)
{
    CommitmentSpec spec;
    spec.layer = "scuc";
    spec.periods = detail::periods_for(s.timing.scuc_horizon_h, s.timing.scuc_step_min);
    spec.storage_free = true;
    spec.outage_known_at = day_start;
    spec.mip_gap = s.timing.mip_gap;
    spec.node_limit = s.timing.node_limit;
    for (std::size_t k = 0; k < s.generators.size(); ++k)
        spec.startup_budget.push_back(std::max(0, s.generators[k].u_max - state.units[k].starts_today));
    return spec;
}

inline CommitmentModel build_scuc(const Scenario& s, const CommitmentForecast& da, const SystemState& state,
                                  long day_start)
{
    if (da.step_minutes != s.timing.scuc_step_min)
        throw ModelError("scuc: forecast step " + std::to_string(da.step_minutes) + " min, expected " +
                         std::to_string(s.timing.scuc_step_min));
    if (da.start_minute != day_start) throw ModelError("scuc: forecast does not start at the commitment day");
    return build_commitment(s, da, state, scuc_spec(s, state, day_start));
}

inline DayAheadSchedule run_scuc(const Scenario& s, const CommitmentForecast& da, const SystemState& state,
                                 long day_start)
{
    return solve_commitment(s, build_scuc(s, da, state, day_start), s.timing.mip_gap, s.timing.node_limit);
}

} // namespace epecs
