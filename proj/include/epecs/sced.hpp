#pragma once

// Real-time economic dispatch: one 10-minute look-ahead period, commitment
// given, generator targets limited by ramp capability from current output.

#include "epecs/commitment.hpp"
#include "epecs/error.hpp"
#include "epecs/lp.hpp"
#include "epecs/scenario.hpp"

#include <string>
#include <vector>

namespace epecs {

struct ScedRequest
{
    long minute = 0;                 ///< run time t; targets apply at t + step
    std::vector<double> load;        ///< forecast per load, MW
    std::vector<double> semi;        ///< forecast per semi-dispatchable, MW
    std::vector<int> status;         ///< commitment at the target time, per generator
    std::vector<double> storage_net; ///< pinned generating minus pumping MW, per storage
};

struct DispatchSetpoints
{
    long minute = 0;
    SolveStatus status = SolveStatus::infeasible;
    double objective = 0.0;
    std::vector<double> p;       ///< generator targets
    std::vector<double> lower;   ///< effective bounds used for each target
    std::vector<double> upper;
    std::vector<double> dr;
    std::vector<double> curtail; ///< fraction w per semi
    std::vector<double> semi_available;
    std::vector<double> shed;    ///< fraction w per load
    std::vector<double> sup_pos, sup_neg; ///< per bubble
    std::vector<double> flow;    ///< internal branches

    double total_supergen() const
    {
        double s = 0.0;
        for (std::size_t b = 0; b < sup_pos.size(); ++b) s += sup_pos[b] + sup_neg[b];
        return s;
    }
};

/// Target window of one unit: the status box intersected with what the
/// unit can reach in one step. An empty intersection collapses onto the box
/// bound nearest the current output.
inline std::pair<double, double> sced_bounds(const Generator& g, double p0, bool online_now, bool online_next,
                                             double derate, double step)
{
    double lo = 0.0, hi = 0.0;
    const double eff_max = (1.0 - derate) * g.p_max;
    if (online_next && eff_max >= g.p_min) {
        lo = g.p_min;
        hi = eff_max;
    }
    const double start = online_next && !online_now ? g.p_max : 0.0;
    const double stop = online_now && !online_next ? g.p_max : 0.0;
    const double rlo = p0 + g.r_min * step - stop;
    const double rhi = p0 + g.r_max * step + start;
    const double a = std::max(lo, rlo), b = std::min(hi, rhi);
    if (a <= b) return {a, b};
    return std::abs(lo - p0) <= std::abs(hi - p0) ? std::pair{lo, lo} : std::pair{hi, hi};
}

inline DispatchSetpoints run_sced(const Scenario& s, const ScedRequest& rq, const SystemState& state)
{
    const auto& net = s.network;
    const std::size_t NB = net.bubbles.size();
    const double step = s.timing.sced_step_min;
    const double hours = step / 60.0;
    const double gamma = s.loss_fraction;
    const long target = rq.minute + s.timing.sced_step_min;
    if (rq.load.size() != s.loads.size() || rq.semi.size() != s.semis.size() ||
        rq.status.size() != s.generators.size() || rq.storage_net.size() != s.storage.size())
        throw ModelError("sced: request does not match the scenario");
    auto bubble_of = [&](const std::string& b) { return *net.bubble_index(b); };

    LinearProgram lp;
    std::vector<std::vector<Term>> bal(NB);
    std::vector<double> rhs(NB, 0.0);
    DispatchSetpoints out;
    out.minute = rq.minute;

    std::vector<int> pv;
    for (std::size_t k = 0; k < s.generators.size(); ++k) {
        const auto& g = s.generators[k];
        const double f = outage_fraction(s, g.id, rq.minute, target + 1, rq.minute);
        auto [lo, hi] = sced_bounds(g, state.units[k].output, state.units[k].online, rq.status[k] != 0, f, step);
        out.lower.push_back(lo);
        out.upper.push_back(hi);
        const double price = g.fuel_price_at_hour(target / 60);
        int p = lp.add_variable("p[" + g.id + "]", lo, hi);
        pv.push_back(p);
        bal[bubble_of(g.bubble)].push_back({p, 1.0});
        if (hi <= 0.0) continue;
        // online targets never fall below p_min, so output is p_min plus segments
        const auto curve = unit_cost_curve(g, s.timing.segments);
        std::vector<Term> def{{p, 1.0}};
        for (std::size_t j = 0; j < curve.segments(); ++j) {
            int sg = lp.add_variable("seg" + std::to_string(j) + "[" + g.id + "]", 0.0, curve.width(j),
                                     hours * price * curve.slopes[j]);
            def.push_back({sg, -1.0});
        }
        lp.add_constraint("pdef[" + g.id + "]", std::move(def), Relation::eq, g.p_min);
    }

    std::vector<int> drv;
    for (const auto& d : s.demand_response) {
        int x = lp.add_variable("dr[" + d.id + "]", d.p_min, d.p_max, hours * d.cost);
        drv.push_back(x);
        bal[bubble_of(d.bubble)].push_back({x, 1.0});
    }
    for (std::size_t i = 0; i < s.storage.size(); ++i) rhs[bubble_of(s.storage[i].bubble)] -= rq.storage_net[i];

    std::vector<int> shedv;
    for (std::size_t i = 0; i < s.loads.size(); ++i) {
        const auto& l = s.loads[i];
        const std::size_t nb = bubble_of(l.bubble);
        const double pl = rq.load[i];
        rhs[nb] += (1.0 + gamma) * pl;
        int x = -1;
        if (l.curtailable > 0.0 && pl > 0.0) {
            x = lp.add_variable("wl[" + l.bubble + "]", 0.0, 1.0, hours * l.threshold_price * l.curtailable * pl);
            bal[nb].push_back({x, (1.0 + gamma) * l.curtailable * pl});
        }
        shedv.push_back(x);
    }

    std::vector<int> curtv;
    for (std::size_t i = 0; i < s.semis.size(); ++i) {
        const auto& sd = s.semis[i];
        const std::size_t nb = bubble_of(sd.bubble);
        const bool tie = sd.kind == SemiKind::tie_line;
        double avail = rq.semi[i];
        if (tie) avail *= 1.0 - outage_fraction(s, sd.id, rq.minute, target + 1, rq.minute);
        out.semi_available.push_back(avail);
        const double gross = tie ? 1.0 : 1.0 + gamma;
        rhs[nb] -= gross * avail;
        lp.cost_offset += hours * sd.threshold_price * avail;
        int x = -1;
        if (sd.curtailable > 0.0 && avail > 0.0) {
            x = lp.add_variable("wv[" + sd.id + "]", 0.0, 1.0, -hours * sd.threshold_price * sd.curtailable * avail);
            bal[nb].push_back({x, -gross * sd.curtailable * avail});
        }
        curtv.push_back(x);
    }

    std::vector<int> xp, xn;
    for (std::size_t b = 0; b < NB; ++b) {
        const double price = s.supergen_price(net.bubbles[b]);
        xp.push_back(lp.add_variable("px[" + net.bubbles[b] + "]", 0.0, kInf, hours * price));
        xn.push_back(lp.add_variable("nx[" + net.bubbles[b] + "]", 0.0, kInf, hours * price));
        bal[b].push_back({xp.back(), 1.0});
        bal[b].push_back({xn.back(), -1.0});
    }

    const auto branches = net.internal_branches();
    std::vector<int> fv;
    for (auto bi : branches) {
        const auto& br = net.branches[bi];
        int f = lp.add_variable("f[" + br.id() + "]", -kInf, kInf);
        fv.push_back(f);
        bal[bubble_of(br.from)].push_back({f, -1.0});
        bal[bubble_of(br.to)].push_back({f, 1.0});
    }
    for (const auto& itf : net.interfaces) {
        std::vector<Term> row;
        for (const auto& mem : itf.members) {
            auto bi = *net.branch_index(mem.branch);
            auto it = std::find(branches.begin(), branches.end(), bi);
            if (it != branches.end()) row.push_back({fv[static_cast<std::size_t>(it - branches.begin())], double(mem.sign)});
        }
        if (row.empty()) continue;
        lp.add_constraint("int_max[" + itf.name + "]", row, Relation::le, itf.limit);
        lp.add_constraint("int_min[" + itf.name + "]", row, Relation::ge, -itf.limit);
    }
    for (std::size_t b = 0; b < NB; ++b) lp.add_constraint("bal[" + net.bubbles[b] + "]", bal[b], Relation::eq, rhs[b]);

    Solution sol = solve_lp(lp);
    if (!sol.optimal())
        throw InfeasibleError(sol.status == SolveStatus::unbounded ? "objective" : detail::diagnose_infeasibility(lp),
                              "sced at minute " + std::to_string(rq.minute) + " is " + to_string(sol.status));
    out.status = sol.status;
    out.objective = sol.objective;
    auto val = [&](int j) { return j < 0 ? 0.0 : sol.x[j]; };
    for (int j : pv) out.p.push_back(val(j));
    for (int j : drv) out.dr.push_back(val(j));
    for (int j : curtv) out.curtail.push_back(val(j));
    for (int j : shedv) out.shed.push_back(val(j));
    for (std::size_t b = 0; b < NB; ++b) {
        out.sup_pos.push_back(val(xp[b]));
        out.sup_neg.push_back(val(xn[b]));
    }
    for (int j : fv) out.flow.push_back(val(j));
    return out;
}

} // namespace epecs
