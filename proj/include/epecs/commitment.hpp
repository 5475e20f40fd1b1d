#pragma once

// Multi-period commitment program shared by the day-ahead (hourly) and the
// same-day (15-minute) layers. The caller decides the time grid, which
// commitments are pinned, whether storage is optimized or taken as given,
// and how many starts each unit may still make.

#include "epecs/error.hpp"
#include "epecs/lp.hpp"
#include "epecs/milp.hpp"
#include "epecs/piecewise.hpp"
#include "epecs/scenario.hpp"
#include "epecs/scenario_io.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace epecs {

using Table = std::vector<std::vector<double>>; ///< [entity][period]

struct UnitState
{
    bool online = false;
    double output = 0.0;       ///< MW
    long minutes_in_state = 0; ///< since the last start or stop
    int starts_today = 0;
};

struct StorageState
{
    double energy = 0.0; ///< MWh
    bool generating = false;
    bool pumping = false;
};

struct SystemState
{
    std::vector<UnitState> units;
    std::vector<StorageState> storage;

    static SystemState initial(const Scenario& s)
    {
        SystemState st;
        for (const auto& g : s.generators) {
            UnitState u;
            u.online = g.online || g.kind == GeneratorKind::must_run;
            u.output = u.online ? std::max(g.initial_output, g.p_min) : 0.0;
            if (g.online) u.output = g.initial_output;
            u.minutes_in_state = static_cast<long>(g.state_hours) * 60;
            st.units.push_back(u);
        }
        for (const auto& x : s.storage) st.storage.push_back({x.start_energy(), x.generating, x.pumping});
        return st;
    }
};

/// Block forecasts on the program's time grid.
struct CommitmentForecast
{
    int step_minutes = 60;
    long start_minute = 0;
    Table load; ///< [load][period] MW, before losses
    Table semi; ///< [semi][period] available MW, before tie outages

    int periods() const
    {
        if (!load.empty()) return static_cast<int>(load.front().size());
        if (!semi.empty()) return static_cast<int>(semi.front().size());
        return 0;
    }
};

struct CommitmentSpec
{
    std::string layer = "scuc";
    int periods = 24;
    std::vector<std::vector<signed char>> pin; ///< [gen][period]: -1 free, 0 or 1
    bool storage_free = true;
    Table storage_p; ///< pinned generating MW when !storage_free
    Table storage_s; ///< pinned pumping MW
    std::vector<int> startup_budget; ///< per generator; empty means u_max
    long outage_known_at = 0;        ///< outages starting later are not visible
    double mip_gap = 1e-4;
    long node_limit = 200000;
};

/// Largest visible outage fraction of a resource over [from, to).
inline double outage_fraction(const Scenario& s, const std::string& resource, long from, long to, long known_at)
{
    double f = 0.0;
    for (const auto& o : s.outages) {
        if (o.resource != resource || o.start_minute > known_at) continue;
        if (o.start_minute < to && o.start_minute + o.duration_min > from) f = std::max(f, o.fraction);
    }
    return f;
}

/// Generator-side cost model: piecewise segments at unit fuel price.
inline PiecewiseCost unit_cost_curve(const Generator& g, int segments)
{
    return linearize(g.h_q, g.h_l, g.h_f, 1.0, g.p_min, g.p_max, segments);
}

struct CommitmentModel
{
    LinearProgram lp;
    std::string layer;
    int periods = 0;
    int step_minutes = 60;
    long start_minute = 0;

    std::vector<std::vector<int>> w, u, v, p, tmsr, tmor;
    std::vector<std::vector<int>> wp, ws, sp, ss, e;
    std::vector<std::vector<int>> curt, shed, dr, sup_pos, sup_neg, flow;
    std::vector<int> c1, short_tmsr, short_tmor;
    std::vector<std::vector<int>> balance_row; ///< [bubble][period]
    std::vector<std::size_t> branches;         ///< internal branch indices
    Table pinned_p, pinned_s;                  ///< storage constants when pinned
    Table semi_available;                      ///< after tie outages
    Table load_forecast;
};

struct CommitmentSchedule
{
    std::string layer;
    int step_minutes = 60;
    long start_minute = 0;
    int periods = 0;
    SolveStatus status = SolveStatus::infeasible;
    double objective = 0.0;
    long nodes = 0;
    double balance_residual = 0.0;

    std::vector<std::string> generator_ids, storage_ids, semi_ids, load_ids, dr_ids, bubbles, branch_ids;
    Table w, u, v, p, tmsr, tmor;
    Table wp, ws, sp, ss, e;
    Table curtail, semi_available, shed, dr;
    Table sup_pos, sup_neg, flow;
    std::vector<double> c1, short_tmsr, short_tmor;

    long period_start(int t) const { return start_minute + static_cast<long>(t) * step_minutes; }
    long end_minute() const { return period_start(periods); }

    /// Period covering an absolute minute, clamped into the horizon.
    int period_at(long minute) const
    {
        if (periods == 0) return 0;
        long k = minute < start_minute ? 0 : (minute - start_minute) / step_minutes;
        return static_cast<int>(std::clamp<long>(k, 0, periods - 1));
    }

    bool covers(long minute) const { return minute >= start_minute && minute < end_minute(); }

    double total_supergen(int t) const
    {
        double s = 0.0;
        for (std::size_t b = 0; b < sup_pos.size(); ++b) s += sup_pos[b][t] + sup_neg[b][t];
        return s;
    }
};

namespace detail {

inline int periods_for(int hours, int step_minutes)
{
    return static_cast<int>((static_cast<long>(hours) * 60 + step_minutes - 1) / step_minutes);
}

inline std::string tag(const std::string& a, const std::string& b, int t)
{
    return a + "[" + b + "," + std::to_string(t) + "]";
}

} // namespace detail

inline CommitmentModel build_commitment(const Scenario& s, const CommitmentForecast& fc, const SystemState& state,
                                        const CommitmentSpec& spec)
{
    const int T = spec.periods;
    if (fc.periods() < T)
        throw ModelError(spec.layer + ": forecast covers " + std::to_string(fc.periods()) + " periods, horizon needs " +
                         std::to_string(T));
    if (fc.load.size() != s.loads.size() || fc.semi.size() != s.semis.size())
        throw ModelError(spec.layer + ": forecast does not match the scenario's loads and semi-dispatchables");
    if (state.units.size() != s.generators.size() || state.storage.size() != s.storage.size())
        throw ModelError(spec.layer + ": state does not match the scenario fleet");

    CommitmentModel m;
    m.layer = spec.layer;
    m.periods = T;
    m.step_minutes = fc.step_minutes;
    m.start_minute = fc.start_minute;
    auto& lp = m.lp;
    const double step = fc.step_minutes;   // minutes
    const double hours = step / 60.0;
    const double gamma = s.loss_fraction;
    const auto& net = s.network;
    const std::size_t NB = net.bubbles.size();
    const double penalty = s.default_supergen_price();
    auto minute_of = [&](int t) { return fc.start_minute + static_cast<long>(t) * fc.step_minutes; };
    auto bubble_of = [&](const std::string& b) { return *net.bubble_index(b); };

    // balance rows are assembled as term lists first, rows added at the end
    std::vector<std::vector<std::vector<Term>>> bal(NB, std::vector<std::vector<Term>>(T));
    std::vector<std::vector<double>> bal_rhs(NB, std::vector<double>(T, 0.0));

    // No single unit needs to carry more reserve than the largest requirement
    // it can count towards; capping at that level tightens the relaxation.
    double req_max = 0.0;
    {
        double c1_max = 0.0;
        for (const auto& g : s.generators) c1_max = std::max(c1_max, g.p_max);
        for (std::size_t i = 0; i < s.semis.size(); ++i)
            if (s.semis[i].kind == SemiKind::tie_line)
                for (double a : fc.semi[i]) c1_max = std::max(c1_max, a);
        const auto& rp = s.reserves;
        double a = std::max(rp.alpha_sys_tmsr, rp.alpha_sys_tmor) * rp.alpha_sys_tmr;
        for (const auto& b : net.bubbles) {
            const double a_r = rp.alpha_tmr.count(b) ? rp.alpha_tmr.at(b) : rp.alpha_sys_tmr;
            a = std::max({a, ReserveParams::lookup(rp.alpha_tmsr, b) * a_r, ReserveParams::lookup(rp.alpha_tmor, b) * a_r});
        }
        req_max = a * c1_max;
        if (rp.lfr_override) req_max = std::max({req_max, c1_max, *rp.lfr_override});
    }

    // --- generators
    const std::size_t NG = s.generators.size();
    m.w.assign(NG, {});
    m.u.assign(NG, {});
    m.v.assign(NG, {});
    m.p.assign(NG, {});
    m.tmsr.assign(NG, {});
    m.tmor.assign(NG, {});
    std::vector<std::vector<double>> eff_max(NG, std::vector<double>(T));
    for (std::size_t k = 0; k < NG; ++k) {
        const auto& g = s.generators[k];
        const auto& st = state.units[k];
        const auto curve = unit_cost_curve(g, s.timing.segments);
        const bool fast = g.kind == GeneratorKind::fast_start;
        const int up_periods = static_cast<int>(std::ceil(g.t_up * 60.0 / step - 1e-9));
        const int down_periods = static_cast<int>(std::ceil(g.t_down * 60.0 / step - 1e-9));

        std::vector<signed char> fixw(T, -1);
        bool pinned = false;
        for (int t = 0; t < T; ++t) {
            if (!spec.pin.empty() && spec.pin[k][t] >= 0) {
                fixw[t] = spec.pin[k][t];
                pinned = true;
            }
            if (g.kind == GeneratorKind::must_run) {
                fixw[t] = 1;
                pinned = true;
            }
        }
        if (!pinned) {
            // initial minimum up/down history
            if (st.online && st.minutes_in_state < g.t_up * 60L) {
                int keep = static_cast<int>(std::ceil((g.t_up * 60.0 - st.minutes_in_state) / step - 1e-9));
                for (int t = 0; t < std::min(keep, T); ++t) fixw[t] = 1;
            } else if (!st.online && st.minutes_in_state < g.t_down * 60L) {
                int keep = static_cast<int>(std::ceil((g.t_down * 60.0 - st.minutes_in_state) / step - 1e-9));
                for (int t = 0; t < std::min(keep, T); ++t) fixw[t] = 0;
            }
        }
        for (int t = 0; t < T; ++t) {
            double f = outage_fraction(s, g.id, minute_of(t), minute_of(t + 1), spec.outage_known_at);
            eff_max[k][t] = (1.0 - f) * g.p_max;
            // a unit that cannot reach its minimum output is forced off, whatever the pin says
            if (eff_max[k][t] < g.p_min - 1e-9 || eff_max[k][t] <= 0.0) fixw[t] = 0;
        }

        const double xi = st.online ? std::clamp(st.output, g.p_min, std::max(g.p_min, eff_max[k][0])) : 0.0;
        for (int t = 0; t < T; ++t) {
            const std::string id = g.id;
            const double price = g.fuel_price_at_hour(minute_of(t) / 60);
            int w = lp.add_binary(detail::tag("w", id, t), hours * price * curve.no_load_cost);
            if (fixw[t] >= 0) lp.fix(w, fixw[t]);
            int u = lp.add_binary(detail::tag("u", id, t), price * g.h_u);
            int v = lp.add_binary(detail::tag("v", id, t), price * g.h_d);
            int p = lp.add_variable(detail::tag("p", id, t), 0.0, std::max(0.0, eff_max[k][t]));
            m.w[k].push_back(w);
            m.u[k].push_back(u);
            m.v[k].push_back(v);
            m.p[k].push_back(p);

            // output definition through cost segments, and box limits
            if (curve.segments() > 0) {
                std::vector<Term> def{{p, 1.0}, {w, -g.p_min}};
                for (std::size_t j = 0; j < curve.segments(); ++j) {
                    int sg = lp.add_variable(detail::tag("seg" + std::to_string(j), id, t), 0.0, curve.width(j),
                                             hours * price * curve.slopes[j]);
                    def.push_back({sg, -1.0});
                }
                lp.add_constraint(detail::tag("plim_def", id, t), std::move(def), Relation::eq, 0.0);
                lp.add_constraint(detail::tag("plim_max", id, t), {{p, 1.0}, {w, -eff_max[k][t]}}, Relation::le, 0.0);
            } else {
                lp.add_constraint(detail::tag("plim_def", id, t), {{p, 1.0}, {w, -g.p_min}}, Relation::eq, 0.0);
            }

            // status logic
            std::vector<Term> link{{w, 1.0}, {u, -1.0}, {v, 1.0}};
            double link_rhs = 0.0;
            if (t == 0) link_rhs = st.online ? 1.0 : 0.0;
            else link.push_back({m.w[k][t - 1], -1.0});
            lp.add_constraint(detail::tag("bin", id, t), std::move(link), Relation::eq, link_rhs);
            lp.add_constraint(detail::tag("bin2", id, t), {{u, 1.0}, {v, 1.0}}, Relation::le, 1.0);
            // a start needs the unit on now, a stop needs it on before
            lp.add_constraint(detail::tag("bin_u", id, t), {{u, 1.0}, {w, -1.0}}, Relation::le, 0.0);
            if (t == 0) lp.add_constraint(detail::tag("bin_v", id, t), {{v, 1.0}}, Relation::le, st.online ? 1.0 : 0.0);
            else lp.add_constraint(detail::tag("bin_v", id, t), {{v, 1.0}, {m.w[k][t - 1], -1.0}}, Relation::le, 0.0);

            // ramping, relaxed on start and stop
            std::vector<Term> up{{p, 1.0}, {u, -g.p_max}}, dn{{p, 1.0}, {v, g.p_max}};
            double up_rhs = g.r_max * step, dn_rhs = g.r_min * step;
            if (t == 0) {
                up_rhs += xi;
                dn_rhs += xi;
            } else {
                up.push_back({m.p[k][t - 1], -1.0});
                dn.push_back({m.p[k][t - 1], -1.0});
            }
            lp.add_constraint(detail::tag("rlim_up", id, t), std::move(up), Relation::le, up_rhs);
            lp.add_constraint(detail::tag("rlim_dn", id, t), std::move(dn), Relation::ge, dn_rhs);

            // spinning and operating reserve capability
            const double cap10 = std::min(g.r_max * s.reserves.t10, req_max);
            const double cap30 = std::min(g.r_max * s.reserves.t30, req_max);
            int r = lp.add_variable(detail::tag("tmsr", id, t), 0.0, cap10);
            lp.add_constraint(detail::tag("tmsr_cap", id, t), {{r, 1.0}, {p, 1.0}, {w, -eff_max[k][t]}}, Relation::le,
                              0.0);
            lp.add_constraint(detail::tag("tmsr_on", id, t), {{r, 1.0}, {w, -cap10}}, Relation::le,
                              0.0);
            m.tmsr[k].push_back(r);
            if (fast) {
                int o = lp.add_variable(detail::tag("tmor", id, t), 0.0, cap30);
                lp.add_constraint(detail::tag("tmor_cap", id, t), {{o, 1.0}, {w, eff_max[k][t]}}, Relation::le,
                                  std::max(0.0, eff_max[k][t]));
                lp.add_constraint(detail::tag("tmor_off", id, t), {{o, 1.0}, {w, cap30}}, Relation::le, cap30);
                m.tmor[k].push_back(o);
            } else {
                m.tmor[k].push_back(-1);
            }
            bal[bubble_of(g.bubble)][t].push_back({p, 1.0});
        }

        if (!pinned) {
            for (int t = 0; t < T; ++t) {
                if (up_periods > 1) {
                    std::vector<Term> row{{m.w[k][t], -1.0}};
                    for (int tau = std::max(0, t - up_periods + 1); tau <= t; ++tau) row.push_back({m.u[k][tau], 1.0});
                    lp.add_constraint(detail::tag("minup", g.id, t), std::move(row), Relation::le, 0.0);
                }
                if (down_periods > 1) {
                    std::vector<Term> row{{m.w[k][t], 1.0}};
                    for (int tau = std::max(0, t - down_periods + 1); tau <= t; ++tau)
                        row.push_back({m.v[k][tau], 1.0});
                    lp.add_constraint(detail::tag("mindown", g.id, t), std::move(row), Relation::le, 1.0);
                }
            }
            int budget = spec.startup_budget.empty() ? g.u_max : spec.startup_budget[k];
            std::vector<Term> row;
            for (int t = 0; t < T; ++t)
                if (minute_of(t) < fc.start_minute + 1440) row.push_back({m.u[k][t], 1.0});
            lp.add_constraint("maxup[" + g.id + "]", std::move(row), Relation::le, std::max(0, budget));
        }
    }

    // --- storage
    const std::size_t NS = s.storage.size();
    m.wp.assign(NS, {});
    m.ws.assign(NS, {});
    m.sp.assign(NS, {});
    m.ss.assign(NS, {});
    m.e.assign(NS, {});
    m.pinned_p.assign(NS, std::vector<double>(T, 0.0));
    m.pinned_s.assign(NS, std::vector<double>(T, 0.0));
    for (std::size_t i = 0; i < NS; ++i) {
        const auto& x = s.storage[i];
        const auto& st = state.storage[i];
        const std::size_t nb = bubble_of(x.bubble);
        if (!spec.storage_free) {
            for (int t = 0; t < T; ++t) {
                double ps = spec.storage_p.empty() ? 0.0 : spec.storage_p[i][t];
                double ss = spec.storage_s.empty() ? 0.0 : spec.storage_s[i][t];
                m.pinned_p[i][t] = ps;
                m.pinned_s[i][t] = ss;
                bal_rhs[nb][t] -= ps - ss;
            }
            continue;
        }
        for (int t = 0; t < T; ++t) {
            int wp = lp.add_binary(detail::tag("wp", x.id, t));
            int ws = lp.add_binary(detail::tag("ws", x.id, t));
            int sp = lp.add_variable(detail::tag("ps", x.id, t), 0.0, x.p_max);
            int ss = lp.add_variable(detail::tag("ss", x.id, t), 0.0, x.s_max);
            int e = lp.add_variable(detail::tag("e", x.id, t), x.e_min, x.e_max);
            lp.add_constraint(detail::tag("pslim_max", x.id, t), {{sp, 1.0}, {wp, -x.p_max}}, Relation::le, 0.0);
            if (x.p_min > 0.0)
                lp.add_constraint(detail::tag("pslim_min", x.id, t), {{sp, 1.0}, {wp, -x.p_min}}, Relation::ge, 0.0);
            lp.add_constraint(detail::tag("sslim_max", x.id, t), {{ss, 1.0}, {ws, -x.s_max}}, Relation::le, 0.0);
            if (x.s_min > 0.0)
                lp.add_constraint(detail::tag("sslim_min", x.id, t), {{ss, 1.0}, {ws, -x.s_min}}, Relation::ge, 0.0);
            std::vector<Term> rec{{e, 1.0}, {ss, -x.efficiency * hours}, {sp, hours}};
            double rec_rhs = 0.0;
            if (t == 0) rec_rhs = st.energy;
            else rec.push_back({m.e[i][t - 1], -1.0});
            lp.add_constraint(detail::tag("stor", x.id, t), std::move(rec), Relation::eq, rec_rhs);
            lp.add_constraint(detail::tag("bin3", x.id, t), {{wp, 1.0}, {ws, 1.0}}, Relation::le, 1.0);
            if (t == 0) {
                if (st.pumping) lp.fix(wp, 0.0);
                if (st.generating) lp.fix(ws, 0.0);
            } else {
                lp.add_constraint(detail::tag("bin4", x.id, t), {{wp, 1.0}, {m.ws[i][t - 1], 1.0}}, Relation::le, 1.0);
                lp.add_constraint(detail::tag("bin5", x.id, t), {{m.wp[i][t - 1], 1.0}, {ws, 1.0}}, Relation::le, 1.0);
            }
            m.wp[i].push_back(wp);
            m.ws[i].push_back(ws);
            m.sp[i].push_back(sp);
            m.ss[i].push_back(ss);
            m.e[i].push_back(e);
            bal[nb][t].push_back({sp, 1.0});
            bal[nb][t].push_back({ss, -1.0});
        }
        // the horizon may not drain storage below where it started
        double target = std::min(st.energy, x.start_energy());
        lp.add_constraint("eterm[" + x.id + "]", {{m.e[i][T - 1], 1.0}}, Relation::ge, target);
    }

    // --- demand response
    m.dr.assign(s.demand_response.size(), {});
    for (std::size_t i = 0; i < s.demand_response.size(); ++i) {
        const auto& d = s.demand_response[i];
        for (int t = 0; t < T; ++t) {
            int x = lp.add_variable(detail::tag("dr", d.id, t), d.p_min, d.p_max, hours * d.cost);
            m.dr[i].push_back(x);
            bal[bubble_of(d.bubble)][t].push_back({x, 1.0});
        }
    }

    // --- loads
    m.shed.assign(s.loads.size(), {});
    m.load_forecast = fc.load;
    for (std::size_t i = 0; i < s.loads.size(); ++i) {
        const auto& l = s.loads[i];
        const std::size_t nb = bubble_of(l.bubble);
        for (int t = 0; t < T; ++t) {
            const double pl = fc.load[i][t];
            bal_rhs[nb][t] += (1.0 + gamma) * pl;
            if (l.curtailable > 0.0 && pl > 0.0) {
                int x = lp.add_variable(detail::tag("wl", l.bubble, t), 0.0, 1.0,
                                        hours * l.threshold_price * l.curtailable * pl);
                bal[nb][t].push_back({x, (1.0 + gamma) * l.curtailable * pl});
                m.shed[i].push_back(x);
            } else {
                m.shed[i].push_back(-1);
            }
        }
    }

    // --- semi-dispatchables
    m.curt.assign(s.semis.size(), {});
    m.semi_available.assign(s.semis.size(), std::vector<double>(T, 0.0));
    for (std::size_t i = 0; i < s.semis.size(); ++i) {
        const auto& sd = s.semis[i];
        const std::size_t nb = bubble_of(sd.bubble);
        const bool tie = sd.kind == SemiKind::tie_line;
        for (int t = 0; t < T; ++t) {
            double avail = fc.semi[i][t];
            if (tie) avail *= 1.0 - outage_fraction(s, sd.id, minute_of(t), minute_of(t + 1), spec.outage_known_at);
            m.semi_available[i][t] = avail;
            const double gross = tie ? 1.0 : 1.0 + gamma;
            bal_rhs[nb][t] -= gross * avail;
            lp.cost_offset += hours * sd.threshold_price * avail;
            if (sd.curtailable > 0.0 && avail > 0.0) {
                int x = lp.add_variable(detail::tag("wv", sd.id, t), 0.0, 1.0,
                                        -hours * sd.threshold_price * sd.curtailable * avail);
                bal[nb][t].push_back({x, -gross * sd.curtailable * avail});
                m.curt[i].push_back(x);
            } else {
                m.curt[i].push_back(-1);
            }
        }
    }

    // --- supergeneration
    m.sup_pos.assign(NB, {});
    m.sup_neg.assign(NB, {});
    for (std::size_t b = 0; b < NB; ++b) {
        const double price = s.supergen_price(net.bubbles[b]);
        for (int t = 0; t < T; ++t) {
            int xp = lp.add_variable(detail::tag("px", net.bubbles[b], t), 0.0, kInf, hours * price);
            int xn = lp.add_variable(detail::tag("nx", net.bubbles[b], t), 0.0, kInf, hours * price);
            m.sup_pos[b].push_back(xp);
            m.sup_neg[b].push_back(xn);
            bal[b][t].push_back({xp, 1.0});
            bal[b][t].push_back({xn, -1.0});
        }
    }

    // --- flows and interfaces
    m.branches = net.internal_branches();
    m.flow.assign(m.branches.size(), {});
    for (std::size_t l = 0; l < m.branches.size(); ++l) {
        const auto& br = net.branches[m.branches[l]];
        for (int t = 0; t < T; ++t) {
            int f = lp.add_variable(detail::tag("f", br.id(), t), -kInf, kInf);
            m.flow[l].push_back(f);
            bal[bubble_of(br.from)][t].push_back({f, -1.0});
            bal[bubble_of(br.to)][t].push_back({f, 1.0});
        }
    }
    for (const auto& itf : net.interfaces) {
        for (int t = 0; t < T; ++t) {
            std::vector<Term> row;
            for (const auto& mem : itf.members) {
                auto bi = *net.branch_index(mem.branch);
                auto it = std::find(m.branches.begin(), m.branches.end(), bi);
                if (it == m.branches.end()) continue;
                row.push_back({m.flow[static_cast<std::size_t>(it - m.branches.begin())][t], double(mem.sign)});
            }
            if (row.empty()) continue;
            lp.add_constraint(detail::tag("int_max", itf.name, t), row, Relation::le, itf.limit);
            lp.add_constraint(detail::tag("int_min", itf.name, t), row, Relation::ge, -itf.limit);
        }
    }

    m.balance_row.assign(NB, std::vector<int>(T));
    for (std::size_t b = 0; b < NB; ++b)
        for (int t = 0; t < T; ++t)
            m.balance_row[b][t] =
                lp.add_constraint(detail::tag("bal", net.bubbles[b], t), bal[b][t], Relation::eq, bal_rhs[b][t]);

    // --- largest contingency and reserve requirements
    const auto& rp = s.reserves;
    for (int t = 0; t < T; ++t) {
        int c1 = lp.add_variable("c1[" + std::to_string(t) + "]", 0.0, kInf);
        m.c1.push_back(c1);
        for (std::size_t k = 0; k < NG; ++k)
            lp.add_constraint(detail::tag("cg1", s.generators[k].id, t), {{c1, 1.0}, {m.w[k][t], -eff_max[k][t]}},
                              Relation::ge, 0.0);
        for (std::size_t i = 0; i < s.semis.size(); ++i) {
            const auto& sd = s.semis[i];
            if (sd.kind != SemiKind::tie_line) continue;
            const double avail = m.semi_available[i][t];
            std::vector<Term> row{{c1, 1.0}};
            if (m.curt[i][t] >= 0) row.push_back({m.curt[i][t], sd.curtailable * avail});
            lp.add_constraint(detail::tag("ct1", sd.id, t), std::move(row), Relation::ge, avail);
        }

        const double tmr = rp.alpha_sys_tmr;
        int sh_s = lp.add_variable("short_tmsr[" + std::to_string(t) + "]", 0.0, kInf, hours * penalty);
        int sh_o = lp.add_variable("short_tmor[" + std::to_string(t) + "]", 0.0, kInf, hours * penalty);
        m.short_tmsr.push_back(sh_s);
        m.short_tmor.push_back(sh_o);
        std::vector<Term> sys_s{{sh_s, 1.0}}, sys_o{{sh_o, 1.0}};
        for (std::size_t k = 0; k < NG; ++k) {
            sys_s.push_back({m.tmsr[k][t], 1.0});
            sys_o.push_back({m.tmsr[k][t], 1.0});
            if (m.tmor[k][t] >= 0) sys_o.push_back({m.tmor[k][t], 1.0});
        }
        {
            auto row = sys_s;
            row.push_back({c1, -rp.alpha_sys_tmsr * tmr});
            lp.add_constraint("tmsr5[" + std::to_string(t) + "]", std::move(row), Relation::ge, 0.0);
        }
        if (rp.lfr_override) {
            // the requirement is the greater of the contingency and the override
            auto row = sys_s;
            row.push_back({c1, -1.0});
            lp.add_constraint("tmsr_rec_c1[" + std::to_string(t) + "]", std::move(row), Relation::ge, 0.0);
            lp.add_constraint("tmsr_rec_lfr[" + std::to_string(t) + "]", sys_s, Relation::ge, *rp.lfr_override);
        }
        {
            auto row = sys_o;
            row.push_back({c1, -rp.alpha_sys_tmor * tmr});
            lp.add_constraint("tmor5[" + std::to_string(t) + "]", std::move(row), Relation::ge, 0.0);
        }
        for (std::size_t b = 0; b < NB; ++b) {
            const auto& name = net.bubbles[b];
            const double a_s = ReserveParams::lookup(rp.alpha_tmsr, name);
            const double a_o = ReserveParams::lookup(rp.alpha_tmor, name);
            const double a_r = rp.alpha_tmr.count(name) ? rp.alpha_tmr.at(name) : tmr;
            if (a_s <= 0.0 && a_o <= 0.0) continue;
            std::vector<Term> bs{{sh_s, 1.0}}, bo{{sh_o, 1.0}};
            for (std::size_t k = 0; k < NG; ++k) {
                if (s.generators[k].bubble != name) continue;
                bs.push_back({m.tmsr[k][t], 1.0});
                bo.push_back({m.tmsr[k][t], 1.0});
                if (m.tmor[k][t] >= 0) bo.push_back({m.tmor[k][t], 1.0});
            }
            if (a_s > 0.0) {
                bs.push_back({c1, -a_s * a_r});
                lp.add_constraint(detail::tag("tmsr4", name, t), std::move(bs), Relation::ge, 0.0);
            }
            if (a_o > 0.0) {
                bo.push_back({c1, -a_o * a_r});
                lp.add_constraint(detail::tag("tmor4", name, t), std::move(bo), Relation::ge, 0.0);
            }
        }
    }
    return m;
}

namespace detail {

/// Constraint family of a row name: the text before the first '['.
inline std::string family_of(const std::string& name)
{
    return name.substr(0, name.find('['));
}

/// Names the first constraint family whose removal makes the relaxation
/// feasible. Families are tried in the order they first appear.
inline std::string diagnose_infeasibility(const LinearProgram& lp)
{
    std::vector<std::string> families;
    for (const auto& c : lp.constraints) {
        auto f = family_of(c.name);
        if (std::find(families.begin(), families.end(), f) == families.end()) families.push_back(f);
    }
    auto relaxed = [&](const std::string& drop) {
        LinearProgram r;
        r.variables = lp.variables;
        for (auto& v : r.variables) v.binary = false;
        r.cost.assign(lp.cost.size(), 0.0);
        for (const auto& c : lp.constraints)
            if (family_of(c.name) != drop) r.constraints.push_back(c);
        return r;
    };
    if (solve_lp(relaxed("")).optimal()) return "integrality";
    for (const auto& f : families)
        if (solve_lp(relaxed(f)).optimal()) return f;
    return "bounds";
}

inline Table extract(const std::vector<std::vector<int>>& idx, const std::vector<double>& x, int T)
{
    Table out(idx.size(), std::vector<double>(T, 0.0));
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (int t = 0; t < T && t < static_cast<int>(idx[i].size()); ++t)
            if (idx[i][t] >= 0) out[i][t] = x[idx[i][t]];
    return out;
}

} // namespace detail

/// Solves a built commitment program and reads the schedule back.
inline CommitmentSchedule solve_commitment(const Scenario& s, const CommitmentModel& m, double mip_gap,
                                           long node_limit)
{
    MilpOptions opt;
    opt.rel_gap = mip_gap;
    opt.node_limit = node_limit;
    opt.branching = Branching::pseudocost;
    opt.strong_candidates = 20;
    opt.plunge = true;
    Solution sol = solve_milp(m.lp, opt);
    if (sol.status == SolveStatus::infeasible || sol.status == SolveStatus::unbounded || sol.x.empty()) {
        std::string fam = sol.status == SolveStatus::unbounded ? "objective" : detail::diagnose_infeasibility(m.lp);
        throw InfeasibleError(fam, m.layer + " starting at minute " + std::to_string(m.start_minute) + " is " +
                                       to_string(sol.status));
    }
    const int T = m.periods;
    CommitmentSchedule out;
    out.layer = m.layer;
    out.step_minutes = m.step_minutes;
    out.start_minute = m.start_minute;
    out.periods = T;
    out.status = sol.status;
    out.objective = sol.objective;
    out.nodes = sol.nodes;
    for (const auto& g : s.generators) out.generator_ids.push_back(g.id);
    for (const auto& x : s.storage) out.storage_ids.push_back(x.id);
    for (const auto& x : s.semis) out.semi_ids.push_back(x.id);
    for (const auto& l : s.loads) out.load_ids.push_back(l.bubble);
    for (const auto& d : s.demand_response) out.dr_ids.push_back(d.id);
    out.bubbles = s.network.bubbles;
    for (auto bi : m.branches) out.branch_ids.push_back(s.network.branches[bi].id());

    const auto& x = sol.x;
    out.w = detail::extract(m.w, x, T);
    out.u = detail::extract(m.u, x, T);
    out.v = detail::extract(m.v, x, T);
    for (auto* tab : {&out.w, &out.u, &out.v})
        for (auto& row : *tab)
            for (double& val : row) val = std::round(val);
    out.p = detail::extract(m.p, x, T);
    out.tmsr = detail::extract(m.tmsr, x, T);
    out.tmor = detail::extract(m.tmor, x, T);
    if (!m.sp.empty() && !m.sp.front().empty()) {
        out.wp = detail::extract(m.wp, x, T);
        out.ws = detail::extract(m.ws, x, T);
        out.sp = detail::extract(m.sp, x, T);
        out.ss = detail::extract(m.ss, x, T);
        out.e = detail::extract(m.e, x, T);
    } else {
        out.sp = m.pinned_p;
        out.ss = m.pinned_s;
        out.wp.assign(m.pinned_p.size(), std::vector<double>(T, 0.0));
        out.ws = out.wp;
        out.e = out.wp;
        for (std::size_t i = 0; i < out.sp.size(); ++i)
            for (int t = 0; t < T; ++t) {
                out.wp[i][t] = out.sp[i][t] > 0.0 ? 1.0 : 0.0;
                out.ws[i][t] = out.ss[i][t] > 0.0 ? 1.0 : 0.0;
            }
    }
    // storage pinned case leaves e at zero: energy is tracked by the caller
    for (auto& row : out.wp)
        for (double& val : row) val = std::round(val);
    for (auto& row : out.ws)
        for (double& val : row) val = std::round(val);
    out.curtail = detail::extract(m.curt, x, T);
    out.semi_available = m.semi_available;
    out.shed = detail::extract(m.shed, x, T);
    out.dr = detail::extract(m.dr, x, T);
    out.sup_pos = detail::extract(m.sup_pos, x, T);
    out.sup_neg = detail::extract(m.sup_neg, x, T);
    out.flow = detail::extract(m.flow, x, T);
    for (int t = 0; t < T; ++t) {
        out.c1.push_back(x[m.c1[t]]);
        out.short_tmsr.push_back(x[m.short_tmsr[t]]);
        out.short_tmor.push_back(x[m.short_tmor[t]]);
    }
    for (const auto& row : m.balance_row)
        for (int r : row)
            out.balance_residual =
                std::max(out.balance_residual, std::abs(m.lp.row_activity(r, x) - m.lp.constraints[r].rhs));
    return out;
}

/// Long-format export: `<index>,resource,field,value`, one row per nonzero
/// or structural quantity. `index_offset` shifts the period index.
inline void write_schedule_csv(std::ostream& os, const CommitmentSchedule& sc, const std::string& index_name,
                               long index_offset = 0, int max_periods = -1, bool header = true)
{
    if (header) os << index_name << ",resource,field,value\n";
    const int T = max_periods < 0 ? sc.periods : std::min(max_periods, sc.periods);
    auto emit = [&](const std::vector<std::string>& ids, const Table& tab, const char* field) {
        for (int t = 0; t < T; ++t)
            for (std::size_t i = 0; i < ids.size() && i < tab.size(); ++i)
                os << (index_offset + t) << ',' << ids[i] << ',' << field << ',' << format_number(tab[i][t]) << '\n';
    };
    emit(sc.generator_ids, sc.w, "w");
    emit(sc.generator_ids, sc.u, "u");
    emit(sc.generator_ids, sc.v, "v");
    emit(sc.generator_ids, sc.p, "p_mw");
    emit(sc.generator_ids, sc.tmsr, "tmsr_mw");
    {
        Table tmor = sc.tmor;
        emit(sc.generator_ids, tmor, "tmor_mw");
    }
    emit(sc.storage_ids, sc.wp, "w_p");
    emit(sc.storage_ids, sc.ws, "w_s");
    emit(sc.storage_ids, sc.sp, "p_mw");
    emit(sc.storage_ids, sc.ss, "s_mw");
    emit(sc.storage_ids, sc.e, "e_mwh");
    emit(sc.semi_ids, sc.curtail, "curtail");
    emit(sc.load_ids, sc.shed, "shed");
    emit(sc.dr_ids, sc.dr, "p_mw");
    emit(sc.bubbles, sc.sup_pos, "supergen_pos_mw");
    emit(sc.bubbles, sc.sup_neg, "supergen_neg_mw");
    emit(sc.branch_ids, sc.flow, "flow_mw");
    for (int t = 0; t < T; ++t) {
        os << (index_offset + t) << ",system,c1_mw," << format_number(sc.c1[t]) << '\n';
        os << (index_offset + t) << ",system,tmsr_short_mw," << format_number(sc.short_tmsr[t]) << '\n';
        os << (index_offset + t) << ",system,tmor_short_mw," << format_number(sc.short_tmor[t]) << '\n';
    }
}

} // namespace epecs
