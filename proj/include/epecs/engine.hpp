#pragma once

// The control cascade on a one-minute clock: daily SCUC, hourly RTUC (plus
// emergency runs on outages), 10-minute SCED, and every minute the
// interpolated dispatch, actual load and VER output, regulation and DC flow.

#include "epecs/commitment.hpp"
#include "epecs/error.hpp"
#include "epecs/forecast.hpp"
#include "epecs/grid.hpp"
#include "epecs/rtuc.hpp"
#include "epecs/scenario.hpp"
#include "epecs/scenario_io.hpp"
#include "epecs/scuc.hpp"
#include "epecs/sced.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace epecs {

#ifdef EPECS_VERSION
inline constexpr const char* kVersion = EPECS_VERSION;
#else
inline constexpr const char* kVersion = "0.1.0";
#endif

struct LayerEvent
{
    long minute = 0;
    std::string layer;  ///< scuc, rtuc or sced
    std::string detail; ///< "", "emergency" or "resync" for RTUC
    std::string status;
    double objective = 0.0;
    long nodes = 0;
};

struct SimulationTrace
{
    std::string scenario_name;
    std::string scenario_hash;
    std::uint64_t seed = 0;
    int days = 0;
    long minutes = 0;
    double mustrun_min = 0.0; ///< sum of must-run minimum outputs, MW

    std::vector<std::string> generators, semis, storage, bubbles, branches, interfaces;
    std::vector<double> interface_limits;

    // system series, one value per minute
    std::vector<double> imbalance, regulation, reg_saturation;
    std::vector<double> lfr_up, lfr_down, rampr_up, rampr_down;
    std::vector<double> supergen, load, swing;

    // per entity, [entity][minute]
    Table output, reg_level;      ///< generators; output includes regulation
    Table semi_available, curtailed;
    Table storage_power, storage_energy; ///< power: generating minus pumping
    Table injections, branch_flows, interface_flows;

    std::vector<LayerEvent> events;

    double total_curtailment(long t) const
    {
        double c = 0.0;
        for (const auto& v : curtailed) c += v[t];
        return c;
    }
    double total_available(long t) const
    {
        double a = 0.0;
        for (const auto& v : semi_available) a += v[t];
        return a;
    }
};

/// Largest fraction of a resource out of service at one minute.
inline double active_outage(const Scenario& s, const std::string& resource, long minute)
{
    return outage_fraction(s, resource, minute, minute + 1, minute);
}

/// Applies the immediate effect of an outage to the running state: the
/// unit's output drops to its derated maximum, a full trip takes it offline.
inline SystemState apply_outage(const Scenario& s, const OutageEvent& ev, SystemState state)
{
    if (s.find_semi(ev.resource)) return state; // tie-line: masked where availability is computed
    const auto* g = s.find_generator(ev.resource);
    if (!g) throw ReferenceError(ev.resource, "outage " + ev.id);
    const auto k = static_cast<std::size_t>(g - s.generators.data());
    auto& u = state.units[k];
    const double cap = (1.0 - ev.fraction) * g->p_max;
    if (cap < g->p_min || ev.fraction >= 1.0) {
        if (u.online) u.minutes_in_state = 0;
        u.online = false;
        u.output = 0.0;
    } else {
        u.output = std::min(u.output, cap);
    }
    return state;
}

namespace detail {

template <class F>
auto with_context(long minute, const std::string& layer, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const InfeasibleError& e) {
        std::string msg = e.what();
        auto cut = msg.find(" (first violated family");
        if (cut != std::string::npos) msg.resize(cut);
        throw InfeasibleError(e.family(), "minute " + std::to_string(minute) + ", " + layer + ": " + msg);
    } catch (const SolverFault& e) {
        throw SolverFault("minute " + std::to_string(minute) + ", " + layer + ": " + e.what());
    }
}

} // namespace detail

/// Runs the cascade for `days` days. `seed` replaces the scenario master seed.
inline SimulationTrace simulate(const Scenario& scenario, int days, std::uint64_t seed)
{
    if (days < 1) throw ModelError("simulation span must be at least one day");
    Scenario s = scenario;
    s.seed = seed;
    if (auto rep = validate_scenario(s); !rep.clean()) throw ModelError("scenario is invalid:\n" + rep.render());
    for (const auto& o : s.outages)
        if (!s.find_generator(o.resource) && !s.find_semi(o.resource)) throw ReferenceError(o.resource, "outage " + o.id);

    const auto& tm = s.timing;
    const auto& net = s.network;
    const long horizon = static_cast<long>(days) * 1440;
    // one extra day so look-ahead windows near the end have forecasts
    const ForecastBook fb = build_forecasts(s, horizon + 1440);
    const DcFlow grid(net);

    const std::size_t NG = s.generators.size(), NS = s.semis.size(), NE = s.storage.size(), NB = net.bubbles.size();
    const std::size_t NL = s.loads.size(), ND = s.demand_response.size();

    SimulationTrace tr;
    tr.scenario_name = s.name;
    tr.scenario_hash = scenario_hash(scenario);
    tr.seed = seed;
    tr.days = days;
    tr.minutes = horizon;
    for (const auto& g : s.generators) {
        tr.generators.push_back(g.id);
        if (g.kind == GeneratorKind::must_run) tr.mustrun_min += g.p_min;
    }
    for (const auto& x : s.semis) tr.semis.push_back(x.id);
    for (const auto& x : s.storage) tr.storage.push_back(x.id);
    tr.bubbles = net.bubbles;
    for (const auto& b : net.branches) tr.branches.push_back(b.id());
    for (const auto& i : net.interfaces) {
        tr.interfaces.push_back(i.name);
        tr.interface_limits.push_back(i.limit);
    }
    const auto H = static_cast<std::size_t>(horizon);
    auto series = [&](std::size_t n) { return Table(n, std::vector<double>(H, 0.0)); };
    for (auto* v : {&tr.imbalance, &tr.regulation, &tr.reg_saturation, &tr.lfr_up, &tr.lfr_down, &tr.rampr_up,
                    &tr.rampr_down, &tr.supergen, &tr.load, &tr.swing})
        v->assign(H, 0.0);
    tr.output = series(NG);
    tr.reg_level = series(NG);
    tr.semi_available = series(NS);
    tr.curtailed = series(NS);
    tr.storage_power = series(NE);
    tr.storage_energy = series(NE);
    tr.injections = series(NB);
    tr.branch_flows = series(net.branches.size());
    tr.interface_flows = series(net.interfaces.size());

    SystemState state = SystemState::initial(s);
    RegulationState reg;
    reg.level.assign(NG, 0.0);
    std::optional<DayAheadSchedule> da;
    std::optional<FastStartSchedule> rt;
    std::optional<DispatchSetpoints> sced;
    long sced_minute = 0;
    std::vector<double> p0(NG, 0.0), dr0(ND, 0.0), dr_now(ND, 0.0);
    std::vector<double> net0(NE, 0.0), net_now(NE, 0.0), net_target(NE, 0.0);
    for (std::size_t i = 0; i < NE; ++i)
        net_now[i] = s.storage[i].generating ? s.storage[i].p_min : (s.storage[i].pumping ? -s.storage[i].s_min : 0.0);
    long resync_at = -1;

    std::vector<std::size_t> gen_bubble, semi_bubble, store_bubble, load_bubble, dr_bubble;
    for (const auto& g : s.generators) gen_bubble.push_back(*net.bubble_index(g.bubble));
    for (const auto& x : s.semis) semi_bubble.push_back(*net.bubble_index(x.bubble));
    for (const auto& x : s.storage) store_bubble.push_back(*net.bubble_index(x.bubble));
    for (const auto& x : s.loads) load_bubble.push_back(*net.bubble_index(x.bubble));
    for (const auto& x : s.demand_response) dr_bubble.push_back(*net.bubble_index(x.bubble));

    auto run_rt = [&](long t, const std::string& detail) {
        rt = detail::with_context(t, "rtuc", [&] {
            return run_rtuc(s, *da, fb.short_term(t, tm.rtuc_intervals), state, t);
        });
        tr.events.push_back({t, "rtuc", detail, to_string(rt->status), rt->objective, rt->nodes});
    };

    for (long t = 0; t < horizon; ++t) {
        // --- optimizer layers
        if (t % 1440 == 0) {
            for (auto& u : state.units) u.starts_today = 0;
            da = detail::with_context(t, "scuc", [&] {
                return run_scuc(s, fb.day_ahead(t, detail::periods_for(tm.scuc_horizon_h, tm.scuc_step_min)), state, t);
            });
            tr.events.push_back({t, "scuc", "", to_string(da->status), da->objective, da->nodes});
        }
        bool emergency = false;
        for (const auto& o : s.outages)
            if (o.start_minute == t) {
                state = apply_outage(s, o, state);
                emergency = true;
            }
        if (emergency) {
            run_rt(t, "emergency");
            if (t % 15 != 0) resync_at = (t / 15 + 1) * 15;
        } else if (t % tm.rtuc_period_min == 0) {
            run_rt(t, "");
        } else if (t == resync_at) {
            run_rt(t, "resync");
        }
        if (t % tm.sced_step_min == 0) {
            const long target = t + tm.sced_step_min;
            ScedRequest rq;
            rq.minute = t;
            rq.load = fb.load_rt_at(t);
            rq.semi = fb.semi_rt_at(t);
            const int kt = rt->period_at(target);
            for (std::size_t k = 0; k < NG; ++k) rq.status.push_back(rt->w[k][kt] > 0.5 ? 1 : 0);
            for (std::size_t i = 0; i < NE; ++i) rq.storage_net.push_back(rt->sp[i][kt] - rt->ss[i][kt]);
            sced = detail::with_context(t, "sced", [&] { return run_sced(s, rq, state); });
            tr.events.push_back({t, "sced", "", to_string(sced->status), sced->objective, 0});
            sced_minute = t;
            for (std::size_t k = 0; k < NG; ++k) p0[k] = state.units[k].output;
            dr0 = dr_now;
            net0 = net_now;
            net_target = rq.storage_net;
        }

        // --- physics for minute t
        const double frac = static_cast<double>(t - sced_minute + 1) / tm.sced_step_min;
        const int kr = rt->period_at(t);
        std::vector<double> inj(NB, 0.0), base(NG), derate(NG);
        std::vector<bool> online(NG), participating(NG);
        std::vector<double> reg_cap(NG);
        for (std::size_t k = 0; k < NG; ++k) {
            const auto& g = s.generators[k];
            derate[k] = active_outage(s, g.id, t);
            online[k] = rt->w[k][kr] > 0.5 && (1.0 - derate[k]) * g.p_max >= g.p_min && derate[k] < 1.0;
            double b = p0[k] + (sced->p[k] - p0[k]) * frac;
            b = std::clamp(b, 0.0, (1.0 - derate[k]) * g.p_max);
            base[k] = b;
            participating[k] = online[k] && derate[k] == 0.0 && g.regulation_capacity > 0.0;
            reg_cap[k] = g.regulation_capacity;
        }
        for (std::size_t j = 0; j < ND; ++j) {
            dr_now[j] = dr0[j] + (sced->dr[j] - dr0[j]) * frac;
            inj[dr_bubble[j]] += dr_now[j];
        }
        const double gamma = s.loss_fraction;
        double total_load = 0.0;
        for (std::size_t l = 0; l < NL; ++l) {
            const double shed = sced->shed[l] * s.loads[l].curtailable;
            const double served = (1.0 - shed) * fb.load_actual[l][static_cast<std::size_t>(t)];
            total_load += served;
            inj[load_bubble[l]] -= (1.0 + gamma) * served;
        }
        tr.load[t] = total_load;
        for (std::size_t i = 0; i < NS; ++i) {
            const auto& sd = s.semis[i];
            const bool tie = sd.kind == SemiKind::tie_line;
            double a = fb.semi_actual[i][static_cast<std::size_t>(t)];
            if (tie) a *= 1.0 - active_outage(s, sd.id, t);
            double delivered = a;
            const double w = sced->curtail[i];
            if (w > 0.0) delivered = std::min(a, (1.0 - sd.curtailable * w) * sced->semi_available[i]);
            delivered = std::max(0.0, delivered);
            tr.semi_available[i][t] = a;
            tr.curtailed[i][t] = a - delivered;
            inj[semi_bubble[i]] += (tie ? 1.0 : 1.0 + gamma) * delivered;
        }
        for (std::size_t i = 0; i < NE; ++i) {
            const auto& x = s.storage[i];
            auto& st = state.storage[i];
            // storage follows its schedule on the same trajectory as the units
            const double net_p = net0[i] + (net_target[i] - net0[i]) * frac;
            double gen = std::max(0.0, net_p), pump = std::max(0.0, -net_p);
            // the reservoir limits what the schedule can actually do
            gen = std::min(gen, std::max(0.0, (st.energy - x.e_min) * 60.0));
            pump = std::min(pump, std::max(0.0, (x.e_max - st.energy) * 60.0 / x.efficiency));
            st.energy += (x.efficiency * pump - gen) / 60.0;
            st.generating = gen > 0.0;
            st.pumping = pump > 0.0;
            net_now[i] = gen - pump;
            tr.storage_power[i][t] = gen - pump;
            tr.storage_energy[i][t] = st.energy;
            inj[store_bubble[i]] += gen - pump;
        }
        for (std::size_t k = 0; k < NG; ++k) inj[gen_bubble[k]] += base[k] + reg.level[k];

        configure_regulation(reg, reg_cap, participating, s.reserves.regulation_requirement);
        reg.up_room.assign(NG, 0.0);
        reg.down_room.assign(NG, 0.0);
        for (std::size_t k = 0; k < NG; ++k) {
            const auto& g = s.generators[k];
            reg.up_room[k] = (1.0 - derate[k]) * g.p_max - base[k];
            reg.down_room[k] = base[k] - g.p_min;
        }
        double pre = 0.0;
        for (double v : inj) pre += v;
        auto rr = regulation_step(pre, reg);
        for (std::size_t k = 0; k < NG; ++k) inj[gen_bubble[k]] += rr.state.level[k] - reg.level[k];
        reg = rr.state;
        const GridState gs = grid.solve(inj);

        std::vector<double> prev(NG);
        for (std::size_t k = 0; k < NG; ++k) prev[k] = state.units[k].output;
        const auto rs = actual_reserves(s.generators, online, base, prev, derate);
        tr.imbalance[t] = gs.swing;
        tr.regulation[t] = reg.total();
        tr.reg_saturation[t] = reg.total_saturation();
        tr.lfr_up[t] = rs.lfr_up;
        tr.lfr_down[t] = rs.lfr_down;
        tr.rampr_up[t] = rs.rampr_up;
        tr.rampr_down[t] = rs.rampr_down;
        tr.supergen[t] = sced->total_supergen();
        tr.swing[t] = gs.swing;
        for (std::size_t k = 0; k < NG; ++k) {
            tr.output[k][t] = base[k] + reg.level[k];
            tr.reg_level[k][t] = reg.level[k];
        }
        for (std::size_t b = 0; b < NB; ++b) tr.injections[b][t] = gs.injections[b];
        for (std::size_t b = 0; b < gs.branch_flows.size(); ++b) tr.branch_flows[b][t] = gs.branch_flows[b];
        for (std::size_t b = 0; b < gs.interface_flows.size(); ++b) tr.interface_flows[b][t] = gs.interface_flows[b];

        // --- state at the end of minute t
        for (std::size_t k = 0; k < NG; ++k) {
            auto& u = state.units[k];
            if (online[k] != u.online) {
                if (online[k]) ++u.starts_today;
                u.online = online[k];
                u.minutes_in_state = 1;
            } else {
                ++u.minutes_in_state;
            }
            u.output = base[k];
        }
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Persistence: a directory of wide CSVs (minute rows) plus a manifest.

namespace detail {

inline void write_wide(const std::filesystem::path& file, const std::vector<std::string>& names, const Table& cols,
                       long minutes)
{
    std::ofstream os(file, std::ios::binary);
    if (!os) throw Error("cannot write " + file.string());
    os << "minute";
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    for (long t = 0; t < minutes; ++t) {
        os << t;
        for (const auto& c : cols) os << ',' << format_fixed(c[static_cast<std::size_t>(t)]);
        os << '\n';
    }
}

inline std::vector<std::string> read_wide(const std::filesystem::path& file, Table& cols, long& minutes)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot read " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(0, file.string() + ": empty file");
    auto head = split(line, ',');
    if (head.empty() || head[0] != "minute") throw ParseError(1, file.string() + ": missing minute column");
    std::vector<std::string> names(head.begin() + 1, head.end());
    cols.assign(names.size(), {});
    std::size_t ln = 1;
    long t = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (trim(line).empty()) continue;
        auto f = split(line, ',');
        if (f.size() != head.size()) throw ParseError(ln, file.string() + ": wrong number of fields");
        if (parse_integer(f[0], ln) != t) throw ParseError(ln, file.string() + ": minutes are not contiguous");
        for (std::size_t j = 0; j < names.size(); ++j) cols[j].push_back(parse_number(f[j + 1], ln));
        ++t;
    }
    minutes = t;
    return names;
}

inline const std::vector<std::string>& system_columns()
{
    static const std::vector<std::string> c{"imbalance", "regulation", "reg_saturation", "lfr_up", "lfr_down",
                                            "rampr_up",  "rampr_down", "supergen",       "load",   "swing"};
    return c;
}

inline std::vector<std::vector<double>*> system_series(SimulationTrace& t)
{
    return {&t.imbalance, &t.regulation, &t.reg_saturation, &t.lfr_up, &t.lfr_down,
            &t.rampr_up,  &t.rampr_down, &t.supergen,       &t.load,   &t.swing};
}

} // namespace detail

inline void write_manifest(std::ostream& os, const SimulationTrace& tr)
{
    os << "epecs_version = " << kVersion << '\n';
    os << "scenario = " << tr.scenario_name << '\n';
    os << "scenario_hash = " << tr.scenario_hash << '\n';
    os << "seed = " << tr.seed << '\n';
    os << "days = " << tr.days << '\n';
    os << "minutes = " << tr.minutes << '\n';
    os << "mustrun_min = " << format_number(tr.mustrun_min) << '\n';
    for (std::size_t i = 0; i < tr.interfaces.size(); ++i)
        os << "interface_limit." << tr.interfaces[i] << " = " << format_number(tr.interface_limits[i]) << '\n';
}

inline void write_trace(const std::filesystem::path& dir, const SimulationTrace& tr)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "manifest.txt", std::ios::binary);
        if (!os) throw Error("cannot write " + (dir / "manifest.txt").string());
        write_manifest(os, tr);
    }
    auto& mut = const_cast<SimulationTrace&>(tr);
    Table sys;
    for (auto* v : detail::system_series(mut)) sys.push_back(*v);
    detail::write_wide(dir / "system.csv", detail::system_columns(), sys, tr.minutes);
    detail::write_wide(dir / "generators.csv", tr.generators, tr.output, tr.minutes);
    detail::write_wide(dir / "regulation.csv", tr.generators, tr.reg_level, tr.minutes);
    detail::write_wide(dir / "semi_available.csv", tr.semis, tr.semi_available, tr.minutes);
    detail::write_wide(dir / "curtailment.csv", tr.semis, tr.curtailed, tr.minutes);
    detail::write_wide(dir / "storage_power.csv", tr.storage, tr.storage_power, tr.minutes);
    detail::write_wide(dir / "storage_energy.csv", tr.storage, tr.storage_energy, tr.minutes);
    detail::write_wide(dir / "injections.csv", tr.bubbles, tr.injections, tr.minutes);
    detail::write_wide(dir / "branch_flows.csv", tr.branches, tr.branch_flows, tr.minutes);
    detail::write_wide(dir / "interface_flows.csv", tr.interfaces, tr.interface_flows, tr.minutes);
    std::ofstream ev(dir / "events.csv", std::ios::binary);
    if (!ev) throw Error("cannot write " + (dir / "events.csv").string());
    ev << "minute,layer,detail,status,objective,nodes\n";
    for (const auto& e : tr.events)
        ev << e.minute << ',' << e.layer << ',' << e.detail << ',' << e.status << ',' << format_fixed(e.objective)
           << ',' << e.nodes << '\n';
}

inline SimulationTrace read_trace(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error("trace directory not found: " + dir.string());
    SimulationTrace tr;
    std::map<std::string, double> limits;
    {
        std::ifstream in(dir / "manifest.txt");
        if (!in) throw Error("cannot read " + (dir / "manifest.txt").string());
        std::string line;
        std::size_t ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key(trim(std::string_view(line).substr(0, eq)));
            std::string val(trim(std::string_view(line).substr(eq + 1)));
            if (key == "scenario") tr.scenario_name = val;
            else if (key == "scenario_hash") tr.scenario_hash = val;
            else if (key == "seed") tr.seed = static_cast<std::uint64_t>(std::stoull(val));
            else if (key == "days") tr.days = static_cast<int>(parse_integer(val, ln));
            else if (key == "mustrun_min") tr.mustrun_min = parse_number(val, ln);
            else if (key.rfind("interface_limit.", 0) == 0) limits[key.substr(16)] = parse_number(val, ln);
        }
    }
    long n = 0, m = 0;
    Table sys;
    auto cols = detail::read_wide(dir / "system.csv", sys, n);
    auto series = detail::system_series(tr);
    for (std::size_t j = 0; j < detail::system_columns().size(); ++j) {
        auto it = std::find(cols.begin(), cols.end(), detail::system_columns()[j]);
        if (it == cols.end()) throw ParseError(0, "system.csv: missing column " + detail::system_columns()[j]);
        *series[j] = sys[static_cast<std::size_t>(it - cols.begin())];
    }
    tr.minutes = n;
    auto load = [&](const char* file, Table& into) {
        auto names = detail::read_wide(dir / file, into, m);
        if (m != n) throw ParseError(0, std::string(file) + ": minute count differs from system.csv");
        return names;
    };
    tr.generators = load("generators.csv", tr.output);
    load("regulation.csv", tr.reg_level);
    tr.semis = load("semi_available.csv", tr.semi_available);
    load("curtailment.csv", tr.curtailed);
    tr.storage = load("storage_power.csv", tr.storage_power);
    load("storage_energy.csv", tr.storage_energy);
    tr.bubbles = load("injections.csv", tr.injections);
    tr.branches = load("branch_flows.csv", tr.branch_flows);
    tr.interfaces = load("interface_flows.csv", tr.interface_flows);
    for (const auto& i : tr.interfaces) {
        auto it = limits.find(i);
        if (it == limits.end()) throw ParseError(0, "manifest.txt: no limit for interface " + i);
        tr.interface_limits.push_back(it->second);
    }
    std::ifstream ev(dir / "events.csv");
    if (!ev) throw Error("cannot read " + (dir / "events.csv").string());
    std::string line;
    std::getline(ev, line);
    std::size_t ln = 1;
    while (std::getline(ev, line)) {
        ++ln;
        if (trim(line).empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 6) throw ParseError(ln, "events.csv: expected 6 fields");
        tr.events.push_back({parse_integer(f[0], ln), f[1], f[2], f[3], parse_number(f[4], ln), parse_integer(f[5], ln)});
    }
    return tr;
}

} // namespace epecs
