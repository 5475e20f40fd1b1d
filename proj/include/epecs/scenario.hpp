#pragma once

// Scenario data model: zonal network, resource fleets, reserve parameters,
// layer timing and outage events. Values are plain aggregates so scenarios
// can be compared member-wise after a serialize/parse round trip.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace epecs {

enum class GeneratorKind { dispatchable, must_run, fast_start };
enum class SemiKind { wind, solar, hydro, tie_line };

inline const char* to_string(GeneratorKind k)
{
    switch (k) {
    case GeneratorKind::dispatchable: return "dispatchable";
    case GeneratorKind::must_run: return "must-run";
    case GeneratorKind::fast_start: return "fast-start";
    }
    return "?";
}

inline const char* to_string(SemiKind k)
{
    switch (k) {
    case SemiKind::wind: return "wind";
    case SemiKind::solar: return "solar";
    case SemiKind::hydro: return "run-of-river-hydro";
    case SemiKind::tie_line: return "tie-line";
    }
    return "?";
}

struct Branch
{
    std::string from;
    std::string to;
    double weight = 1.0; ///< susceptance weight, per unit

    std::string id() const { return from + "-" + to; }
    bool operator==(const Branch&) const = default;
};

struct InterfaceMember
{
    std::string branch; ///< branch id "<from>-<to>"
    int sign = 1;
    bool operator==(const InterfaceMember&) const = default;
};

struct Interface
{
    std::string name;
    std::vector<InterfaceMember> members;
    double limit = 0.0; ///< MW, applied to both flow directions
    bool operator==(const Interface&) const = default;
};

struct ZonalNetwork
{
    std::vector<std::string> bubbles;
    std::vector<Branch> branches; ///< includes swing attachment branches
    std::vector<Interface> interfaces;
    std::string swing;            ///< external swing bubble, not in `bubbles`

    bool operator==(const ZonalNetwork&) const = default;

    std::optional<std::size_t> bubble_index(const std::string& name) const
    {
        auto it = std::find(bubbles.begin(), bubbles.end(), name);
        if (it == bubbles.end()) return std::nullopt;
        return static_cast<std::size_t>(it - bubbles.begin());
    }

    bool is_attachment(const Branch& b) const
    {
        return b.from == swing || b.to == swing;
    }

    std::optional<std::size_t> branch_index(const std::string& id) const
    {
        for (std::size_t i = 0; i < branches.size(); ++i)
            if (branches[i].id() == id) return i;
        return std::nullopt;
    }

    /// Branches between two bubbles; swing attachments are excluded.
    std::vector<std::size_t> internal_branches() const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < branches.size(); ++i)
            if (!is_attachment(branches[i])) out.push_back(i);
        return out;
    }
};

struct Generator
{
    std::string id;
    std::string bubble;
    GeneratorKind kind = GeneratorKind::dispatchable;
    double p_min = 0.0;  ///< MW
    double p_max = 0.0;  ///< MW
    double r_min = 0.0;  ///< MW/min, <= 0
    double r_max = 0.0;  ///< MW/min, >= 0
    double h_f = 0.0;    ///< MBtu/h while online
    double h_l = 0.0;    ///< MBtu/MWh
    double h_q = 0.0;    ///< MBtu/MW^2h
    double h_u = 0.0;    ///< MBtu per start
    double h_d = 0.0;    ///< MBtu per stop
    std::vector<double> fuel_price{1.0}; ///< $/MBtu per hour of day, wraps
    int t_up = 1;        ///< hours
    int t_down = 1;      ///< hours
    int u_max = 24;      ///< starts per day
    double regulation_capacity = 0.0; ///< MW under AGC
    bool online = false;
    double initial_output = 0.0;      ///< MW
    int state_hours = 0;              ///< hours spent in the initial state

    bool operator==(const Generator&) const = default;

    double fuel_price_at_hour(long hour) const
    {
        if (fuel_price.empty()) return 0.0;
        const auto n = static_cast<long>(fuel_price.size());
        return fuel_price[static_cast<std::size_t>(((hour % n) + n) % n)];
    }

    /// Marginal cost at full output, $/MWh, for the given fuel price.
    double marginal_cost_at_max(double price) const
    {
        return price * (h_l + 2.0 * h_q * p_max);
    }
};

struct Storage
{
    std::string id;
    std::string bubble;
    double p_min = 0.0; ///< generating MW
    double p_max = 0.0;
    double s_min = 0.0; ///< pumping MW
    double s_max = 0.0;
    double e_min = 0.0; ///< MWh
    double e_max = 0.0;
    double efficiency = 1.0;
    std::optional<double> initial_energy; ///< defaults to mid-range
    bool generating = false;
    bool pumping = false;

    bool operator==(const Storage&) const = default;

    double start_energy() const
    {
        return initial_energy ? *initial_energy : 0.5 * (e_min + e_max);
    }
};

struct VerSpec
{
    double penetration = 0.0;     ///< installed capacity / system peak load
    double capacity_factor = 0.3; ///< mean output / installed capacity
    double variability = 0.0;     ///< target A in 1/min; 0 keeps the base shape
    double error_da = 0.0;        ///< day-ahead error std, fraction of capacity
    double error_st = 0.0;        ///< short-term error std, fraction of capacity
    std::string shape = "flat";
    std::uint64_t seed = 1;

    bool operator==(const VerSpec&) const = default;
};

/// Where a minute-resolution series comes from: a CSV file, a built-in
/// shape scaled by `scale_mw`, or a constant.
struct ProfileRef
{
    std::string file;
    std::string shape;
    double scale_mw = 0.0;

    bool operator==(const ProfileRef&) const = default;
};

struct SemiDispatchable
{
    std::string id;
    std::string bubble;
    SemiKind kind = SemiKind::wind;
    double curtailable = 1.0;        ///< d in [0,1]
    double threshold_price = -5.0;   ///< $/MWh
    std::optional<VerSpec> ver;      ///< VER model; otherwise `fixed` is used
    ProfileRef fixed;

    bool operator==(const SemiDispatchable&) const = default;
};

struct DemandResponse
{
    std::string id;
    std::string bubble;
    double p_min = 0.0;
    double p_max = 0.0;
    double cost = 0.0; ///< $/MWh

    bool operator==(const DemandResponse&) const = default;
};

struct LoadSpec
{
    std::string bubble;
    ProfileRef profile;
    double curtailable = 0.0;        ///< d_L
    double threshold_price = 1000.0; ///< C_L, $/MWh
    double error_da = 0.0165;        ///< fractions of this load's peak
    double error_st = 0.015;
    double error_rt = 0.0015;

    bool operator==(const LoadSpec&) const = default;
};

struct ReserveParams
{
    std::map<std::string, double> alpha_tmsr; ///< per bubble, default 0
    std::map<std::string, double> alpha_tmr;
    std::map<std::string, double> alpha_tmor;
    double alpha_sys_tmsr = 1.0;
    double alpha_sys_tmr = 1.0;
    double alpha_sys_tmor = 2.0;
    double t10 = 10.0; ///< minutes
    double t30 = 30.0;
    double regulation_requirement = 0.0; ///< MW; 0 means "sum of capacities"
    std::optional<double> lfr_override;  ///< MW

    bool operator==(const ReserveParams&) const = default;

    static double lookup(const std::map<std::string, double>& m, const std::string& bubble)
    {
        auto it = m.find(bubble);
        return it == m.end() ? 0.0 : it->second;
    }
};

struct Timing
{
    int scuc_horizon_h = 24;
    int scuc_step_min = 60;
    int rtuc_step_min = 15;
    int rtuc_intervals = 16;
    int rtuc_period_min = 60;
    int sced_step_min = 10;
    int reg_step_min = 1;
    int segments = 3;         ///< piecewise segments per quadratic cost
    double mip_gap = 1e-4;    ///< relative gap for SCUC/RTUC
    long node_limit = 200000;

    bool operator==(const Timing&) const = default;
};

struct OutageEvent
{
    std::string id;
    std::string resource;
    long start_minute = 0;
    long duration_min = 0;
    double fraction = 1.0;

    bool operator==(const OutageEvent&) const = default;
};

struct Scenario
{
    std::string name = "scenario";
    ZonalNetwork network;
    std::vector<Generator> generators;
    std::vector<Storage> storage;
    std::vector<SemiDispatchable> semis;
    std::vector<DemandResponse> demand_response;
    std::vector<LoadSpec> loads;
    std::map<std::string, double> super_price; ///< $/MWh per bubble
    double loss_fraction = 0.03;
    std::optional<double> peak_load;
    ReserveParams reserves;
    Timing timing;
    std::vector<OutageEvent> outages;
    std::uint64_t seed = 1;
    std::filesystem::path base_dir; ///< resolves relative profile files

    bool operator==(const Scenario&) const = default;

    const Generator* find_generator(const std::string& id) const
    {
        for (const auto& g : generators)
            if (g.id == id) return &g;
        return nullptr;
    }

    const SemiDispatchable* find_semi(const std::string& id) const
    {
        for (const auto& s : semis)
            if (s.id == id) return &s;
        return nullptr;
    }

    /// Penalty price of the supergenerator in a bubble. Defaults to ten
    /// times the most expensive generator's marginal cost at full output.
    double supergen_price(const std::string& bubble) const
    {
        if (auto it = super_price.find(bubble); it != super_price.end())
            return it->second;
        return default_supergen_price();
    }

    double default_supergen_price() const
    {
        double worst = 0.0;
        for (const auto& g : generators)
            for (double price : g.fuel_price)
                worst = std::max(worst, g.marginal_cost_at_max(price));
        return worst > 0.0 ? 10.0 * worst : 1000.0;
    }
};

// ---------------------------------------------------------------------------
// Validation

struct Violation
{
    std::string severity; ///< "error" or "warning"
    std::string entity;
    std::string message;

    bool operator==(const Violation&) const = default;
};

struct ValidationReport
{
    std::vector<Violation> violations;

    bool clean() const
    {
        return std::none_of(violations.begin(), violations.end(),
                            [](const Violation& v) { return v.severity == "error"; });
    }
    bool empty() const { return violations.empty(); }
    std::size_t size() const { return violations.size(); }

    std::string render() const
    {
        std::ostringstream os;
        for (const auto& v : violations)
            os << v.severity << '\t' << v.entity << '\t' << v.message << '\n';
        return os.str();
    }
};

namespace detail {

inline bool divides(int a, int b) { return a > 0 && b > 0 && b % a == 0; }

inline bool network_connected(const ZonalNetwork& net)
{
    std::vector<std::string> nodes = net.bubbles;
    if (!net.swing.empty()) nodes.push_back(net.swing);
    if (nodes.empty()) return false;
    auto index = [&](const std::string& n) -> int {
        auto it = std::find(nodes.begin(), nodes.end(), n);
        return it == nodes.end() ? -1 : static_cast<int>(it - nodes.begin());
    };
    std::vector<std::vector<int>> adj(nodes.size());
    for (const auto& b : net.branches) {
        int a = index(b.from), c = index(b.to);
        if (a < 0 || c < 0) continue;
        adj[a].push_back(c);
        adj[c].push_back(a);
    }
    std::vector<char> seen(nodes.size(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int w : adj[v])
            if (!seen[w]) {
                seen[w] = 1;
                q.push(w);
            }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

} // namespace detail

/// Checks every type invariant of a scenario. Pure: violations are data.
inline ValidationReport validate_scenario(const Scenario& s)
{
    ValidationReport rep;
    auto error = [&](const std::string& entity, const std::string& msg) {
        rep.violations.push_back({"error", entity, msg});
    };
    const auto& net = s.network;
    auto has_bubble = [&](const std::string& b) { return net.bubble_index(b).has_value(); };

    // network
    if (net.bubbles.empty()) error("network", "no bubbles declared");
    if (net.swing.empty()) error("network", "no swing bubble designated");
    else if (has_bubble(net.swing))
        error(net.swing, "swing bubble must be external, not a declared bubble");
    std::set<std::string> ids;
    for (const auto& b : net.bubbles)
        if (!ids.insert(b).second) error(b, "duplicate bubble");
    std::set<std::string> branch_ids;
    std::size_t attachments = 0;
    for (const auto& b : net.branches) {
        if (!branch_ids.insert(b.id()).second) error(b.id(), "duplicate branch");
        for (const auto& end : {b.from, b.to})
            if (end != net.swing && !has_bubble(end))
                error(b.id(), "branch endpoint " + end + " does not exist");
        if (b.from == b.to) error(b.id(), "branch connects a bubble to itself");
        if (!(b.weight > 0.0)) error(b.id(), "susceptance weight must be positive");
        if (net.is_attachment(b)) ++attachments;
    }
    if (!net.swing.empty() && attachments == 0)
        error(net.swing, "swing bubble has no attachment branches");
    if (!net.bubbles.empty() && !detail::network_connected(net))
        error("network", "network graph is not connected");
    for (const auto& itf : net.interfaces) {
        if (!(itf.limit > 0.0)) error(itf.name, "interface limit must be positive");
        if (itf.members.empty()) error(itf.name, "interface has no member branches");
        for (const auto& m : itf.members) {
            auto bi = net.branch_index(m.branch);
            if (!bi) error(itf.name, "member branch " + m.branch + " does not exist");
            else if (net.is_attachment(net.branches[*bi]))
                error(itf.name, "member branch " + m.branch + " is a swing attachment");
            if (m.sign != 1 && m.sign != -1) error(itf.name, "member sign must be +1 or -1");
        }
    }

    std::set<std::string> resource_ids;
    auto unique = [&](const std::string& id) {
        if (!resource_ids.insert(id).second) error(id, "duplicate resource id");
    };
    auto located = [&](const std::string& id, const std::string& bubble) {
        if (!has_bubble(bubble)) error(id, "bubble " + bubble + " does not exist");
    };

    for (const auto& g : s.generators) {
        unique(g.id);
        located(g.id, g.bubble);
        if (g.p_min > g.p_max) error(g.id, "p_min exceeds p_max");
        if (g.p_min < 0.0) error(g.id, "p_min is negative");
        if (g.r_min > 0.0 || g.r_max < 0.0) error(g.id, "ramp limits must satisfy r_min <= 0 <= r_max");
        if (g.t_up < 1 || g.t_down < 1) error(g.id, "minimum up/down times must be >= 1 h");
        if (g.u_max < 0) error(g.id, "u_max must be >= 0");
        if (g.h_q < 0.0) error(g.id, "quadratic heat rate must be >= 0");
        if (g.fuel_price.empty()) error(g.id, "fuel price series is empty");
        if (g.p_min <= g.p_max &&
            (g.regulation_capacity < 0.0 || g.regulation_capacity > g.p_max - g.p_min + 1e-9))
            error(g.id, "regulation capacity must lie in [0, p_max - p_min]");
        if (g.kind == GeneratorKind::must_run && !g.online)
            error(g.id, "must-run unit must start online");
        if (g.online && (g.initial_output < g.p_min - 1e-9 || g.initial_output > g.p_max + 1e-9))
            error(g.id, "initial output outside [p_min, p_max] while online");
        if (!g.online && g.initial_output != 0.0)
            error(g.id, "offline unit must have zero initial output");
        if (g.state_hours < 0) error(g.id, "state_hours must be >= 0");
    }
    for (const auto& st : s.storage) {
        unique(st.id);
        located(st.id, st.bubble);
        if (st.e_min > st.e_max) error(st.id, "e_min exceeds e_max");
        double e0 = st.start_energy();
        if (e0 < st.e_min - 1e-9 || e0 > st.e_max + 1e-9)
            error(st.id, "initial energy outside [e_min, e_max]");
        if (st.generating && st.pumping) error(st.id, "initial mode flags both set");
        if (!(st.efficiency > 0.0 && st.efficiency <= 1.0))
            error(st.id, "efficiency must lie in (0, 1]");
        if (st.p_min > st.p_max || st.s_min > st.s_max)
            error(st.id, "storage power bounds inverted");
    }
    for (const auto& sd : s.semis) {
        unique(sd.id);
        located(sd.id, sd.bubble);
        if (sd.curtailable < 0.0 || sd.curtailable > 1.0)
            error(sd.id, "curtailable fraction must lie in [0, 1]");
        if (sd.ver) {
            const auto& v = *sd.ver;
            if (v.penetration < 0.0) error(sd.id, "penetration must be >= 0");
            if (!(v.capacity_factor > 0.0 && v.capacity_factor <= 1.0))
                error(sd.id, "capacity factor must lie in (0, 1]");
            if (v.error_da < 0.0 || v.error_st < 0.0) error(sd.id, "forecast errors must be >= 0");
            if (v.variability < 0.0) error(sd.id, "variability must be >= 0");
        } else if (sd.fixed.file.empty() && sd.fixed.shape.empty() && sd.fixed.scale_mw < 0.0) {
            error(sd.id, "constant profile must be >= 0");
        }
    }
    for (const auto& dr : s.demand_response) {
        unique(dr.id);
        located(dr.id, dr.bubble);
        if (dr.p_min > dr.p_max) error(dr.id, "p_min exceeds p_max");
    }
    std::set<std::string> load_bubbles;
    for (const auto& l : s.loads) {
        located("load " + l.bubble, l.bubble);
        if (!load_bubbles.insert(l.bubble).second) error("load " + l.bubble, "duplicate load");
        if (l.curtailable < 0.0 || l.curtailable > 1.0)
            error("load " + l.bubble, "curtailable fraction must lie in [0, 1]");
        if (l.error_da < 0.0 || l.error_st < 0.0 || l.error_rt < 0.0)
            error("load " + l.bubble, "forecast errors must be >= 0");
    }
    for (const auto& [b, price] : s.super_price) {
        if (!has_bubble(b)) error(b, "supergenerator price for unknown bubble");
        if (!(price > 0.0)) error(b, "supergenerator price must be positive");
    }
    if (s.loss_fraction < 0.0) error("network", "loss fraction must be >= 0");

    const auto& r = s.reserves;
    auto nonneg_map = [&](const std::map<std::string, double>& m, const char* what) {
        for (const auto& [b, a] : m) {
            if (a < 0.0) error(b, std::string(what) + " must be >= 0");
            if (!has_bubble(b)) error(b, std::string(what) + " given for unknown bubble");
        }
    };
    nonneg_map(r.alpha_tmsr, "alpha_tmsr");
    nonneg_map(r.alpha_tmr, "alpha_tmr");
    nonneg_map(r.alpha_tmor, "alpha_tmor");
    if (r.alpha_sys_tmsr < 0.0 || r.alpha_sys_tmr < 0.0 || r.alpha_sys_tmor < 0.0)
        error("reserves", "system alphas must be >= 0");
    if (!(r.t10 > 0.0) || !(r.t30 > 0.0)) error("reserves", "t10/t30 must be positive");
    if (r.regulation_requirement < 0.0) error("reserves", "regulation requirement must be >= 0");
    if (r.lfr_override && *r.lfr_override < 0.0) error("reserves", "lfr override must be >= 0");

    const auto& t = s.timing;
    if (t.reg_step_min != 1) error("timing", "regulation step must be 1 minute");
    if (t.scuc_horizon_h < 24) error("timing", "SCUC horizon must cover at least 24 h");
    if (t.scuc_step_min != 60) error("timing", "SCUC step must be 60 minutes");
    if (!detail::divides(t.sced_step_min, t.rtuc_period_min))
        error("timing", "SCED step must divide the RTUC period");
    if (!detail::divides(t.rtuc_step_min, t.scuc_step_min))
        error("timing", "RTUC step must divide the SCUC step");
    if (!detail::divides(t.rtuc_step_min, t.rtuc_period_min) || !detail::divides(t.rtuc_period_min, 1440))
        error("timing", "RTUC period must be a multiple of its step and divide a day");
    if (t.rtuc_intervals < 1) error("timing", "RTUC needs at least one interval");
    if (t.segments < 1) error("timing", "segments must be >= 1");
    if (t.mip_gap < 0.0) error("timing", "mip_gap must be >= 0");
    if (t.node_limit < 1) error("timing", "node_limit must be >= 1");

    std::set<std::string> outage_ids;
    for (const auto& o : s.outages) {
        if (!outage_ids.insert(o.id).second) error("outage " + o.id, "duplicate outage id");
        if (!s.find_generator(o.resource) && !s.find_semi(o.resource))
            error("outage " + o.id, "resource " + o.resource + " does not exist");
        if (o.start_minute < 0) error("outage " + o.id, "start must be >= 0");
        if (o.duration_min <= 0) error("outage " + o.id, "duration must be positive");
        if (!(o.fraction > 0.0 && o.fraction <= 1.0))
            error("outage " + o.id, "fraction must lie in (0, 1]");
    }
    for (const auto& sd : s.semis)
        if (sd.kind == SemiKind::tie_line && sd.bubble == net.swing)
            error(sd.id, "tie-line must not sit on the swing bubble");
    return rep;
}

} // namespace epecs
