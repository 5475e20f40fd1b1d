#pragma once

// Minute-scale physics: zonal DC flow with an external swing bus that
// absorbs the system imbalance, the regulation service as a rate-limited
// gain with saturation, and the reserves actually held by the fleet.

#include "epecs/error.hpp"
#include "epecs/scenario.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace epecs {

struct GridState
{
    std::vector<double> injections;      ///< per bubble, MW
    std::vector<double> branch_flows;    ///< per branch (attachments included), from -> to
    std::vector<double> interface_flows; ///< per interface, signed member sum
    double swing = 0.0;                  ///< MW exported to the swing bus; positive is surplus
};

/// DC flow on a fixed network. The reduced weighted Laplacian (swing bus
/// as angle reference) is factored once.
class DcFlow
{
public:
    explicit DcFlow(const ZonalNetwork& net) : net_(net)
    {
        if (!detail::network_connected(net)) throw ModelError("network is disconnected");
        const auto n = static_cast<Eigen::Index>(net.bubbles.size());
        Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
        for (const auto& b : net.branches) {
            int i = node(b.from), j = node(b.to);
            if (i >= 0) lap(i, i) += b.weight;
            if (j >= 0) lap(j, j) += b.weight;
            if (i >= 0 && j >= 0) {
                lap(i, j) -= b.weight;
                lap(j, i) -= b.weight;
            }
        }
        lu_ = lap.fullPivLu();
        if (n > 0 && !lu_.isInvertible()) throw ModelError("network is disconnected from the swing bus");
        for (const auto& itf : net.interfaces) {
            std::vector<std::pair<std::size_t, int>> m;
            for (const auto& mem : itf.members) m.emplace_back(*net.branch_index(mem.branch), mem.sign);
            members_.push_back(std::move(m));
        }
    }

    GridState solve(const std::vector<double>& injections) const
    {
        if (injections.size() != net_.bubbles.size()) throw ModelError("dc_flow: one injection per bubble expected");
        for (double v : injections)
            if (!std::isfinite(v)) throw ModelError("dc_flow: injection is not finite");
        GridState g;
        g.injections = injections;
        const auto n = static_cast<Eigen::Index>(injections.size());
        Eigen::VectorXd p(n);
        for (Eigen::Index i = 0; i < n; ++i) p(i) = injections[static_cast<std::size_t>(i)];
        Eigen::VectorXd theta = n > 0 ? Eigen::VectorXd(lu_.solve(p)) : Eigen::VectorXd();
        auto angle = [&](const std::string& b) {
            int i = node(b);
            return i < 0 ? 0.0 : theta(i);
        };
        for (const auto& b : net_.branches) g.branch_flows.push_back(b.weight * (angle(b.from) - angle(b.to)));
        for (const auto& m : members_) {
            double f = 0.0;
            for (auto [bi, sign] : m) f += sign * g.branch_flows[bi];
            g.interface_flows.push_back(f);
        }
        for (double v : injections) g.swing += v;
        return g;
    }

    const ZonalNetwork& network() const { return net_; }

private:
    const ZonalNetwork& net_;
    Eigen::FullPivLU<Eigen::MatrixXd> lu_;
    std::vector<std::vector<std::pair<std::size_t, int>>> members_;

    int node(const std::string& b) const
    {
        auto i = net_.bubble_index(b);
        return i ? static_cast<int>(*i) : -1;
    }
};

inline GridState dc_flow(const ZonalNetwork& net, const std::vector<double>& injections)
{
    return DcFlow(net).solve(injections);
}

// ---------------------------------------------------------------------------
// Regulation

struct RegulationState
{
    std::vector<double> level;         ///< G per unit, MW
    std::vector<double> saturation;    ///< per unit, MW; 0 for non-participants
    std::vector<double> rate;          ///< per unit, MW/min
    std::vector<double> participation; ///< per unit, sums to 1 over participants
    // headroom left by the unit's base point, MW; empty means unlimited
    std::vector<double> up_room, down_room;

    double total() const
    {
        double s = 0.0;
        for (double g : level) s += g;
        return s;
    }
    double total_saturation() const
    {
        double s = 0.0;
        for (double v : saturation) s += v;
        return s;
    }
};

/// Sets limits from the participating units' capacities. The requirement
/// scales saturation down when it is below the total capacity.
inline void configure_regulation(RegulationState& r, const std::vector<double>& capacity,
                                 const std::vector<bool>& participating, double requirement)
{
    const std::size_t n = capacity.size();
    r.level.resize(n, 0.0);
    r.saturation.assign(n, 0.0);
    r.rate.assign(n, 0.0);
    r.participation.assign(n, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (participating[k]) total += capacity[k];
    if (total <= 0.0) return;
    const double scale = requirement > 0.0 ? std::min(1.0, requirement / total) : 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!participating[k]) continue;
        r.saturation[k] = capacity[k] * scale;
        r.rate[k] = 0.1 * r.saturation[k];
        r.participation[k] = capacity[k] / total;
    }
}

struct RegulationResult
{
    RegulationState state;
    double residual = 0.0;
};

/// One minute of regulation against the measured imbalance (which already
/// contains the current regulation output). With no imbalance the units
/// wash out toward zero at their rate limit.
inline RegulationResult regulation_step(double imbalance, const RegulationState& reg)
{
    RegulationResult out{reg, 0.0};
    auto& r = out.state;
    const double old_total = reg.total();
    const bool washout = std::abs(imbalance) <= 1e-6;
    for (std::size_t k = 0; k < r.level.size(); ++k) {
        const double sat = r.saturation[k];
        double g = r.level[k];
        if (sat <= 0.0) {
            r.level[k] = 0.0;
            continue;
        }
        double dg = washout ? -g : -imbalance * r.participation[k];
        dg = std::clamp(dg, -r.rate[k], r.rate[k]);
        double hi = sat, lo = -sat;
        if (k < r.up_room.size()) hi = std::min(hi, std::max(0.0, r.up_room[k]));
        if (k < r.down_room.size()) lo = std::max(lo, -std::max(0.0, r.down_room[k]));
        r.level[k] = std::clamp(g + dg, lo, hi);
    }
    out.residual = imbalance + r.total() - old_total;
    return out;
}

// ---------------------------------------------------------------------------
// Actual reserves

struct ReserveSnapshot
{
    double lfr_up = 0.0;    ///< MW
    double lfr_down = 0.0;  ///< MW
    double rampr_up = 0.0;  ///< MW per time unit of the ramp rates
    double rampr_down = 0.0;
};

/// Load-following headroom and foot-room of one committed unit.
inline std::pair<double, double> load_following(bool online, double p, double p_min, double p_max)
{
    if (!online) return {0.0, 0.0};
    return {std::max(0.0, p_max - p), std::max(0.0, p - p_min)};
}

/// Unused ramp capability of one committed unit given its scheduled change
/// `dp` over one time unit; `r_min` is the (negative) downward rate.
inline std::pair<double, double> ramping(bool online, double dp, double r_min, double r_max)
{
    if (!online) return {0.0, 0.0};
    return {std::max(0.0, r_max - dp), std::max(0.0, std::abs(r_min) + dp)};
}

/// Fleet totals. `derate` is the outage fraction per unit (empty: none);
/// ramps are per minute from `prev` to `p`.
inline ReserveSnapshot actual_reserves(const std::vector<Generator>& fleet, const std::vector<bool>& online,
                                       const std::vector<double>& p, const std::vector<double>& prev,
                                       const std::vector<double>& derate = {})
{
    ReserveSnapshot r;
    for (std::size_t k = 0; k < fleet.size(); ++k) {
        const auto& g = fleet[k];
        const double f = derate.empty() ? 0.0 : derate[k];
        auto [up, dn] = load_following(online[k], p[k], g.p_min, (1.0 - f) * g.p_max);
        auto [rup, rdn] = ramping(online[k], p[k] - prev[k], g.r_min, g.r_max);
        r.lfr_up += up;
        r.lfr_down += dn;
        r.rampr_up += rup;
        r.rampr_down += rdn;
    }
    return r;
}

} // namespace epecs
