#pragma once

// Piecewise-linear approximation of the quadratic fuel cost
// C_F (H_F + H_L P + H_Q P^2) on [Pmin, Pmax].

#include "epecs/error.hpp"

#include <algorithm>
#include <vector>

namespace epecs {

struct PiecewiseCost
{
    double no_load_cost = 0.0;       ///< $/h at Pmin including the fixed term
    std::vector<double> breakpoints; ///< MW, size = segments + 1
    std::vector<double> slopes;      ///< $/MWh, nondecreasing

    std::size_t segments() const { return slopes.size(); }
    double width(std::size_t j) const { return breakpoints[j + 1] - breakpoints[j]; }

    /// Cost in $/h at output p (p clamped into the breakpoint range).
    double evaluate(double p) const
    {
        double c = no_load_cost;
        for (std::size_t j = 0; j < slopes.size(); ++j) {
            double take = std::clamp(p - breakpoints[j], 0.0, width(j));
            c += slopes[j] * take;
        }
        return c;
    }
};

/// Equal-width chord linearization. A unit with Pmin == Pmax gets no
/// segments, only its no-load cost.
inline PiecewiseCost linearize(double hq, double hl, double hf, double fuel_price, double pmin, double pmax, int n_seg)
{
    if (hq < 0.0) throw ModelError("linearize: quadratic heat rate must be >= 0 (nonconvex cost)");
    if (n_seg < 1) throw ModelError("linearize: at least one segment required");
    if (pmin > pmax) throw ModelError("linearize: pmin exceeds pmax");
    PiecewiseCost pc;
    auto energy = [&](double p) { return fuel_price * (hl * p + hq * p * p); };
    pc.no_load_cost = fuel_price * hf + energy(pmin);
    pc.breakpoints.push_back(pmin);
    if (pmax == pmin) return pc;
    const double w = (pmax - pmin) / n_seg;
    for (int j = 1; j <= n_seg; ++j) pc.breakpoints.push_back(j == n_seg ? pmax : pmin + j * w);
    for (int j = 0; j < n_seg; ++j) {
        double a = pc.breakpoints[j], b = pc.breakpoints[j + 1];
        pc.slopes.push_back((energy(b) - energy(a)) / (b - a));
    }
    return pc;
}

} // namespace epecs
