#pragma once

// Best-first branch-and-bound over binary variables. All node relaxations
// share one SimplexEngine; a node only changes binary bounds, which keeps the
// current basis dual feasible, so each node re-solve is a short dual simplex.

#include "epecs/lp.hpp"

#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

namespace epecs {

enum class Branching { most_fractional, pseudocost };

struct MilpOptions
{
    double abs_gap = 1e-6;
    double rel_gap = 0.0;
    long node_limit = 200000;
    double integrality_tol = 1e-6;
    bool diving = true;
    /// Lowest-index most-fractional by default, 0-branch first. The
    /// pseudocost rule scores candidates by observed bound changes and
    /// initializes unseen ones by strong branching on a few candidates.
    Branching branching = Branching::most_fractional;
    int strong_candidates = 8;
    /// After branching, keep working on a child until it is pruned before
    /// going back to the best open node.
    bool plunge = false;
    SimplexOptions simplex{};
};

namespace detail {

struct BbNode
{
    double bound;
    std::uint64_t seq;
    int branch;   ///< position in the binary list
    double value; ///< relaxation value of the branching binary
    std::vector<signed char> fix; ///< -1 free, 0 or 1
};

struct BbNodeOrder
{
    bool operator()(const BbNode& a, const BbNode& b) const
    {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.seq > b.seq;
    }
};

class BranchAndBound
{
public:
    BranchAndBound(const LinearProgram& lp, const MilpOptions& opt) : lp_(lp), opt_(opt), eng_(lp, opt.simplex)
    {
        for (int j = 0; j < lp.num_vars(); ++j)
            if (lp.variables[j].binary) bins_.push_back(j);
        current_.assign(bins_.size(), -1);
        pc_sum_[0].assign(bins_.size(), 0.0);
        pc_sum_[1].assign(bins_.size(), 0.0);
        pc_cnt_[0].assign(bins_.size(), 0);
        pc_cnt_[1].assign(bins_.size(), 0);
    }

    Solution run()
    {
        const std::vector<signed char> root_fix(bins_.size(), -1);
        SolveStatus st = solve_node(root_fix);
        if (st == SolveStatus::unbounded || st == SolveStatus::infeasible) return finish_without_incumbent(st);
        const double root_bound = eng_.objective();
        if (most_fractional() < 0) {
            record_incumbent();
            return polish();
        }
        const std::vector<double> root_x = binary_values();
        if (opt_.diving) {
            dive(root_fix, false);
            if (opt_.branching == Branching::pseudocost) {
                solve_node(root_fix);
                dive(root_fix, false, true);
            }
            solve_node(root_fix);
        }
        std::priority_queue<BbNode, std::vector<BbNode>, BbNodeOrder> open;
        double frontier = root_bound; // bound of the subtree being worked on
        int b0 = choose_branch(root_fix, root_bound, root_x);
        open.push({root_bound, seq_++, b0, root_x[b0], root_fix});
        while (!open.empty() && !hit_limit_) {
            BbNode node = open.top();
            open.pop();
            bound_ = node.bound;
            frontier = node.bound;
            while (true) {
                if (node.bound >= cutoff()) break;
                std::vector<BbNode> kids;
                signed char first = 0;
                if (opt_.plunge && node.value >= 0.5) first = 1;
                for (signed char v : {first, static_cast<signed char>(1 - first)}) {
                    if (nodes_ >= opt_.node_limit) {
                        hit_limit_ = true;
                        break;
                    }
                    std::vector<signed char> fix = node.fix;
                    fix[node.branch] = v;
                    if (solve_node(fix) != SolveStatus::optimal) continue;
                    double obj = eng_.objective();
                    learn(node, v, obj);
                    if (obj >= cutoff()) continue;
                    if (most_fractional() < 0) {
                        record_incumbent();
                        continue;
                    }
                    std::vector<double> x = binary_values();
                    int b = choose_branch(fix, obj, x);
                    kids.push_back({obj, seq_++, b, x[b], std::move(fix)});
                }
                if (hit_limit_ || kids.empty()) {
                    for (auto& k : kids) open.push(std::move(k));
                    break;
                }
                if (!opt_.plunge) {
                    for (auto& k : kids) open.push(std::move(k));
                    break;
                }
                for (std::size_t i = 1; i < kids.size(); ++i) open.push(std::move(kids[i]));
                node = std::move(kids[0]);
            }
        }
        bound_ = incumbent_obj_;
        if (!open.empty()) bound_ = std::min(bound_, open.top().bound);
        if (hit_limit_) bound_ = std::min(bound_, frontier);
        if (incumbent_.empty()) return finish_without_incumbent(hit_limit_ ? SolveStatus::node_limit : SolveStatus::infeasible);
        return polish();
    }

private:
    const LinearProgram& lp_;
    MilpOptions opt_;
    SimplexEngine eng_;
    std::vector<int> bins_;
    std::vector<signed char> current_;
    std::vector<double> incumbent_;
    double incumbent_obj_ = kInf;
    long nodes_ = 0;
    long iterations_ = 0;
    std::uint64_t seq_ = 0;
    bool hit_limit_ = false;
    double bound_ = -kInf;
    std::vector<double> pc_sum_[2];
    std::vector<long> pc_cnt_[2];

    double cutoff() const
    {
        if (!std::isfinite(incumbent_obj_)) return kInf;
        return incumbent_obj_ - std::max(opt_.abs_gap, opt_.rel_gap * std::abs(incumbent_obj_));
    }

    void apply(const std::vector<signed char>& fix)
    {
        for (std::size_t i = 0; i < bins_.size(); ++i) {
            if (fix[i] == current_[i]) continue;
            const int j = bins_[i];
            if (fix[i] < 0) eng_.set_bounds(j, lp_.variables[j].lower, lp_.variables[j].upper);
            else eng_.set_bounds(j, fix[i], fix[i]);
            current_[i] = fix[i];
        }
    }

    SolveStatus solve_node(const std::vector<signed char>& fix)
    {
        // a fixing outside the original bounds makes the node infeasible
        for (std::size_t i = 0; i < bins_.size(); ++i) {
            if (fix[i] < 0) continue;
            const auto& v = lp_.variables[bins_[i]];
            if (fix[i] < v.lower || fix[i] > v.upper) return SolveStatus::infeasible;
        }
        apply(fix);
        SolveStatus st = eng_.solve();
        ++nodes_;
        iterations_ += eng_.iterations();
        if (eng_.observed()) {
            Solution s = eng_.solution(true);
            eng_.notify(s);
        }
        return st;
    }

    std::vector<double> binary_values() const
    {
        std::vector<double> x(bins_.size());
        for (std::size_t i = 0; i < bins_.size(); ++i) x[i] = eng_.value(bins_[i]);
        return x;
    }

    double fractionality(double x) const { return std::min(x - std::floor(x), std::ceil(x) - x); }

    /// Lowest-index most-fractional binary, or -1 if all are integral.
    int most_fractional() const
    {
        int best = -1;
        double bestf = opt_.integrality_tol;
        for (std::size_t i = 0; i < bins_.size(); ++i) {
            double f = fractionality(eng_.value(bins_[i]));
            if (f > bestf) {
                bestf = f;
                best = static_cast<int>(i);
            }
        }
        return best;
    }

    void learn(const BbNode& parent, signed char dir, double obj)
    {
        const double f = dir ? 1.0 - parent.value : parent.value;
        if (f <= opt_.integrality_tol) return;
        pc_sum_[dir][parent.branch] += std::max(0.0, obj - parent.bound) / f;
        ++pc_cnt_[dir][parent.branch];
    }

    double pseudocost(int dir, std::size_t i) const
    {
        if (pc_cnt_[dir][i] > 0) return pc_sum_[dir][i] / pc_cnt_[dir][i];
        double s = 0.0;
        long n = 0;
        for (std::size_t k = 0; k < bins_.size(); ++k)
            if (pc_cnt_[dir][k] > 0) {
                s += pc_sum_[dir][k] / pc_cnt_[dir][k];
                ++n;
            }
        return n ? s / n : 1.0;
    }

    /// Picks the branching binary at a node whose relaxation values are `x`.
    int choose_branch(const std::vector<signed char>& fix, double obj, const std::vector<double>& x)
    {
        if (opt_.branching == Branching::most_fractional) {
            int best = -1;
            double bestf = opt_.integrality_tol;
            for (std::size_t i = 0; i < x.size(); ++i)
                if (fractionality(x[i]) > bestf) {
                    bestf = fractionality(x[i]);
                    best = static_cast<int>(i);
                }
            return best;
        }
        std::vector<int> cand;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (fractionality(x[i]) > opt_.integrality_tol) cand.push_back(static_cast<int>(i));
        // strong branching on the most fractional candidates never seen before
        std::vector<int> unseen;
        for (int i : cand)
            if (pc_cnt_[0][i] == 0 || pc_cnt_[1][i] == 0) unseen.push_back(i);
        std::stable_sort(unseen.begin(), unseen.end(),
                         [&](int a, int b) { return fractionality(x[a]) > fractionality(x[b]); });
        if (static_cast<int>(unseen.size()) > opt_.strong_candidates) unseen.resize(opt_.strong_candidates);
        for (int i : unseen) {
            BbNode probe{obj, 0, i, x[i], {}};
            for (signed char v : {0, 1}) {
                std::vector<signed char> f = fix;
                f[i] = v;
                if (solve_node(f) == SolveStatus::optimal) learn(probe, v, eng_.objective());
                else learn(probe, v, obj + 1e3 * (1.0 + std::abs(obj)));
            }
        }
        int best = -1;
        double best_score = -1.0;
        for (int i : cand) {
            double f = x[i];
            double d = std::max(pseudocost(0, i) * f, 1e-6);
            double u = std::max(pseudocost(1, i) * (1.0 - f), 1e-6);
            double score = d * u;
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        return best;
    }

    void record_incumbent()
    {
        double obj = eng_.objective();
        if (obj < incumbent_obj_) {
            incumbent_obj_ = obj;
            incumbent_.resize(bins_.size());
            for (std::size_t i = 0; i < bins_.size(); ++i) incumbent_[i] = std::round(eng_.value(bins_[i]));
        }
    }

    /// Fixes one binary per step until the relaxation is integral or
    /// infeasible. The default step rounds the binary closest to
    /// integrality; the upward variant sets the largest fractional one to 1.
    void dive(std::vector<signed char> fix, bool upward, bool guided = false)
    {
        for (std::size_t step = 0; step < bins_.size(); ++step) {
            int pick = -1;
            double bestf = upward ? -1.0 : 1.0;
            for (std::size_t i = 0; i < bins_.size(); ++i) {
                if (fix[i] >= 0) continue;
                double x = eng_.value(bins_[i]);
                double f = std::min(x, 1.0 - x);
                if (f <= opt_.integrality_tol) continue;
                if (upward ? x > bestf : f < bestf) {
                    bestf = upward ? x : f;
                    pick = static_cast<int>(i);
                }
            }
            if (pick < 0) {
                if (most_fractional() < 0) record_incumbent();
                return;
            }
            const signed char first = upward || eng_.value(bins_[pick]) >= 0.5 ? 1 : 0;
            fix[pick] = first;
            bool ok = solve_node(fix) == SolveStatus::optimal && eng_.objective() < cutoff();
            if (guided) {
                // look at the other side too and keep the cheaper one
                const double obj_first = ok ? eng_.objective() : kInf;
                fix[pick] = static_cast<signed char>(1 - first);
                bool ok2 = solve_node(fix) == SolveStatus::optimal && eng_.objective() < cutoff();
                if (!ok2 || eng_.objective() >= obj_first) {
                    if (!ok) return;
                    fix[pick] = first;
                    solve_node(fix);
                }
            } else if (!ok) {
                fix[pick] = static_cast<signed char>(1 - first);
                if (solve_node(fix) != SolveStatus::optimal || eng_.objective() >= cutoff()) return;
            }
            if (most_fractional() < 0) {
                record_incumbent();
                return;
            }
        }
    }

    Solution polish()
    {
        std::vector<signed char> fix(bins_.size());
        for (std::size_t i = 0; i < bins_.size(); ++i) fix[i] = static_cast<signed char>(incumbent_[i]);
        apply(fix);
        SolveStatus st = eng_.solve();
        iterations_ += eng_.iterations();
        if (st != SolveStatus::optimal) throw SolverFault("incumbent re-solve failed");
        Solution s = eng_.solution(true);
        eng_.notify(s);
        for (std::size_t i = 0; i < bins_.size(); ++i) s.x[bins_[i]] = incumbent_[i];
        s.status = hit_limit_ ? SolveStatus::node_limit : SolveStatus::optimal;
        s.bound = hit_limit_ ? std::min(bound_, s.objective) : s.objective;
        s.nodes = nodes_;
        s.iterations = iterations_;
        return s;
    }

    Solution finish_without_incumbent(SolveStatus st)
    {
        Solution s;
        s.status = st;
        s.nodes = nodes_;
        s.iterations = iterations_;
        return s;
    }
};

} // namespace detail

/// Solves a mixed-binary program. Programs without binaries go through the
/// same path and return the LP optimum.
inline Solution solve_milp(const LinearProgram& lp, const MilpOptions& opt = {})
{
    return detail::BranchAndBound(lp, opt).run();
}

} // namespace epecs
