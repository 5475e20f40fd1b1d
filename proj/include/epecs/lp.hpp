#pragma once

// Linear programs and a bounded-variable revised simplex.
//
// Every row i gets a logical variable s_i = -a_i.x, so the working system is
// [A I](x, s) = 0 with all bounds carried by the variables. The basis inverse
// is kept explicitly (dense, product-form updates, periodic reinversion).
// Both a primal and a dual simplex run on the same basis, which lets the
// branch-and-bound layer change bounds and re-solve from the current basis.

#include "epecs/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

namespace epecs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { le, eq, ge };

inline const char* to_string(Relation r)
{
    switch (r) {
    case Relation::le: return "<=";
    case Relation::eq: return "=";
    case Relation::ge: return ">=";
    }
    return "?";
}

struct Variable
{
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    bool binary = false;
};

struct Term
{
    int var;
    double coef;
};

struct Constraint
{
    std::string name;
    std::vector<Term> terms;
    Relation rel = Relation::le;
    double rhs = 0.0;
};

class LinearProgram
{
public:
    std::vector<Variable> variables;
    std::vector<double> cost;
    std::vector<Constraint> constraints;
    double cost_offset = 0.0; ///< constant added to the objective

    int add_variable(std::string name, double lower, double upper, double c = 0.0, bool binary = false)
    {
        variables.push_back({std::move(name), lower, upper, binary});
        cost.push_back(c);
        return static_cast<int>(variables.size()) - 1;
    }

    int add_binary(std::string name, double c = 0.0) { return add_variable(std::move(name), 0.0, 1.0, c, true); }

    int add_constraint(std::string name, std::vector<Term> terms, Relation rel, double rhs)
    {
        constraints.push_back({std::move(name), std::move(terms), rel, rhs});
        return static_cast<int>(constraints.size()) - 1;
    }

    void fix(int j, double v)
    {
        variables[j].lower = v;
        variables[j].upper = v;
    }

    int num_vars() const { return static_cast<int>(variables.size()); }
    int num_constraints() const { return static_cast<int>(constraints.size()); }

    bool has_binaries() const
    {
        return std::any_of(variables.begin(), variables.end(), [](const Variable& v) { return v.binary; });
    }

    double objective_at(const std::vector<double>& x) const
    {
        double s = cost_offset;
        for (std::size_t j = 0; j < cost.size(); ++j) s += cost[j] * x[j];
        return s;
    }

    double row_activity(int i, const std::vector<double>& x) const
    {
        double s = 0.0;
        for (const auto& t : constraints[i].terms) s += t.coef * x[t.var];
        return s;
    }

    void validate() const
    {
        if (cost.size() != variables.size()) throw ModelError("objective length does not match variable count");
        for (std::size_t j = 0; j < variables.size(); ++j) {
            const auto& v = variables[j];
            if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
                throw ModelError("variable " + v.name + " has inconsistent bounds");
            if (v.binary && (v.lower < 0.0 || v.upper > 1.0))
                throw ModelError("binary variable " + v.name + " must have bounds within [0, 1]");
            if (!std::isfinite(cost[j])) throw ModelError("variable " + v.name + " has a non-finite cost");
        }
        for (const auto& c : constraints) {
            if (!std::isfinite(c.rhs)) throw ModelError("constraint " + c.name + " has a non-finite rhs");
            for (const auto& t : c.terms) {
                if (t.var < 0 || t.var >= num_vars())
                    throw ModelError("constraint " + c.name + " references variable index " + std::to_string(t.var) +
                                     " outside [0, " + std::to_string(num_vars()) + ")");
                if (!std::isfinite(t.coef)) throw ModelError("constraint " + c.name + " has a non-finite coefficient");
            }
        }
    }
};

enum class SolveStatus { optimal, infeasible, unbounded, node_limit };

inline const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::node_limit: return "node_limit";
    }
    return "?";
}

struct Solution
{
    SolveStatus status = SolveStatus::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    std::vector<double> duals;         ///< per constraint, c = A^T y + d
    std::vector<double> reduced_costs; ///< per variable
    long iterations = 0;
    long nodes = 0;
    double bound = -kInf; ///< best proven lower bound (branch-and-bound)

    bool optimal() const { return status == SolveStatus::optimal; }
};

// ---------------------------------------------------------------------------
// Optimality certificates

struct Certificate
{
    double primal_infeasibility = 0.0; ///< max violation / (1 + |rhs or bound|)
    double dual_infeasibility = 0.0;   ///< max sign violation / (1 + max|c|)
    double complementarity = 0.0;      ///< max |multiplier * slack| / ((1 + max|c|)(1 + max|x|))

    double worst() const { return std::max({primal_infeasibility, dual_infeasibility, complementarity}); }
    bool within(double tol) const { return worst() <= tol; }
};

/// Checks primal feasibility, dual feasibility and complementary slackness
/// of an optimal LP solution against the original data. `lower`/`upper`
/// override the variable bounds (used for branch-and-bound nodes).
inline Certificate certify(const LinearProgram& lp, const Solution& sol, const std::vector<double>* lower = nullptr,
                           const std::vector<double>* upper = nullptr)
{
    Certificate cert;
    const int n = lp.num_vars();
    const int m = lp.num_constraints();
    if (static_cast<int>(sol.x.size()) != n) {
        cert.primal_infeasibility = kInf;
        return cert;
    }
    auto lo = [&](int j) { return lower ? (*lower)[j] : lp.variables[j].lower; };
    auto up = [&](int j) { return upper ? (*upper)[j] : lp.variables[j].upper; };

    double cmax = 0.0, xmax = 0.0;
    for (int j = 0; j < n; ++j) {
        cmax = std::max(cmax, std::abs(lp.cost[j]));
        xmax = std::max(xmax, std::abs(sol.x[j]));
    }
    const double dscale = 1.0 + cmax;
    const double cscale = (1.0 + cmax) * (1.0 + xmax);

    for (int j = 0; j < n; ++j) {
        double x = sol.x[j];
        double v = std::max(lo(j) - x, x - up(j));
        if (v > 0.0) {
            double b = x < lo(j) ? lo(j) : up(j);
            cert.primal_infeasibility = std::max(cert.primal_infeasibility, v / (1.0 + std::abs(b)));
        }
    }
    std::vector<double> activity(m);
    for (int i = 0; i < m; ++i) {
        const auto& c = lp.constraints[i];
        activity[i] = lp.row_activity(i, sol.x);
        double v = 0.0;
        switch (c.rel) {
        case Relation::le: v = activity[i] - c.rhs; break;
        case Relation::ge: v = c.rhs - activity[i]; break;
        case Relation::eq: v = std::abs(activity[i] - c.rhs); break;
        }
        if (v > 0.0) cert.primal_infeasibility = std::max(cert.primal_infeasibility, v / (1.0 + std::abs(c.rhs)));
    }
    if (static_cast<int>(sol.duals.size()) != m) {
        cert.dual_infeasibility = kInf;
        return cert;
    }

    // row multipliers: sign and complementarity
    for (int i = 0; i < m; ++i) {
        const auto& c = lp.constraints[i];
        double y = sol.duals[i];
        double sign_violation = 0.0;
        if (c.rel == Relation::le) sign_violation = std::max(0.0, y);
        if (c.rel == Relation::ge) sign_violation = std::max(0.0, -y);
        cert.dual_infeasibility = std::max(cert.dual_infeasibility, sign_violation / dscale);
        if (c.rel != Relation::eq)
            cert.complementarity = std::max(cert.complementarity, std::abs(y * (activity[i] - c.rhs)) / cscale);
    }

    // column reduced costs d = c - A^T y
    std::vector<double> d(lp.cost);
    for (int i = 0; i < m; ++i)
        for (const auto& t : lp.constraints[i].terms) d[t.var] -= sol.duals[i] * t.coef;
    for (int j = 0; j < n; ++j) {
        double l = lo(j), u = up(j), x = sol.x[j];
        if (l == u) continue;
        double viol = 0.0;
        if (d[j] > 0.0) {
            // must sit at its lower bound
            viol = std::isfinite(l) ? 0.0 : d[j];
            if (std::isfinite(l))
                cert.complementarity = std::max(cert.complementarity, d[j] * std::max(0.0, x - l) / cscale);
        } else if (d[j] < 0.0) {
            viol = std::isfinite(u) ? 0.0 : -d[j];
            if (std::isfinite(u))
                cert.complementarity = std::max(cert.complementarity, -d[j] * std::max(0.0, u - x) / cscale);
        }
        cert.dual_infeasibility = std::max(cert.dual_infeasibility, viol / dscale);
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Solve observer: called after every LP solve (including branch-and-bound
// nodes). Used by the test suites to certify each solve.

struct SolveView
{
    const LinearProgram& lp;
    const std::vector<double>& lower;
    const std::vector<double>& upper;
    const Solution& solution;
};

using SolveObserver = std::function<void(const SolveView&)>;

namespace detail {
inline std::mutex& observer_mutex()
{
    static std::mutex m;
    return m;
}
inline SolveObserver& observer_slot()
{
    static SolveObserver obs;
    return obs;
}
} // namespace detail

inline SolveObserver set_solve_observer(SolveObserver obs)
{
    std::lock_guard lock(detail::observer_mutex());
    std::swap(detail::observer_slot(), obs);
    return obs;
}

inline bool has_solve_observer()
{
    std::lock_guard lock(detail::observer_mutex());
    return static_cast<bool>(detail::observer_slot());
}

inline void notify_solve(const SolveView& view)
{
    SolveObserver obs;
    {
        std::lock_guard lock(detail::observer_mutex());
        obs = detail::observer_slot();
    }
    if (obs) obs(view);
}

// ---------------------------------------------------------------------------
// Simplex engine

struct SimplexOptions
{
    double primal_tol = 1e-9;
    double dual_tol = 1e-9;
    double pivot_tol = 1e-9;
    int refactor_interval = 600;
    int bland_after = 50; ///< consecutive degenerate pivots before Bland's rule
    long max_iterations = 0; ///< 0 = automatic
};

class SimplexEngine
{
public:
    explicit SimplexEngine(const LinearProgram& lp, SimplexOptions opt = {}) : lp_(lp), opt_(opt)
    {
        lp.validate();
        n_ = lp.num_vars();
        m_ = lp.num_constraints();
        N_ = n_ + m_;
        build_matrix();
        c_.assign(N_, 0.0);
        lo_.assign(N_, 0.0);
        up_.assign(N_, 0.0);
        for (int j = 0; j < n_; ++j) {
            c_[j] = lp.cost[j];
            lo_[j] = lp.variables[j].lower;
            up_[j] = lp.variables[j].upper;
        }
        for (int i = 0; i < m_; ++i) {
            const auto& c = lp.constraints[i];
            switch (c.rel) {
            case Relation::le: lo_[n_ + i] = -c.rhs; up_[n_ + i] = kInf; break;
            case Relation::ge: lo_[n_ + i] = -kInf; up_[n_ + i] = -c.rhs; break;
            case Relation::eq: lo_[n_ + i] = -c.rhs; up_[n_ + i] = -c.rhs; break;
            }
        }
        x_.assign(N_, 0.0);
        d_.assign(N_, 0.0);
        at_upper_.assign(N_, 0);
        head_.resize(m_);
        pos_.assign(N_, -1);
        for (int i = 0; i < m_; ++i) {
            head_[i] = n_ + i;
            pos_[n_ + i] = i;
        }
        binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) binv_[idx(i, i)] = 1.0;
        row_alpha_.assign(N_, 0.0);
        col_alpha_.assign(m_, 0.0);
        // initial nonbasic side follows the cost sign
        for (int j = 0; j < n_; ++j) {
            d_[j] = c_[j];
            at_upper_[j] = (c_[j] < 0.0 && std::isfinite(up_[j])) || !std::isfinite(lo_[j]);
        }
        if (opt_.max_iterations <= 0) opt_.max_iterations = 50L * (m_ + n_) + 20000;
    }

    int num_vars() const { return n_; }

    void set_bounds(int j, double lower, double upper)
    {
        lo_[j] = lower;
        up_[j] = upper;
    }

    double lower(int j) const { return lo_[j]; }
    double upper(int j) const { return up_[j]; }

    std::vector<double> structural_lower() const { return {lo_.begin(), lo_.begin() + n_}; }
    std::vector<double> structural_upper() const { return {up_.begin(), up_.begin() + n_}; }

    /// Solves from the current basis.
    SolveStatus solve()
    {
        iterations_ = 0;
        status_ = run();
        return status_;
    }

    SolveStatus status() const { return status_; }
    long iterations() const { return iterations_; }
    long total_iterations() const { return total_iterations_; }

    double value(int j) const { return x_[j]; }

    double objective() const
    {
        double s = lp_.cost_offset;
        for (int j = 0; j < n_; ++j) s += c_[j] * x_[j];
        return s;
    }

    /// Structural solution; duals and reduced costs on request.
    Solution solution(bool with_duals = true)
    {
        Solution s;
        s.status = status_;
        s.iterations = iterations_;
        s.x.assign(x_.begin(), x_.begin() + n_);
        s.objective = objective();
        if (with_duals && status_ == SolveStatus::optimal) {
            compute_duals(c_);
            s.duals.assign(y_.begin(), y_.end());
            s.reduced_costs.assign(d_.begin(), d_.begin() + n_);
            for (int j = 0; j < n_; ++j)
                if (pos_[j] >= 0) s.reduced_costs[j] = 0.0;
        }
        return s;
    }

    /// Reports the last solve to the global observer, if any.
    void notify(const Solution& s) const
    {
        if (!has_solve_observer()) return;
        std::vector<double> lo(lo_.begin(), lo_.begin() + n_), up(up_.begin(), up_.begin() + n_);
        notify_solve({lp_, lo, up, s});
    }

    bool observed() const { return has_solve_observer(); }

private:
    const LinearProgram& lp_;
    SimplexOptions opt_;
    int n_ = 0, m_ = 0, N_ = 0;

    // sparse A, both orientations (structural columns only)
    std::vector<int> col_start_, col_row_;
    std::vector<double> col_val_;
    std::vector<int> row_start_, row_col_;
    std::vector<double> row_val_;

    std::vector<double> c_, lo_, up_, x_, d_, y_;
    std::vector<char> at_upper_;
    std::vector<int> head_, pos_;
    std::vector<double> binv_;
    std::vector<double> row_alpha_, col_alpha_;
    std::vector<int> nz_;
    long iterations_ = 0;
    long total_iterations_ = 0;
    int since_refactor_ = 0;
    SolveStatus status_ = SolveStatus::infeasible;

    std::size_t idx(int i, int k) const { return static_cast<std::size_t>(i) * m_ + k; }

    void build_matrix()
    {
        std::vector<std::vector<std::pair<int, double>>> cols(n_);
        row_start_.assign(m_ + 1, 0);
        for (int i = 0; i < m_; ++i) {
            // merge duplicate terms within a row
            std::vector<Term> terms = lp_.constraints[i].terms;
            std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
            for (std::size_t k = 0; k < terms.size();) {
                int v = terms[k].var;
                double s = 0.0;
                while (k < terms.size() && terms[k].var == v) s += terms[k++].coef;
                if (s != 0.0) {
                    row_col_.push_back(v);
                    row_val_.push_back(s);
                    cols[v].push_back({i, s});
                }
            }
            row_start_[i + 1] = static_cast<int>(row_col_.size());
        }
        col_start_.assign(n_ + 1, 0);
        for (int j = 0; j < n_; ++j) {
            for (auto [r, v] : cols[j]) {
                col_row_.push_back(r);
                col_val_.push_back(v);
            }
            col_start_[j + 1] = static_cast<int>(col_row_.size());
        }
    }

    bool is_fixed(int j) const { return lo_[j] == up_[j]; }
    bool is_free(int j) const { return !std::isfinite(lo_[j]) && !std::isfinite(up_[j]); }

    void place_nonbasic(int j)
    {
        const bool lf = std::isfinite(lo_[j]), uf = std::isfinite(up_[j]);
        if (lo_[j] == up_[j]) {
            x_[j] = lo_[j];
            return;
        }
        if (!lf && !uf) {
            x_[j] = 0.0;
            at_upper_[j] = 0;
            return;
        }
        if (lf && uf) {
            if (d_[j] > opt_.dual_tol) at_upper_[j] = 0;
            else if (d_[j] < -opt_.dual_tol) at_upper_[j] = 1;
        } else {
            at_upper_[j] = uf ? 1 : 0;
        }
        x_[j] = at_upper_[j] ? up_[j] : lo_[j];
    }

    void compute_duals(const std::vector<double>& cost)
    {
        y_.assign(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            double cb = cost[head_[i]];
            if (cb == 0.0) continue;
            const double* row = &binv_[idx(i, 0)];
            for (int k = 0; k < m_; ++k) y_[k] += cb * row[k];
        }
        for (int j = 0; j < n_; ++j) {
            double s = cost[j];
            for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) s -= y_[col_row_[p]] * col_val_[p];
            d_[j] = s;
        }
        for (int i = 0; i < m_; ++i) d_[n_ + i] = cost[n_ + i] - y_[i];
        for (int i = 0; i < m_; ++i) d_[head_[i]] = 0.0;
    }

    void compute_primal()
    {
        std::vector<double> r(m_, 0.0);
        for (int j = 0; j < N_; ++j) {
            if (pos_[j] >= 0 || x_[j] == 0.0) continue;
            if (j < n_) {
                for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) r[col_row_[p]] -= col_val_[p] * x_[j];
            } else {
                r[j - n_] -= x_[j];
            }
        }
        for (int i = 0; i < m_; ++i) {
            const double* row = &binv_[idx(i, 0)];
            double s = 0.0;
            for (int k = 0; k < m_; ++k) s += row[k] * r[k];
            x_[head_[i]] = s;
        }
    }

    void compute_column(int q)
    {
        std::fill(col_alpha_.begin(), col_alpha_.end(), 0.0);
        if (q < n_) {
            for (int p = col_start_[q]; p < col_start_[q + 1]; ++p) {
                const int k = col_row_[p];
                const double a = col_val_[p];
                for (int i = 0; i < m_; ++i) col_alpha_[i] += binv_[idx(i, k)] * a;
            }
        } else {
            const int k = q - n_;
            for (int i = 0; i < m_; ++i) col_alpha_[i] = binv_[idx(i, k)];
        }
    }

    void compute_row(int r)
    {
        std::fill(row_alpha_.begin(), row_alpha_.end(), 0.0);
        const double* rho = &binv_[idx(r, 0)];
        for (int k = 0; k < m_; ++k) {
            const double v = rho[k];
            if (v == 0.0) continue;
            for (int p = row_start_[k]; p < row_start_[k + 1]; ++p) row_alpha_[row_col_[p]] += v * row_val_[p];
            row_alpha_[n_ + k] = v;
        }
    }

    void pivot(int r, int q)
    {
        const double piv = col_alpha_[r];
        double* prow = &binv_[idx(r, 0)];
        nz_.clear();
        for (int k = 0; k < m_; ++k)
            if (prow[k] != 0.0) {
                prow[k] /= piv;
                nz_.push_back(k);
            }
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            const double f = col_alpha_[i];
            if (f == 0.0) continue;
            double* row = &binv_[idx(i, 0)];
            for (int k : nz_) {
                double v = row[k] - f * prow[k];
                row[k] = std::abs(v) < 1e-14 ? 0.0 : v;
            }
        }
        const int leaving = head_[r];
        pos_[leaving] = -1;
        head_[r] = q;
        pos_[q] = r;
        ++since_refactor_;
        ++iterations_;
        ++total_iterations_;
        if (iterations_ > opt_.max_iterations) throw SolverFault("simplex iteration limit exceeded");
    }

    /// Rebuilds the basis inverse from scratch (Gauss-Jordan, partial
    /// pivoting). Columns that turn out dependent are swapped for the slacks
    /// of the rows left without a pivot and leave the basis at a bound.
    void reinvert()
    {
        for (int attempt = 0; attempt < 2; ++attempt) {
            std::vector<int> dependent, free_rows;
            if (factor(dependent, free_rows)) return;
            if (attempt == 1 || dependent.size() != free_rows.size())
                throw SolverFault("singular basis during reinversion");
            for (std::size_t k = 0; k < dependent.size(); ++k) {
                const int j = head_[dependent[k]];
                const int slack = n_ + free_rows[k];
                pos_[j] = -1;
                place_nonbasic(j);
                head_[dependent[k]] = slack;
                pos_[slack] = dependent[k];
            }
        }
    }

    /// One factorization attempt; reports dependent basis positions and the
    /// rows that received no pivot instead of throwing.
    bool factor(std::vector<int>& dependent, std::vector<int>& free_rows)
    {
        std::vector<double> b(static_cast<std::size_t>(m_) * m_, 0.0);
        // columns of B laid out by current basis position
        for (int i = 0; i < m_; ++i) {
            int j = head_[i];
            if (j < n_) {
                for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) b[idx(col_row_[p], i)] = col_val_[p];
            } else {
                b[idx(j - n_, i)] = 1.0;
            }
        }
        std::fill(binv_.begin(), binv_.end(), 0.0);
        for (int i = 0; i < m_; ++i) binv_[idx(i, i)] = 1.0;
        std::vector<int> order;
        order.reserve(m_);
        for (int i = 0; i < m_; ++i)
            if (head_[i] >= n_) order.push_back(i);
        for (int i = 0; i < m_; ++i)
            if (head_[i] < n_) order.push_back(i);
        std::vector<char> used(m_, 0);
        std::vector<int> new_head(m_, -1);
        std::vector<int> bnz, inz;
        for (int c : order) {
            int p = -1;
            double best = 0.0;
            for (int i = 0; i < m_; ++i) {
                if (used[i]) continue;
                double v = std::abs(b[idx(i, c)]);
                if (v > best) {
                    best = v;
                    p = i;
                }
            }
            if (p < 0 || best < 1e-11) {
                dependent.push_back(c);
                continue;
            }
            used[p] = 1;
            new_head[p] = head_[c];
            const double piv = b[idx(p, c)];
            bnz.clear();
            inz.clear();
            for (int k = 0; k < m_; ++k) {
                if (b[idx(p, k)] != 0.0) {
                    b[idx(p, k)] /= piv;
                    bnz.push_back(k);
                }
                if (binv_[idx(p, k)] != 0.0) {
                    binv_[idx(p, k)] /= piv;
                    inz.push_back(k);
                }
            }
            for (int i = 0; i < m_; ++i) {
                if (i == p) continue;
                const double f = b[idx(i, c)];
                if (f == 0.0) continue;
                for (int k : bnz) b[idx(i, k)] -= f * b[idx(p, k)];
                for (int k : inz) binv_[idx(i, k)] -= f * binv_[idx(p, k)];
                b[idx(i, c)] = 0.0;
            }
        }
        if (!dependent.empty()) {
            for (int i = 0; i < m_; ++i)
                if (!used[i]) free_rows.push_back(i);
            return false;
        }
        head_ = new_head;
        for (int i = 0; i < m_; ++i) pos_[head_[i]] = i;
        since_refactor_ = 0;
        return true;
    }

    double primal_infeasibility(int j) const
    {
        const double tol = opt_.primal_tol * (1.0 + std::max(std::abs(lo_[j]) < kInf ? std::abs(lo_[j]) : 0.0,
                                                             std::abs(up_[j]) < kInf ? std::abs(up_[j]) : 0.0));
        if (x_[j] < lo_[j] - tol) return lo_[j] - x_[j];
        if (x_[j] > up_[j] + tol) return x_[j] - up_[j];
        return 0.0;
    }

    double dual_infeasibility(int j) const
    {
        if (pos_[j] >= 0 || is_fixed(j)) return 0.0;
        const double d = d_[j];
        if (is_free(j)) return std::abs(d) > opt_.dual_tol ? std::abs(d) : 0.0;
        if (at_upper_[j]) return d > opt_.dual_tol ? d : 0.0;
        return d < -opt_.dual_tol ? -d : 0.0;
    }

    bool dual_feasible() const
    {
        for (int j = 0; j < N_; ++j)
            if (dual_infeasibility(j) > 0.0) return false;
        return true;
    }

    bool primal_feasible() const
    {
        for (int i = 0; i < m_; ++i)
            if (primal_infeasibility(head_[i]) > 0.0) return false;
        return true;
    }

    /// Recomputes duals and primal values from the current basis. With
    /// `reposition`, nonbasic variables move to the bound their reduced cost
    /// prefers (only safe when the basis is, or should become, dual feasible).
    void refresh(const std::vector<double>& cost, bool reposition)
    {
        if (since_refactor_ >= opt_.refactor_interval) reinvert();
        compute_duals(cost);
        for (int j = 0; j < N_; ++j) {
            if (pos_[j] >= 0) continue;
            if (reposition) {
                place_nonbasic(j);
            } else {
                // keep the side, follow changed bounds
                if (is_fixed(j)) x_[j] = lo_[j];
                else if (is_free(j)) x_[j] = std::clamp(x_[j], lo_[j], up_[j]);
                else x_[j] = at_upper_[j] && std::isfinite(up_[j]) ? up_[j] : (std::isfinite(lo_[j]) ? lo_[j] : up_[j]);
            }
        }
        compute_primal();
    }

    SolveStatus run()
    {
        std::vector<double> zero;
        refresh(c_, true);
        for (int round = 0; round < 50; ++round) {
            if (dual_feasible()) {
                if (!dual_simplex(c_)) return SolveStatus::infeasible;
                refresh(c_, true);
                if (primal_feasible() && dual_feasible()) return SolveStatus::optimal;
                continue;
            }
            if (!primal_feasible()) {
                // phase 1: dual simplex on the zero objective
                zero.assign(N_, 0.0);
                compute_duals(zero);
                if (!dual_simplex(zero)) return SolveStatus::infeasible;
                refresh(c_, false);
                if (!primal_feasible()) continue;
            }
            const SolveStatus st = primal_simplex(c_);
            if (st == SolveStatus::unbounded) return st;
            refresh(c_, false);
            if (primal_feasible() && dual_feasible()) return SolveStatus::optimal;
        }
        throw SolverFault("simplex failed to converge after repeated refinement");
    }

    /// Bounded primal simplex from a primal-feasible basis.
    SolveStatus primal_simplex(const std::vector<double>& cost)
    {
        int degenerate = 0;
        while (true) {
            if (since_refactor_ >= opt_.refactor_interval) {
                reinvert();
                compute_duals(cost);
                compute_primal();
            }
            const bool bland = degenerate > opt_.bland_after;
            int q = -1;
            double best = 0.0;
            int dir = 0;
            for (int j = 0; j < N_; ++j) {
                if (pos_[j] >= 0 || is_fixed(j)) continue;
                const double d = d_[j];
                int dj = 0;
                if (d < -opt_.dual_tol && x_[j] < up_[j]) dj = 1;
                else if (d > opt_.dual_tol && x_[j] > lo_[j]) dj = -1;
                if (dj == 0) continue;
                if (bland) {
                    q = j;
                    dir = dj;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    q = j;
                    dir = dj;
                }
            }
            if (q < 0) return SolveStatus::optimal;
            compute_column(q);

            // Harris two-pass ratio test
            const double range = up_[q] - lo_[q];
            double theta1 = kInf;
            for (int i = 0; i < m_; ++i) {
                const double delta = dir * col_alpha_[i];
                if (std::abs(delta) <= opt_.pivot_tol) continue;
                const int b = head_[i];
                double lim = kInf;
                if (delta > 0 && std::isfinite(lo_[b])) lim = (x_[b] - lo_[b] + opt_.primal_tol) / delta;
                else if (delta < 0 && std::isfinite(up_[b])) lim = (up_[b] - x_[b] + opt_.primal_tol) / -delta;
                theta1 = std::min(theta1, lim);
            }
            if (std::isfinite(range) && range <= theta1) {
                // bound flip, no basis change
                for (int i = 0; i < m_; ++i) x_[head_[i]] -= range * dir * col_alpha_[i];
                at_upper_[q] = dir > 0;
                x_[q] = dir > 0 ? up_[q] : lo_[q];
                ++iterations_;
                ++total_iterations_;
                degenerate = 0;
                continue;
            }
            if (!std::isfinite(theta1)) return SolveStatus::unbounded;
            int r = -1;
            double best_piv = 0.0, theta = 0.0;
            for (int i = 0; i < m_; ++i) {
                const double delta = dir * col_alpha_[i];
                if (std::abs(delta) <= opt_.pivot_tol) continue;
                const int b = head_[i];
                double ratio = kInf;
                if (delta > 0 && std::isfinite(lo_[b])) ratio = (x_[b] - lo_[b]) / delta;
                else if (delta < 0 && std::isfinite(up_[b])) ratio = (up_[b] - x_[b]) / -delta;
                if (ratio > theta1) continue;
                const bool better = bland ? (r < 0 || head_[i] < head_[r]) : std::abs(delta) > best_piv;
                if (better) {
                    best_piv = std::abs(delta);
                    r = i;
                    theta = std::max(0.0, ratio);
                }
            }
            if (r < 0) return SolveStatus::unbounded;
            const int leaving = head_[r];
            const double delta_r = dir * col_alpha_[r];
            for (int i = 0; i < m_; ++i) x_[head_[i]] -= theta * dir * col_alpha_[i];
            x_[q] += theta * dir;
            if (delta_r > 0) {
                x_[leaving] = lo_[leaving];
                at_upper_[leaving] = 0;
            } else {
                x_[leaving] = up_[leaving];
                at_upper_[leaving] = 1;
            }
            compute_row(r);
            const double ratio = d_[q] / col_alpha_[r];
            for (int j = 0; j < N_; ++j)
                if (pos_[j] < 0 && row_alpha_[j] != 0.0) d_[j] -= ratio * row_alpha_[j];
            d_[leaving] = -ratio;
            d_[q] = 0.0;
            pivot(r, q);
            degenerate = theta <= 1e-12 ? degenerate + 1 : 0;
        }
    }

    /// Bounded dual simplex from a dual-feasible basis. Returns false when
    /// the primal is infeasible.
    bool dual_simplex(const std::vector<double>& cost)
    {
        int stalled = 0;
        while (true) {
            if (since_refactor_ >= opt_.refactor_interval) {
                reinvert();
                compute_duals(cost);
                compute_primal();
            }
            const bool bland = stalled > opt_.bland_after;
            int r = -1;
            double worst = 0.0;
            for (int i = 0; i < m_; ++i) {
                const double inf = primal_infeasibility(head_[i]);
                if (inf <= 0.0) continue;
                if (bland) {
                    if (r < 0 || head_[i] < head_[r]) r = i;
                } else if (inf > worst) {
                    worst = inf;
                    r = i;
                }
            }
            if (r < 0) return true;
            const int leaving = head_[r];
            const bool to_lower = x_[leaving] < lo_[leaving];
            compute_row(r);

            double theta1 = kInf;
            for (int j = 0; j < N_; ++j) {
                if (pos_[j] >= 0 || is_fixed(j)) continue;
                const double a = row_alpha_[j];
                if (std::abs(a) <= opt_.pivot_tol) continue;
                if (!dual_eligible(j, a, to_lower)) continue;
                theta1 = std::min(theta1, (std::abs(d_[j]) + opt_.dual_tol) / std::abs(a));
            }
            if (!std::isfinite(theta1)) return false;
            int q = -1;
            double best = 0.0;
            for (int j = 0; j < N_; ++j) {
                if (pos_[j] >= 0 || is_fixed(j)) continue;
                const double a = row_alpha_[j];
                if (std::abs(a) <= opt_.pivot_tol) continue;
                if (!dual_eligible(j, a, to_lower)) continue;
                if (std::abs(d_[j]) / std::abs(a) > theta1) continue;
                if (bland) {
                    q = j;
                    break;
                }
                if (std::abs(a) > best) {
                    best = std::abs(a);
                    q = j;
                }
            }
            if (q < 0) return false;
            compute_column(q);
            const double arq = col_alpha_[r];
            if (std::abs(arq) <= opt_.pivot_tol * 1e-3) {
                // row and column disagree numerically: reinvert and retry
                reinvert();
                compute_duals(cost);
                compute_primal();
                ++stalled;
                continue;
            }
            const double target = to_lower ? lo_[leaving] : up_[leaving];
            const double step = (x_[leaving] - target) / arq;
            for (int i = 0; i < m_; ++i) x_[head_[i]] -= step * col_alpha_[i];
            x_[q] += step;
            x_[leaving] = target;
            at_upper_[leaving] = to_lower ? 0 : 1;
            const double ratio = d_[q] / arq;
            for (int j = 0; j < N_; ++j)
                if (pos_[j] < 0 && row_alpha_[j] != 0.0) d_[j] -= ratio * row_alpha_[j];
            d_[leaving] = -ratio;
            d_[q] = 0.0;
            pivot(r, q);
            stalled = std::abs(ratio) <= 1e-12 ? stalled + 1 : 0;
        }
    }

    bool dual_eligible(int j, double a, bool to_lower) const
    {
        const bool can_inc = is_free(j) || !at_upper_[j];
        const bool can_dec = is_free(j) || at_upper_[j];
        // x_r = beta - sum a_j x_j
        if (to_lower) return (a < 0 && can_inc) || (a > 0 && can_dec);
        return (a > 0 && can_inc) || (a < 0 && can_dec);
    }
};

/// Solves a pure LP (no binary flags).
inline Solution solve_lp(const LinearProgram& lp, SimplexOptions opt = {})
{
    if (lp.has_binaries()) throw ModelError("solve_lp: program has binary variables; use solve_milp");
    SimplexEngine eng(lp, opt);
    eng.solve();
    Solution s = eng.solution(true);
    eng.notify(s);
    return s;
}

/// LP text dump used for debugging and oracle cross-checks.
inline void write_lp_text(std::ostream& os, const LinearProgram& lp)
{
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    auto name = [&](int j) {
        const auto& v = lp.variables[j].name;
        return v.empty() ? "x" + std::to_string(j) : v;
    };
    os << "min";
    bool any = false;
    for (int j = 0; j < lp.num_vars(); ++j) {
        if (lp.cost[j] == 0.0) continue;
        os << (lp.cost[j] < 0 ? " - " : (any ? " + " : " ")) << num(std::abs(lp.cost[j])) << ' ' << name(j);
        any = true;
    }
    if (lp.cost_offset != 0.0) os << (lp.cost_offset < 0 ? " - " : " + ") << num(std::abs(lp.cost_offset));
    if (!any && lp.cost_offset == 0.0) os << " 0";
    os << "\nsubject to\n";
    for (int i = 0; i < lp.num_constraints(); ++i) {
        const auto& c = lp.constraints[i];
        os << (c.name.empty() ? "c" + std::to_string(i) : c.name) << ':';
        for (std::size_t k = 0; k < c.terms.size(); ++k) {
            double a = c.terms[k].coef;
            os << (a < 0 ? " - " : (k ? " + " : " ")) << num(std::abs(a)) << ' ' << name(c.terms[k].var);
        }
        if (c.terms.empty()) os << " 0";
        os << ' ' << to_string(c.rel) << ' ' << num(c.rhs) << '\n';
    }
    os << "bounds\n";
    for (int j = 0; j < lp.num_vars(); ++j) {
        const auto& v = lp.variables[j];
        os << (std::isfinite(v.lower) ? num(v.lower) : "-inf") << " <= " << name(j) << " <= "
           << (std::isfinite(v.upper) ? num(v.upper) : "inf") << (v.binary ? " binary" : "") << '\n';
    }
    os << "end\n";
}

} // namespace epecs
