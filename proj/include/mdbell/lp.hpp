#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdbell/chsh.hpp"

namespace mdbell {

/// Raised when the simplex solver detects numerical breakdown. A failed solve
/// never returns a silently wrong answer.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A deterministic strategy: fixed +-1 values for the four observables.
struct Strategy {
    int v_x;
    int v_xp;
    int v_y;
    int v_yp;
};

/// All 16 strategies in a fixed order: index bits (msb..lsb) map to
/// (v_x, v_x', v_y, v_y'), bit 0 -> +1, bit 1 -> -1. Strategy 0 is all +1.
inline std::array<Strategy, 16> enumerate_strategies() {
    std::array<Strategy, 16> out{};
    for (int i = 0; i < 16; ++i) {
        auto sign_of_bit = [i](int bit) { return (i >> bit) & 1 ? -1 : +1; };
        out[i] = Strategy{sign_of_bit(3), sign_of_bit(2), sign_of_bit(1), sign_of_bit(0)};
    }
    return out;
}

enum class Rel { Eq, Le, Ge };

struct LpRow {
    std::vector<double> coeffs;
    Rel rel = Rel::Eq;
    double rhs = 0.0;
};

/// Minimize objective . x subject to the rows, x >= 0.
struct LpProblem {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<LpRow> rows;
    std::string target_description;
};

enum class LpStatus { Optimal, Infeasible };

struct SimplexResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double objective = 0.0;
    double dual_objective = 0.0;
    std::vector<double> duals;
    std::size_t iterations = 0;
};

namespace detail {

constexpr double kLpTol = 1e-9;

/// Dense two-phase tableau simplex with Bland's anti-cycling rule.
class SimplexTableau {
  public:
    explicit SimplexTableau(const LpProblem& problem) {
        const std::size_t n = problem.num_vars;
        if (problem.objective.size() != n) {
            throw std::invalid_argument("simplex_solve: objective width mismatch");
        }
        for (const LpRow& row : problem.rows) {
            if (row.coeffs.size() != n) {
                throw std::invalid_argument("simplex_solve: row width mismatch");
            }
        }
        m_ = problem.rows.size();

        std::size_t num_slacks = 0;
        for (const LpRow& row : problem.rows) {
            if (row.rel != Rel::Eq) {
                ++num_slacks;
            }
        }
        n_struct_ = n + num_slacks;
        cols_ = n_struct_ + m_;  // one artificial per row

        tab_.assign(m_, std::vector<double>(cols_ + 1, 0.0));
        basis_.resize(m_);
        art_col_.resize(m_);
        cost_.assign(cols_ + 1, 0.0);

        std::size_t slack = n;
        for (std::size_t i = 0; i < m_; ++i) {
            const LpRow& row = problem.rows[i];
            double sign = row.rhs < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                tab_[i][j] = sign * row.coeffs[j];
            }
            tab_[i][cols_] = sign * row.rhs;
            if (row.rel != Rel::Eq) {
                // <= gets +slack, >= gets -surplus (before the sign fix).
                const double s = (row.rel == Rel::Le ? 1.0 : -1.0) * sign;
                tab_[i][slack] = s;
                ++slack;
            }
            const std::size_t art = n_struct_ + i;
            tab_[i][art] = 1.0;
            basis_[i] = art;
            art_col_[i] = art;
        }

        obj_.assign(n_struct_, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            obj_[j] = problem.objective[j];
        }

        original_b_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            original_b_[i] = tab_[i][cols_];
        }
    }

    SimplexResult solve() {
        // Phase 1: minimize the sum of artificials starting from the artificial basis.
        cost_.assign(cols_ + 1, 0.0);
        for (std::size_t j = n_struct_; j < cols_; ++j) {
            cost_[j] = 1.0;
        }
        for (std::size_t i = 0; i < m_; ++i) {
            subtract_row(cost_, tab_[i], 1.0);
        }
        run_phase();
        if (-cost_[cols_] > 1e-7) {
            SimplexResult result;
            result.status = LpStatus::Infeasible;
            result.iterations = iterations_;
            return result;
        }
        drive_out_artificials();

        // Phase 2: minimize the real objective from the feasible basis.
        cost_.assign(cols_ + 1, 0.0);
        for (std::size_t j = 0; j < n_struct_; ++j) {
            cost_[j] = obj_[j];
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_struct_ && cost_[basis_[i]] != 0.0) {
                subtract_row(cost_, tab_[i], cost_[basis_[i]]);
            }
        }
        run_phase();

        return extract();
    }

  private:
    static void subtract_row(std::vector<double>& target, const std::vector<double>& row,
                             double factor) {
        for (std::size_t j = 0; j < target.size(); ++j) {
            target[j] -= factor * row[j];
        }
    }

    void pivot(std::size_t r, std::size_t s) {
        const double inv = 1.0 / tab_[r][s];
        if (!std::isfinite(inv) || std::fabs(tab_[r][s]) < 1e-11) {
            throw SolverError("simplex_solve: pivot element too small");
        }
        for (double& v : tab_[r]) {
            v *= inv;
        }
        tab_[r][s] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i != r && tab_[i][s] != 0.0) {
                subtract_row(tab_[i], tab_[r], tab_[i][s]);
                tab_[i][s] = 0.0;
            }
        }
        if (cost_[s] != 0.0) {
            subtract_row(cost_, tab_[r], cost_[s]);
            cost_[s] = 0.0;
        }
        basis_[r] = s;
    }

    // Bland's rule: entering = lowest eligible index, leaving = lowest basis
    // index among the minimum-ratio rows. Artificials never re-enter once they
    // have left the basis.
    void run_phase() {
        const std::size_t enter_limit = n_struct_;
        for (;;) {
            if (++iterations_ > 100000) {
                throw SolverError("simplex_solve: iteration limit exceeded");
            }
            std::size_t s = cols_;
            for (std::size_t j = 0; j < enter_limit; ++j) {
                if (cost_[j] < -kLpTol) {
                    s = j;
                    break;
                }
            }
            if (s == cols_) {
                return;  // optimal for this phase
            }
            std::size_t r = m_;
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (tab_[i][s] > kLpTol) {
                    const double ratio = tab_[i][cols_] / tab_[i][s];
                    if (r == m_ || ratio < best_ratio - kLpTol ||
                        (ratio < best_ratio + kLpTol && basis_[i] < basis_[r])) {
                        r = i;
                        best_ratio = ratio;
                    }
                }
            }
            if (r == m_) {
                throw SolverError("simplex_solve: unbounded direction encountered");
            }
            pivot(r, s);
        }
    }

    // Replace basic artificials by structural variables; a row that admits no
    // such pivot is an exact 0 = 0 redundancy and is dropped.
    void drive_out_artificials() {
        for (std::size_t i = 0; i < m_;) {
            if (basis_[i] < n_struct_) {
                ++i;
                continue;
            }
            std::size_t s = cols_;
            for (std::size_t j = 0; j < n_struct_; ++j) {
                if (std::fabs(tab_[i][j]) > kLpTol) {
                    s = j;
                    break;
                }
            }
            if (s != cols_) {
                pivot(i, s);
                ++i;
            } else {
                if (std::fabs(tab_[i][cols_]) > 1e-7) {
                    throw SolverError("simplex_solve: inconsistent redundant row");
                }
                tab_.erase(tab_.begin() + static_cast<std::ptrdiff_t>(i));
                basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
                art_col_.erase(art_col_.begin() + static_cast<std::ptrdiff_t>(i));
                original_b_.erase(original_b_.begin() + static_cast<std::ptrdiff_t>(i));
                --m_;
            }
        }
    }

    SimplexResult extract() const {
        SimplexResult result;
        result.status = LpStatus::Optimal;
        result.iterations = iterations_;
        result.x.assign(n_struct_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] >= n_struct_) {
                if (std::fabs(tab_[i][cols_]) > 1e-7) {
                    throw SolverError("simplex_solve: artificial left basic at nonzero level");
                }
                continue;
            }
            result.x[basis_[i]] = tab_[i][cols_];
        }
        for (std::size_t j = 0; j < n_struct_; ++j) {
            result.objective += obj_[j] * result.x[j];
        }
        // Duals read off the artificial columns: artificial i started as e_i
        // with zero phase-2 cost, so its reduced cost is -y_i. The dual value
        // y . b uses the standardized rhs recorded at construction.
        result.duals.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            result.duals[i] = -cost_[art_col_[i]];
            result.dual_objective += result.duals[i] * original_b_[i];
        }
        return result;
    }

    std::size_t m_ = 0;
    std::size_t n_struct_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::vector<double>> tab_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> art_col_;
    std::vector<double> cost_;
    std::vector<double> obj_;
    std::vector<double> original_b_;
    std::size_t iterations_ = 0;
};

}  // namespace detail

/// Solves min objective . x, rows, x >= 0 by dense two-phase simplex.
inline SimplexResult simplex_solve(const LpProblem& problem) {
    detail::SimplexTableau tableau(problem);
    return tableau.solve();
}

/// Result of a minimal-measurement-dependence LP over the 16 deterministic
/// strategies: per-context distributions and the minimized variational distance.
struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double m_star = 0.0;
    std::array<double, 16> rho_x{};
    std::array<double, 16> rho_xp{};
    CorrelatorQuad achieved;
    double duality_gap = 0.0;
    std::size_t iterations = 0;
};

namespace detail {

// Variable layout: rho(s|X) in [0,16), rho(s|X') in [16,32), t_s in [32,48).
inline LpProblem minimal_m_base_problem() {
    LpProblem problem;
    problem.num_vars = 48;
    problem.objective.assign(48, 0.0);
    for (std::size_t s = 0; s < 16; ++s) {
        problem.objective[32 + s] = 1.0;
    }

    LpRow norm_x{std::vector<double>(48, 0.0), Rel::Eq, 1.0};
    LpRow norm_xp{std::vector<double>(48, 0.0), Rel::Eq, 1.0};
    for (std::size_t s = 0; s < 16; ++s) {
        norm_x.coeffs[s] = 1.0;
        norm_xp.coeffs[16 + s] = 1.0;
    }
    problem.rows.push_back(std::move(norm_x));
    problem.rows.push_back(std::move(norm_xp));

    // t_s >= |rho(s|X) - rho(s|X')| linearized as two one-sided rows.
    for (std::size_t s = 0; s < 16; ++s) {
        LpRow up{std::vector<double>(48, 0.0), Rel::Ge, 0.0};
        up.coeffs[32 + s] = 1.0;
        up.coeffs[s] = -1.0;
        up.coeffs[16 + s] = 1.0;
        problem.rows.push_back(std::move(up));

        LpRow down{std::vector<double>(48, 0.0), Rel::Ge, 0.0};
        down.coeffs[32 + s] = 1.0;
        down.coeffs[s] = 1.0;
        down.coeffs[16 + s] = -1.0;
        problem.rows.push_back(std::move(down));
    }
    return problem;
}

inline LpSolution finish_minimal_m(const LpProblem& problem) {
    const SimplexResult sim = simplex_solve(problem);
    LpSolution solution;
    solution.status = sim.status;
    solution.iterations = sim.iterations;
    if (sim.status != LpStatus::Optimal) {
        return solution;
    }

    double recomputed_m = 0.0;
    double sum_x = 0.0;
    double sum_xp = 0.0;
    for (std::size_t s = 0; s < 16; ++s) {
        const double px = sim.x[s];
        const double pxp = sim.x[16 + s];
        if (px < -kLpTol || pxp < -kLpTol) {
            throw SolverError("minimal-m LP: negative probability in solution");
        }
        solution.rho_x[s] = std::fmax(0.0, px);
        solution.rho_xp[s] = std::fmax(0.0, pxp);
        sum_x += px;
        sum_xp += pxp;
        recomputed_m += std::fabs(px - pxp);
    }
    if (std::fabs(sum_x - 1.0) > 1e-9 || std::fabs(sum_xp - 1.0) > 1e-9) {
        throw SolverError("minimal-m LP: solution distributions not normalized");
    }
    if (std::fabs(recomputed_m - sim.objective) > 1e-9) {
        throw SolverError("minimal-m LP: objective disagrees with recomputed distance");
    }
    solution.m_star = sim.objective;
    solution.duality_gap = std::fabs(sim.objective - sim.dual_objective);
    if (solution.duality_gap > 1e-8) {
        throw SolverError("minimal-m LP: duality gap exceeds tolerance");
    }

    const auto strategies = enumerate_strategies();
    CorrelatorQuad quad;
    for (std::size_t s = 0; s < 16; ++s) {
        const Strategy& st = strategies[s];
        quad.c_xy += solution.rho_x[s] * st.v_x * st.v_y;
        quad.c_xyp += solution.rho_x[s] * st.v_x * st.v_yp;
        quad.c_xpy += solution.rho_xp[s] * st.v_xp * st.v_y;
        quad.c_xpyp += solution.rho_xp[s] * st.v_xp * st.v_yp;
    }
    solution.achieved = quad;
    return solution;
}

}  // namespace detail

/// Minimal one-sided measurement dependence required to reach CHSH value
/// target_b on the canonical variant: minimize sum_s |rho(s|X) - rho(s|X')|
/// subject to <XY> + <XY'> + <X'Y> - <X'Y'> = target_b, where the first two
/// correlators use rho(.|X) and the last two rho(.|X'). The equality carries no
/// outer absolute value: target_b >= 2 fixes the sign.
inline LpSolution min_m_for_chsh(double target_b) {
    if (!(target_b >= 2.0 && target_b <= 4.0)) {
        throw std::invalid_argument("min_m_for_chsh: target must lie in [2, 4]");
    }
    LpProblem problem = detail::minimal_m_base_problem();
    LpRow chsh_row{std::vector<double>(48, 0.0), Rel::Eq, target_b};
    const auto strategies = enumerate_strategies();
    for (std::size_t s = 0; s < 16; ++s) {
        const Strategy& st = strategies[s];
        chsh_row.coeffs[s] = static_cast<double>(st.v_x * st.v_y + st.v_x * st.v_yp);
        chsh_row.coeffs[16 + s] = static_cast<double>(st.v_xp * st.v_y - st.v_xp * st.v_yp);
    }
    problem.rows.insert(problem.rows.begin() + 2, std::move(chsh_row));
    problem.target_description = "chsh";

    LpSolution solution = detail::finish_minimal_m(problem);
    if (solution.status == LpStatus::Optimal) {
        const double achieved_b = solution.achieved.c_xy + solution.achieved.c_xyp +
                                  solution.achieved.c_xpy - solution.achieved.c_xpyp;
        if (std::fabs(achieved_b - target_b) > 1e-9) {
            throw SolverError("min_m_for_chsh: solution misses the target value");
        }
    }
    return solution;
}

/// Minimal one-sided measurement dependence reproducing a full correlator
/// quadruple: the two X-row correlators constrain rho(.|X), the two X'-row
/// correlators constrain rho(.|X').
inline LpSolution min_m_for_correlators(const CorrelatorQuad& quad) {
    const double targets[4] = {quad.c_xy, quad.c_xyp, quad.c_xpy, quad.c_xpyp};
    for (const double c : targets) {
        if (!(std::fabs(c) <= 1.0 + 1e-12)) {
            throw std::invalid_argument("min_m_for_correlators: correlators must lie in [-1, 1]");
        }
    }
    LpProblem problem = detail::minimal_m_base_problem();
    const auto strategies = enumerate_strategies();
    for (int which = 3; which >= 0; --which) {
        LpRow row{std::vector<double>(48, 0.0), Rel::Eq, targets[which]};
        for (std::size_t s = 0; s < 16; ++s) {
            const Strategy& st = strategies[s];
            switch (which) {
                case 0: row.coeffs[s] = static_cast<double>(st.v_x * st.v_y); break;
                case 1: row.coeffs[s] = static_cast<double>(st.v_x * st.v_yp); break;
                case 2: row.coeffs[16 + s] = static_cast<double>(st.v_xp * st.v_y); break;
                case 3: row.coeffs[16 + s] = static_cast<double>(st.v_xp * st.v_yp); break;
            }
        }
        problem.rows.insert(problem.rows.begin() + 2, std::move(row));
    }
    problem.target_description = "correlators";

    LpSolution solution = detail::finish_minimal_m(problem);
    if (solution.status == LpStatus::Optimal) {
        const double errs[4] = {solution.achieved.c_xy - quad.c_xy,
                                solution.achieved.c_xyp - quad.c_xyp,
                                solution.achieved.c_xpy - quad.c_xpy,
                                solution.achieved.c_xpyp - quad.c_xpyp};
        for (const double e : errs) {
            if (std::fabs(e) > 1e-9) {
                throw SolverError("min_m_for_correlators: solution misses a target correlator");
            }
        }
    }
    return solution;
}

}  // namespace mdbell
