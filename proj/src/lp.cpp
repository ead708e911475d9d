#include "gemkit/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace gemkit::lp {

namespace {

constexpr double kDropTol = 1e-13;
constexpr double kResidualTol = 1e-7;
constexpr double kBox = 1e4;
constexpr std::size_t kRecomputeEvery = 100;
constexpr std::size_t kDegenerateSwitch = 50;
constexpr int kAttempts = 4;

double scaled_tol(double tol, double bound) { return std::isfinite(bound) ? tol * std::max(1.0, std::abs(bound)) : tol; }

}  // namespace

std::string_view to_string(Status s) noexcept {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::IterationLimit: return "iteration_limit";
        case Status::NumericalFailure: break;
    }
    return "numerical_failure";
}

std::size_t Problem::add_column(double lower, double upper, double cost) {
    col_lower.push_back(lower);
    col_upper.push_back(upper);
    objective.push_back(cost);
    return objective.size() - 1;
}

void Problem::add_row(Row entries, double lower, double upper) {
    rows.push_back(std::move(entries));
    row_lower.push_back(lower);
    row_upper.push_back(upper);
}

Simplex::Simplex(const Problem& problem, Options options)
    : problem_(&problem), options_(options), rows_(problem.num_rows()), cols_(problem.num_cols()) {
    if (problem.col_lower.size() != cols_ || problem.col_upper.size() != cols_ ||
        problem.row_lower.size() != rows_ || problem.row_upper.size() != rows_) {
        throw std::invalid_argument("lp problem has inconsistent dimensions");
    }
    total_ = cols_ + rows_;
    lower_.resize(total_);
    upper_.resize(total_);
    cost_.assign(total_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) {
        lower_[j] = problem.col_lower[j];
        upper_[j] = problem.col_upper[j];
        cost_[j] = problem.objective[j];
        if (lower_[j] > upper_[j]) throw std::invalid_argument("lp column with lower > upper");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        lower_[cols_ + i] = problem.row_lower[i];
        upper_[cols_ + i] = problem.row_upper[i];
        if (lower_[cols_ + i] > upper_[cols_ + i]) throw std::invalid_argument("lp row with lower > upper");
        for (const auto& entry : problem.rows[i]) {
            if (entry.first >= cols_) throw std::invalid_argument("lp row references unknown column");
        }
    }
    value_.assign(total_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) {
        if (std::isfinite(lower_[j])) {
            value_[j] = lower_[j];
        } else if (std::isfinite(upper_[j])) {
            value_[j] = upper_[j];
        }
    }
    reset_to_slack_basis();
}

void Simplex::load_tableau() {
    tableau_.assign(rows_ * total_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (const auto& [j, a] : problem_->rows[i]) tab(i, j) -= a;
        tab(i, cols_ + i) = 1.0;
    }
}

void Simplex::reset_to_slack_basis() {
    load_tableau();
    basis_.resize(rows_);
    position_.assign(total_, -1);
    for (std::size_t i = 0; i < rows_; ++i) {
        basis_[i] = cols_ + i;
        position_[cols_ + i] = static_cast<long>(i);
    }
    for (std::size_t j = 0; j < cols_; ++j) {
        if (value_[j] < lower_[j]) value_[j] = lower_[j];
        if (value_[j] > upper_[j]) value_[j] = upper_[j];
        if (!std::isfinite(value_[j])) value_[j] = 0.0;
    }
    recompute_basic_values();
}

void Simplex::recompute_basic_values() {
    for (std::size_t i = 0; i < rows_; ++i) {
        double v = 0.0;
        const double* row = &tableau_[i * total_];
        for (std::size_t j = 0; j < total_; ++j) {
            if (position_[j] < 0 && value_[j] != 0.0 && row[j] != 0.0) v -= row[j] * value_[j];
        }
        value_[basis_[i]] = v;
    }
}

void Simplex::reduced_costs(std::vector<double>& d) const {
    d.assign(cost_.begin(), cost_.end());
    for (std::size_t i = 0; i < rows_; ++i) {
        const double c = cost_[basis_[i]];
        if (c == 0.0) continue;
        const double* row = &tableau_[i * total_];
        for (std::size_t j = 0; j < total_; ++j) {
            if (row[j] != 0.0) d[j] -= c * row[j];
        }
    }
    for (std::size_t i = 0; i < rows_; ++i) d[basis_[i]] = 0.0;
}

void Simplex::shift_nonbasic(std::size_t col, double target) {
    const double delta = target - value_[col];
    if (delta == 0.0) return;
    value_[col] = target;
    for (std::size_t i = 0; i < rows_; ++i) {
        const double t = tab(i, col);
        if (t != 0.0) value_[basis_[i]] -= t * delta;
    }
}

double Simplex::max_row_residual() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double activity = 0.0;
        double scale = 1.0;
        for (const auto& [j, a] : problem_->rows[i]) {
            activity += a * value_[j];
            scale = std::max(scale, std::abs(a * value_[j]));
        }
        worst = std::max(worst, std::abs(activity - value_[cols_ + i]) / scale);
    }
    return worst;
}

double Simplex::violation(std::size_t var) const {
    return std::max({0.0, lower_[var] - value_[var], value_[var] - upper_[var]});
}

double Simplex::max_basic_infeasibility() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        const std::size_t b = basis_[i];
        worst = std::max(worst, violation(b) / std::max(1.0, std::abs(value_[b])));
    }
    return worst;
}

void Simplex::pivot(std::size_t r, std::size_t col) {
    double* prow = &tableau_[r * total_];
    const double piv = prow[col];
    nonzeros_.clear();
    for (std::size_t c = 0; c < total_; ++c) {
        if (prow[c] == 0.0) continue;
        prow[c] /= piv;
        if (std::abs(prow[c]) < kDropTol) {
            prow[c] = 0.0;
        } else {
            nonzeros_.push_back(c);
        }
    }
    prow[col] = 1.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        if (i == r) continue;
        double* row = &tableau_[i * total_];
        const double factor = row[col];
        if (factor == 0.0) continue;
        for (std::size_t c : nonzeros_) {
            const double v = row[c] - factor * prow[c];
            row[c] = std::abs(v) < kDropTol ? 0.0 : v;
        }
        row[col] = 0.0;
    }
    position_[basis_[r]] = -1;
    basis_[r] = col;
    position_[col] = static_cast<long>(r);
}

bool Simplex::refactor() {
    const std::vector<std::size_t> wanted = basis_;
    std::vector<bool> wanted_flag(total_, false);
    for (std::size_t b : wanted) wanted_flag[b] = true;

    load_tableau();
    std::fill(position_.begin(), position_.end(), -1);
    for (std::size_t i = 0; i < rows_; ++i) {
        basis_[i] = cols_ + i;
        position_[cols_ + i] = static_cast<long>(i);
    }
    for (std::size_t b : wanted) {
        if (b >= cols_) continue;
        std::size_t best_row = rows_;
        double best = options_.pivot_tol;
        for (std::size_t i = 0; i < rows_; ++i) {
            if (wanted_flag[basis_[i]]) continue;
            const double v = std::abs(tab(i, b));
            if (v > best) {
                best = v;
                best_row = i;
            }
        }
        if (best_row == rows_) return false;
        pivot(best_row, b);
    }
    recompute_basic_values();
    return true;
}

void Simplex::set_column_bounds(std::size_t col, double lower, double upper) {
    if (col >= cols_) throw std::out_of_range("lp column index out of range");
    if (lower > upper) throw std::invalid_argument("lp column with lower > upper");
    lower_[col] = lower;
    upper_[col] = upper;
    if (position_[col] >= 0) return;
    double target = value_[col];
    if (target < lower) target = lower;
    if (target > upper) target = upper;
    if (!std::isfinite(target)) target = 0.0;
    shift_nonbasic(col, target);
}

void Simplex::set_basis(const Basis& b) {
    if (b.basic.size() != rows_ || b.values.size() != total_) throw std::invalid_argument("basis has wrong size");
    std::fill(position_.begin(), position_.end(), -1);
    for (std::size_t i = 0; i < rows_; ++i) {
        if (b.basic[i] >= total_ || position_[b.basic[i]] >= 0) throw std::invalid_argument("basis is not a column set");
        basis_[i] = b.basic[i];
        position_[b.basic[i]] = static_cast<long>(i);
    }
    for (std::size_t j = 0; j < total_; ++j) {
        double v = b.values[j];
        if (v < lower_[j]) v = lower_[j];
        if (v > upper_[j]) v = upper_[j];
        value_[j] = std::isfinite(v) ? v : 0.0;
    }
    if (!refactor()) reset_to_slack_basis();
}

// Dual simplex from a basis made dual feasible by moving nonbasic columns to
// the bound their reduced cost prefers. Returns true when the outcome is
// final (infeasible without artificial boxes, or the iteration limit).
bool Simplex::dual_phase() {
    struct Boxed {
        std::size_t col;
        double lower, upper;
    };
    std::vector<Boxed> boxed;
    for (std::size_t j = 0; j < total_; ++j) {
        if (position_[j] >= 0 || std::isfinite(lower_[j]) || std::isfinite(upper_[j])) continue;
        std::size_t best_row = rows_;
        double best = 1e-7;
        for (std::size_t i = 0; i < rows_; ++i) {
            const std::size_t b = basis_[i];
            if (!std::isfinite(lower_[b]) && !std::isfinite(upper_[b])) continue;
            if (std::abs(tab(i, j)) > best) {
                best = std::abs(tab(i, j));
                best_row = i;
            }
        }
        if (best_row == rows_) continue;
        const std::size_t b = basis_[best_row];
        double target = value_[b];
        if (target < lower_[b]) target = lower_[b];
        if (target > upper_[b]) target = upper_[b];
        pivot(best_row, j);
        value_[b] = target;
        recompute_basic_values();
    }

    std::vector<double> d;
    reduced_costs(d);
    const double dtol = options_.optimality_tol;
    for (std::size_t j = 0; j < total_; ++j) {
        if (position_[j] >= 0 || lower_[j] == upper_[j] || std::abs(d[j]) <= dtol) continue;
        const bool up = d[j] > 0.0;
        if (up && value_[j] != upper_[j]) {
            if (!std::isfinite(upper_[j])) {
                boxed.push_back({j, lower_[j], upper_[j]});
                upper_[j] = std::max(value_[j], 0.0) + kBox;
            }
            shift_nonbasic(j, upper_[j]);
        } else if (!up && value_[j] != lower_[j]) {
            if (!std::isfinite(lower_[j])) {
                boxed.push_back({j, lower_[j], upper_[j]});
                lower_[j] = std::min(value_[j], 0.0) - kBox;
            }
            shift_nonbasic(j, lower_[j]);
        }
    }

    // Costs are perturbed (and shifted where a reduced cost has the wrong
    // sign) so the pass does not stall on the many ties of 0/1 models; the
    // true costs come back before the primal cleanup.
    const std::vector<double> true_cost = cost_;
    std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
    auto perturb = [&] {
        for (std::size_t j = 0; j < total_; ++j) {
            seed ^= seed >> 29;
            seed *= 0xbf58476d1ce4e5b9ULL;
            seed += j + 1;
            if (position_[j] >= 0 || lower_[j] == upper_[j]) continue;
            if (value_[j] != lower_[j] && value_[j] != upper_[j]) continue;
            const double delta =
                1e-7 * (1.0 + std::abs(true_cost[j])) * (1.0 + static_cast<double>(seed >> 11) * 0x1.0p-53);
            const double shift = value_[j] == upper_[j] ? delta : -delta;
            cost_[j] += shift;
            d[j] += shift;
        }
    };
    perturb();
    auto restore = [&] {
        for (const auto& bx : boxed) {
            lower_[bx.col] = bx.lower;
            upper_[bx.col] = bx.upper;
        }
        cost_ = true_cost;
    };

    std::size_t since_recompute = 0;
    std::size_t stall = 0;
    bool fresh = false;  // values were just recomputed
    while (true) {
        if (iterations_ >= options_.iteration_limit) {
            restore();
            status_ = Status::IterationLimit;
            return true;
        }
        if (++since_recompute % kRecomputeEvery == 0) {
            recompute_basic_values();
            reduced_costs(d);
        }
        if (stall >= 2 * kDegenerateSwitch) {
            perturb();
            stall = 0;
        }

        std::size_t r = rows_;
        double worst = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            const std::size_t b = basis_[i];
            const double v = value_[b];
            double viol = 0.0;
            if (v < lower_[b] - scaled_tol(options_.feasibility_tol, lower_[b])) {
                viol = lower_[b] - v;
            } else if (v > upper_[b] + scaled_tol(options_.feasibility_tol, upper_[b])) {
                viol = v - upper_[b];
            }
            if (viol > worst) {
                worst = viol;
                r = i;
            }
        }
        if (r == rows_) {
            status_ = Status::Optimal;
            break;
        }
        const std::size_t leaving = basis_[r];
        const bool to_lower = value_[leaving] < lower_[leaving];
        const double bound = to_lower ? lower_[leaving] : upper_[leaving];
        const double* row = &tableau_[r * total_];

        // Candidates j move in an allowed direction that pushes x_leaving
        // toward `bound` (x_leaving changes by -row[j] * dx_j). `dual_slack`
        // is the reduced cost measured in the sign that keeps j optimal.
        double row_max = 0.0;
        for (std::size_t j = 0; j < total_; ++j) {
            if (position_[j] < 0) row_max = std::max(row_max, std::abs(row[j]));
        }
        const double pivot_floor = std::max(1e-7, 1e-9 * row_max);
        auto dual_slack = [&](std::size_t j) { return value_[j] == upper_[j] ? d[j] : -d[j]; };
        auto eligible = [&](std::size_t j) {
            if (position_[j] >= 0 || lower_[j] == upper_[j]) return false;
            const double a = row[j];
            if (std::abs(a) <= pivot_floor) return false;
            const double sgn = to_lower ? -a : a;  // sign of the required dx_j
            return sgn > 0 ? value_[j] < upper_[j] : value_[j] > lower_[j];
        };
        double relaxed = kInf;
        for (std::size_t j = 0; j < total_; ++j) {
            if (!eligible(j)) continue;
            relaxed = std::min(relaxed, (std::max(dual_slack(j), 0.0) + dtol) / std::abs(row[j]));
        }
        if (!std::isfinite(relaxed)) {
            if (!fresh) {
                recompute_basic_values();
                fresh = true;
                continue;
            }
            status_ = Status::Infeasible;
            break;
        }
        fresh = false;
        std::size_t entering = total_;
        double best_alpha = 0.0;
        for (std::size_t j = 0; j < total_; ++j) {
            if (!eligible(j)) continue;
            if (std::max(dual_slack(j), 0.0) / std::abs(row[j]) <= relaxed && std::abs(row[j]) > best_alpha) {
                best_alpha = std::abs(row[j]);
                entering = j;
            }
        }
        if (dual_slack(entering) < 0.0) {
            cost_[entering] -= d[entering];
            d[entering] = 0.0;
        }

        ++iterations_;
        const double a = row[entering];
        const double ratio = d[entering] / a;
        stall = std::abs(ratio) <= 1e-12 ? stall + 1 : 0;
        const double dx = -(bound - value_[leaving]) / a;
        value_[entering] += dx;
        for (std::size_t i = 0; i < rows_; ++i) {
            if (i == r) continue;
            const double t = tab(i, entering);
            if (t != 0.0) value_[basis_[i]] -= t * dx;
        }
        for (std::size_t j = 0; j < total_; ++j) {
            if (row[j] != 0.0) d[j] -= ratio * row[j];
        }
        d[entering] = 0.0;
        d[leaving] = -ratio;
        pivot(r, entering);
        value_[leaving] = bound;
    }

    restore();
    // optimal here still needs the primal cleanup under the true costs
    return status_ == Status::Infeasible && boxed.empty();
}

// Primal simplex with a composite phase 1; sets status_.
void Simplex::primal_phase() {
    std::vector<double> basic_cost(rows_, 0.0);
    std::vector<double> reduced(total_, 0.0);
    std::size_t degenerate_run = 0;
    std::size_t since_recompute = 0;
    bool fresh = false;

    while (true) {
        if (iterations_ >= options_.iteration_limit) {
            status_ = Status::IterationLimit;
            return;
        }
        if (++since_recompute % kRecomputeEvery == 0) recompute_basic_values();

        bool infeasible = false;
        for (std::size_t i = 0; i < rows_; ++i) {
            const std::size_t b = basis_[i];
            if (value_[b] < lower_[b] - scaled_tol(options_.feasibility_tol, lower_[b])) {
                basic_cost[i] = 1.0;
                infeasible = true;
            } else if (value_[b] > upper_[b] + scaled_tol(options_.feasibility_tol, upper_[b])) {
                basic_cost[i] = -1.0;
                infeasible = true;
            } else {
                basic_cost[i] = 0.0;
            }
        }
        const bool phase_two = !infeasible;
        if (phase_two) {
            for (std::size_t i = 0; i < rows_; ++i) basic_cost[i] = cost_[basis_[i]];
        }

        for (std::size_t j = 0; j < total_; ++j) reduced[j] = phase_two ? cost_[j] : 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            const double c = basic_cost[i];
            if (c == 0.0) continue;
            const double* row = &tableau_[i * total_];
            for (std::size_t j = 0; j < total_; ++j) {
                if (row[j] != 0.0) reduced[j] -= c * row[j];
            }
        }

        const bool bland = options_.bland || degenerate_run >= kDegenerateSwitch;
        std::size_t entering = total_;
        double best_score = 0.0;
        for (std::size_t j = 0; j < total_; ++j) {
            if (position_[j] >= 0 || lower_[j] == upper_[j]) continue;
            const double d = reduced[j];
            if (std::abs(d) <= options_.optimality_tol) continue;
            const bool can_increase = value_[j] < upper_[j];
            const bool can_decrease = value_[j] > lower_[j];
            if ((d > 0 && !can_increase) || (d < 0 && !can_decrease)) continue;
            if (bland) {
                entering = j;
                break;
            }
            if (std::abs(d) > best_score) {
                best_score = std::abs(d);
                entering = j;
            }
        }
        if (entering == total_) {
            if (!phase_two && !fresh) {
                recompute_basic_values();
                fresh = true;
                continue;
            }
            status_ = phase_two ? Status::Optimal : Status::Infeasible;
            return;
        }
        fresh = false;

        const double dir = reduced[entering] > 0 ? 1.0 : -1.0;
        const double flip = dir > 0 ? upper_[entering] - value_[entering] : value_[entering] - lower_[entering];

        // distance the entering variable may move before row i blocks, with
        // the bound relaxed by `slack`
        auto limit_of = [&](std::size_t i, double alpha, double slack, double& bound) {
            const std::size_t b = basis_[i];
            const double v = value_[b];
            const bool below = basic_cost[i] > 0 && !phase_two;
            const bool above = basic_cost[i] < 0 && !phase_two;
            if (below) {
                if (alpha > 0) {
                    bound = lower_[b];
                    return (bound + slack - v) / alpha;
                }
            } else if (above) {
                if (alpha < 0) {
                    bound = upper_[b];
                    return (bound - slack - v) / alpha;
                }
            } else if (alpha > 0 && std::isfinite(upper_[b])) {
                bound = upper_[b];
                return std::max(0.0, (bound + slack - v) / alpha);
            } else if (alpha < 0 && std::isfinite(lower_[b])) {
                bound = lower_[b];
                return std::max(0.0, (bound - slack - v) / alpha);
            }
            return kInf;
        };

        double step = flip;
        std::size_t leave_row = rows_;
        double leave_bound = 0.0;
        if (bland) {
            double leave_alpha = 0.0;
            for (std::size_t i = 0; i < rows_; ++i) {
                const double alpha = -tab(i, entering) * dir;
                if (std::abs(alpha) <= options_.pivot_tol) continue;
                double bound = 0.0;
                const double limit = limit_of(i, alpha, 0.0, bound);
                if (!std::isfinite(limit)) continue;
                bool take = false;
                if (leave_row == rows_) {
                    take = limit <= step;
                } else if (limit < step - 1e-12) {
                    take = true;
                } else if (limit <= step + 1e-12) {
                    take = basis_[i] < basis_[leave_row];
                }
                if (take) {
                    step = std::min(step, limit);
                    leave_row = i;
                    leave_alpha = alpha;
                    leave_bound = bound;
                }
            }
            (void)leave_alpha;
        } else {
            double relaxed = flip;
            for (std::size_t i = 0; i < rows_; ++i) {
                const double alpha = -tab(i, entering) * dir;
                if (std::abs(alpha) <= options_.pivot_tol) continue;
                double bound = 0.0;
                const double slack = scaled_tol(options_.feasibility_tol, value_[basis_[i]]);
                relaxed = std::min(relaxed, limit_of(i, alpha, slack, bound));
            }
            double best_alpha = 0.0;
            for (std::size_t i = 0; i < rows_; ++i) {
                const double alpha = -tab(i, entering) * dir;
                if (std::abs(alpha) <= options_.pivot_tol) continue;
                double bound = 0.0;
                const double limit = limit_of(i, alpha, 0.0, bound);
                if (limit <= relaxed && std::abs(alpha) > best_alpha) {
                    best_alpha = std::abs(alpha);
                    leave_row = i;
                    leave_bound = bound;
                    step = std::max(0.0, limit);
                }
            }
            if (leave_row == rows_) step = flip;
        }

        if (!std::isfinite(step)) {
            status_ = phase_two ? Status::Unbounded : Status::NumericalFailure;
            return;
        }

        ++iterations_;
        degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;
        value_[entering] += dir * step;
        if (step != 0.0) {
            for (std::size_t i = 0; i < rows_; ++i) {
                const double t = tab(i, entering);
                if (t != 0.0) value_[basis_[i]] -= t * dir * step;
            }
        }
        if (leave_row == rows_) {
            value_[entering] = dir > 0 ? upper_[entering] : lower_[entering];
            continue;
        }
        const std::size_t leaving = basis_[leave_row];
        pivot(leave_row, entering);
        value_[leaving] = leave_bound;
    }
}

Status Simplex::solve() {
    iterations_ = 0;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const bool done = !options_.bland && dual_phase();
        if (!done && status_ != Status::IterationLimit) primal_phase();
            if (status_ == Status::IterationLimit) return status_;
        recompute_basic_values();
        const bool clean = max_row_residual() <= kResidualTol;
        if (clean && (status_ != Status::Optimal || max_basic_infeasibility() <= 1e3 * options_.feasibility_tol)) {
            return status_;
        }
        if (!clean && !refactor()) reset_to_slack_basis();
    }
    status_ = Status::NumericalFailure;
    return status_;
}

double Simplex::objective_value() const {
    double obj = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) obj += cost_[j] * value_[j];
    return obj;
}

std::vector<double> Simplex::column_values() const {
    return {value_.begin(), value_.begin() + static_cast<std::ptrdiff_t>(cols_)};
}

Result solve(const Problem& problem, Options options) {
    Simplex simplex(problem, options);
    Result result;
    result.status = simplex.solve();
    if (result.status == Status::Optimal) {
        result.objective = simplex.objective_value();
        result.x = simplex.column_values();
    }
    return result;
}

}  // namespace gemkit::lp
