#ifndef GEMKIT_LP_HPP
#define GEMKIT_LP_HPP

#include <cstddef>
#include <limits>
#include <string_view>
#include <utility>
#include <vector>

namespace gemkit::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

std::string_view to_string(Status s) noexcept;

using Row = std::vector<std::pair<std::size_t, double>>;

/// Linear program in bounded form: maximize c.x subject to
/// row_lower <= A x <= row_upper and col_lower <= x <= col_upper.
/// Infinite bounds are expressed with +/- kInf.
struct Problem {
    std::vector<double> col_lower;
    std::vector<double> col_upper;
    std::vector<double> objective;
    std::vector<Row> rows;
    std::vector<double> row_lower;
    std::vector<double> row_upper;

    std::size_t num_cols() const noexcept { return objective.size(); }
    std::size_t num_rows() const noexcept { return rows.size(); }

    std::size_t add_column(double lower, double upper, double cost = 0.0);
    void add_row(Row entries, double lower, double upper);
};

struct Options {
    bool bland = false;  // smallest-index pricing and ratio ties throughout
    std::size_t iteration_limit = 200000;
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-9;
};

/**
 * Dense-tableau bounded-variable simplex.
 *
 * Rows are turned into equalities with one bounded slack each, so the
 * all-slack basis is always available as a starting point. By default a
 * dual simplex runs first: nonbasic columns are put on the bound their
 * reduced cost asks for (columns lacking that bound get a temporary box of
 * width 1e4) and costs are perturbed slightly, so the basis is dual
 * feasible and bound changes between solves keep it that way. A primal
 * simplex (phase 1 minimizes the sum of bound violations of the basic
 * variables) finishes under the true costs; with `bland` set only the primal
 * simplex runs, with smallest-index pricing and ratio ties. Drift in the
 * tableau triggers a refactorization, and a singular refactorization
 * restarts from the slack basis.
 */
class Simplex {
public:
    explicit Simplex(const Problem& problem, Options options = {});

    Status solve();

    Status status() const noexcept { return status_; }
    double objective_value() const;
    std::vector<double> column_values() const;
    std::size_t iterations() const noexcept { return iterations_; }

    void set_column_bounds(std::size_t col, double lower, double upper);

    /// Basic columns (slacks numbered after the structural columns) and the
    /// values of all columns; restoring one refactorizes the tableau.
    struct Basis {
        std::vector<std::size_t> basic;
        std::vector<double> values;
    };
    Basis basis() const { return {basis_, value_}; }
    void set_basis(const Basis& b);
    double column_lower(std::size_t col) const { return lower_.at(col); }
    double column_upper(std::size_t col) const { return upper_.at(col); }

private:
    bool dual_phase();
    void primal_phase();
    bool refactor();
    void reset_to_slack_basis();
    void load_tableau();
    void recompute_basic_values();
    void reduced_costs(std::vector<double>& d) const;
    void shift_nonbasic(std::size_t col, double target);
    double max_row_residual() const;
    double max_basic_infeasibility() const;
    double violation(std::size_t var) const;
    void pivot(std::size_t row, std::size_t col);
    double& tab(std::size_t r, std::size_t c) { return tableau_[r * total_ + c]; }
    double tab(std::size_t r, std::size_t c) const { return tableau_[r * total_ + c]; }

    const Problem* problem_;
    Options options_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t total_ = 0;
    std::vector<double> tableau_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<double> cost_;
    std::vector<double> value_;
    std::vector<std::size_t> basis_;   // basic variable of each row
    std::vector<long> position_;       // row of a basic variable, -1 otherwise
    std::vector<std::size_t> nonzeros_;
    std::size_t iterations_ = 0;
    Status status_ = Status::NumericalFailure;
};

struct Result {
    Status status = Status::NumericalFailure;
    double objective = 0.0;
    std::vector<double> x;
};

Result solve(const Problem& problem, Options options = {});

}  // namespace gemkit::lp

#endif  // GEMKIT_LP_HPP
