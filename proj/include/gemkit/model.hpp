#ifndef GEMKIT_MODEL_HPP
#define GEMKIT_MODEL_HPP

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gemkit/hypergraph.hpp"

namespace gemkit {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Raised when an exhaustive routine is asked to run beyond its size guard.
struct GuardExceeded : std::length_error {
    using std::length_error::length_error;
};

/// Raised when a solver assignment cannot be turned into a chain.
struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Variable name -> value, as produced by a solver.
using Assignment = std::map<std::string, double>;

enum class VarKind { Binary, Continuous, Sos2Weight };
enum class Sense { LessEqual, GreaterEqual, Equal };

std::string_view to_string(VarKind kind) noexcept;
std::string_view to_string(Sense sense) noexcept;

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lower = 0.0;
    double upper = 0.0;
    std::string family;  // "y", "z", "f", "theta", ...
    std::string entity;  // node or arc id, empty for period-only families
    int period = 0;
};

struct Term {
    std::size_t var;
    double coef;

    friend bool operator==(const Term&, const Term&) = default;
};

struct Constraint {
    std::string tag;   // model family, e.g. "ctr:7" or "owa"
    std::string name;  // unique row name derived from the tag
    std::vector<Term> terms;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
};

struct Sos2Group {
    std::string name;
    std::vector<std::size_t> vars;
    std::vector<double> weights;
};

/// Solver-agnostic MILP: variable registry, linear rows, SOS2 groups and a
/// linear objective that is always maximized.
class ModelArtifact {
public:
    std::string kind;  // "gem-e", "gem-d", "gem-d-rev" or "lp" for files read back

    std::size_t add_variable(Variable v);
    std::size_t add_constraint(std::string tag, std::vector<Term> terms, Sense sense, double rhs);
    void add_sos2(std::string name, std::vector<std::size_t> vars, std::vector<double> weights);
    void set_objective(std::vector<Term> terms) { objective_ = std::move(terms); }

    const std::vector<Variable>& variables() const noexcept { return variables_; }
    const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
    const std::vector<Sos2Group>& sos2_groups() const noexcept { return sos2_; }
    const std::vector<Term>& objective() const noexcept { return objective_; }

    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;  // throws std::out_of_range
    const Variable& variable(std::string_view name) const { return variables_[index_of(name)]; }

    std::size_t count_tag(std::string_view tag) const;
    std::size_t num_binaries() const;

    /// Objective value of a full assignment indexed like variables().
    double evaluate_objective(const std::vector<double>& values) const;

    /// Adds one equality row tagged "fix" per entry, pinning a variable.
    void fix(const std::map<std::string, double>& values);

    /// Adds a constraint with an explicit row name (used by file readers).
    void add_named_constraint(Constraint c);

private:
    std::vector<Variable> variables_;
    std::unordered_map<std::string, std::size_t> lookup_;
    std::vector<Constraint> constraints_;
    std::unordered_map<std::string, std::size_t> tag_counts_;
    std::vector<Sos2Group> sos2_;
    std::vector<Term> objective_;
};

/// Geometric breakpoint grid on [lo, hi] with the value 1 present.
struct PwlGrid {
    double lo = 0.0;
    double hi = 0.0;
    double ratio = 1.0;  // geometric ratio before 1 is inserted
    std::vector<double> points;
};

PwlGrid make_geometric_grid(double lo, double hi, int k);

/// Upper bound on |interpolant - log| over any segment of the grid.
double pwl_log_error_bound(const PwlGrid& grid);

struct PwlSpec {
    int k = 15;
    std::optional<double> x_lo;       // defaults to eps
    std::optional<double> x_hi;       // defaults to 1/eps
    std::optional<double> flow_hi;    // overrides the per-arc flow-grid upper end
};

struct ModelConfig {
    int horizon = 1;
    int q = 1;
    double eps = 1.0;
    double eps_arc_default = 0.01;
    double delta_arc_default = 100.0;
    std::map<std::string, double> eps_arc;     // per-arc overrides
    std::map<std::string, double> delta_arc;   // per-arc overrides
    std::map<std::string, double> delta_node;  // per-node overrides
    PwlSpec pwl;
    bool reversible = false;

    static ModelConfig gem_e(int horizon, int q);
    static ModelConfig gem_d(int horizon, int q);
};

/// Per-entity bounds with defaults filled in. Throws std::invalid_argument
/// when the configuration violates its invariants.
struct ResolvedConfig {
    std::vector<double> eps_arc;
    std::vector<double> delta_arc;
    std::vector<double> delta_node;
};

ResolvedConfig resolve(const Hypergraph& h, const ModelConfig& cfg);

/// Breakpoints for node states: [eps, 1/eps] unless overridden.
PwlGrid state_grid(const ModelConfig& cfg);

/// Breakpoints for the shifted flow f - z + 1 of an arc whose law has the
/// given coefficient and order: [min(eps_arc, 1), max(kappa (1/eps)^order, 1) + 1].
/// Throws std::invalid_argument if an overridden upper end cannot hold the
/// largest flow the law can produce.
PwlGrid flow_grid(const std::string& arc_id, double kappa, std::int64_t order, double eps_arc,
                  const ModelConfig& cfg);

}  // namespace gemkit

#endif  // GEMKIT_MODEL_HPP
