#ifndef GEMKIT_VERIFY_HPP
#define GEMKIT_VERIFY_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gemkit/chain.hpp"
#include "gemkit/hypergraph.hpp"
#include "gemkit/model.hpp"

namespace gemkit {

/// The economy with raw material R, intermediate I and final good F:
/// a1 = (2R -> I), a2 = (I -> 2F), a3 = (F -> R), all kappa 1.
Hypergraph rif_example();

/// Seven species S1..S7 and six reactions R1..R6 with
/// kappa = (9, 4.4, 6.7, 4.0, 1.5, 6.8).
Hypergraph seven_node_example();

std::vector<NodeIndex> node_indices(const Hypergraph& h, std::span<const std::string> ids);
std::vector<ArcIndex> arc_indices(const Hypergraph& h, std::span<const std::string> ids);

struct SelfSufficiency {
    bool arcs_have_core_output = true;
    bool arcs_have_core_input = true;
    bool nodes_produced = true;
    bool nodes_consumed = true;
    std::vector<std::string> violations;

    bool ok() const noexcept {
        return arcs_have_core_output && arcs_have_core_input && nodes_produced && nodes_consumed;
    }
};

SelfSufficiency check_self_sufficiency(const Hypergraph& h, std::span<const ArcIndex> arcs,
                                       std::span<const NodeIndex> core);

/// min over core nodes of the net balance restricted to `arcs`; +inf for an
/// empty core. `flow` has one entry per arc of h and must be positive exactly
/// on `arcs` (std::invalid_argument otherwise).
double check_realizability(const Hypergraph& h, std::span<const ArcIndex> arcs,
                           std::span<const NodeIndex> core, std::span<const double> flow);

enum class FlowVerdict { Feasible, Infeasible, NumericalFailure };

struct FlowSearch {
    FlowVerdict verdict = FlowVerdict::NumericalFailure;
    std::vector<double> flow;  // one entry per arc of h, zero off `arcs`
};

/// Phase-1 feasibility of eps_arc <= f <= delta_arc on `arcs` with every core
/// node net-produced by at least `margin`.
FlowSearch exists_realizing_flow(const Hypergraph& h, std::span<const ArcIndex> arcs,
                                 std::span<const NodeIndex> core, std::span<const double> eps_arc,
                                 std::span<const double> delta_arc, double margin);

/// kappa_a * prod_v x_v^{S_va}.
double synergy_rate(const Hyperarc& arc, std::span<const double> states);

struct SynergyCheck {
    std::vector<double> residuals;  // |f_a - rate_a| in the order of `arcs`
    double max_residual = 0.0;
    bool ok = true;
};

SynergyCheck check_synergy(const Hypergraph& h, std::span<const ArcIndex> arcs, std::span<const double> flow,
                           std::span<const double> states, double tol);

/**
 * Shows that no positive states make every core node strictly net-produced
 * when flows follow the synergistic law. Two independent arguments:
 * a Farkas certificate (nonnegative node weights summing to one whose
 * weighted net production is <= 0 on every arc, so no positive flow at all
 * works) and an exhaustive log-spaced grid over the input states.
 */
struct SynergyInfeasibility {
    bool farkas_certificate = false;
    std::vector<double> multipliers;  // per core node, in the order given
    std::size_t grid_points = 0;
    bool grid_witness = false;        // a grid point satisfied every inequality

    bool infeasible() const noexcept { return farkas_certificate && !grid_witness; }
};

SynergyInfeasibility check_synergistic_infeasibility(const Hypergraph& h, std::span<const ArcIndex> arcs,
                                                     std::span<const NodeIndex> core, int points_per_state = 10);

/// The system for the seven-node example with R2..R6 active and core
/// {S1, S2, S3, S5, S6}.
SynergyInfeasibility check_synergistic_infeasibility_7node();

/// Certificate for a single candidate structure.
struct Certificate {
    SelfSufficiency self_sufficiency;
    double margin = 0.0;
    std::optional<double> synergy_max_residual;
    double tolerance = 1e-9;

    bool pass() const noexcept;
};

Certificate certify_candidate(const Hypergraph& h, std::span<const ArcIndex> arcs, std::span<const NodeIndex> core,
                              std::span<const double> flow, std::optional<std::span<const double>> states,
                              double tol = 1e-9);

struct PeriodCertificate {
    int period = 0;
    SelfSufficiency self_sufficiency;
    double margin = 0.0;  // +inf for an empty core
    bool flows_ok = true;
    std::optional<double> balance_max_residual;
    std::optional<double> synergy_max_residual;      // |f - rate|
    std::optional<double> synergy_max_log_residual;  // |log f - log rate|
    std::optional<double> synergy_log_tolerance;     // largest per-arc tolerance used
    std::vector<std::string> issues;

    bool pass = true;
};

struct ChainCertificate {
    bool nesting_ok = true;
    bool theta_ok = true;
    std::vector<PeriodCertificate> periods;
    std::vector<std::string> issues;
    double margin_tolerance = 1e-6;

    bool pass() const noexcept;
    double min_margin() const noexcept;
    std::optional<double> synergy_max_residual() const noexcept;
};

/// Re-checks a decoded chain against the definitions, independently of the
/// model that produced it: nesting, growth profile, self-sufficiency,
/// flow bounds and realizability margin >= eps - 1e-6 per period, and when
/// states are present the state recursion, state coupling and the
/// synergistic law up to the piecewise-linear error of the grids.
ChainCertificate certify_chain(const Hypergraph& h, const ModelConfig& cfg, const ChainSolution& chain);

struct OracleResult {
    double objective = 0.0;
    ChainSolution chain;
    std::size_t schedules = 0;
};

/// Exhaustive GEM-E optimum by enumerating monotone activation schedules.
/// Throws GuardExceeded when |arcs| * T > 16.
OracleResult oracle_gem_e(const Hypergraph& h, const ModelConfig& cfg);

struct Structure {
    std::vector<ArcIndex> arcs;
    std::vector<NodeIndex> core;
    std::vector<double> flow;
};

/// All inclusion-minimal self-amplifying (arc set, core) pairs, with flows
/// bounded as in `cfg`. Throws GuardExceeded when |arcs| > 12.
std::vector<Structure> find_minimal(const Hypergraph& h, const ModelConfig& cfg);

}  // namespace gemkit

#endif  // GEMKIT_VERIFY_HPP
