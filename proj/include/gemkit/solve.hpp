#ifndef GEMKIT_SOLVE_HPP
#define GEMKIT_SOLVE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "gemkit/model.hpp"

namespace gemkit {

enum class RunStatus { Optimal, Feasible, Infeasible, Timeout, Error };

std::string_view to_string(RunStatus s) noexcept;

struct SolverRun {
    std::string artifact_digest;  // sha256 of the model file text
    RunStatus status = RunStatus::Error;
    std::optional<double> objective;  // recomputed from the assignment
    Assignment assignment;
    double wall_time = 0.0;
    std::size_t nodes = 0;  // branch-and-bound nodes, internal solver only
    std::string message;
};

/// CPLEX LP text: Maximize, Subject To (one named row per constraint), Bounds,
/// Binary, SOS (S2, weights = breakpoint index), End. Numbers use 17
/// significant digits and lines stay within 255 characters. Throws
/// std::invalid_argument for names the format cannot carry.
std::string format_lp(const ModelArtifact& m);
void emit_lp(const ModelArtifact& m, const std::filesystem::path& path);

/// Free-format MPS with OBJSENSE MAX, BV bounds for binaries and an SOS section.
std::string format_mps(const ModelArtifact& m);
void emit_mps(const ModelArtifact& m, const std::filesystem::path& path);

/// Readers for the two dialects above. Variables appear in order of first
/// mention; constraint tags equal their row names; kind is "lp".
ModelArtifact parse_lp(std::string_view text);
ModelArtifact parse_mps(std::string_view text);
ModelArtifact read_model(const std::filesystem::path& path);  // by extension

/// Rewrites every SOS2 group with the incremental binary formulation: for
/// K members, binaries d_1..d_{K-2} named sosbin_<group>_<k> with
/// sum_{j>k+1} lambda_j <= d_k <= sum_{j>k} lambda_j (rows tagged
/// "sos2:incremental"). For solvers without SOS2 support.
ModelArtifact sos2_to_binaries(const ModelArtifact& m);

struct InternalOptions {
    std::size_t guard = 24;  // maximum number of binaries
    bool allow_sos2 = false;  // branch on SOS2 groups instead of rejecting them
    std::optional<bool> integral_objective;  // default: true for gem-* kinds
    double time_limit = kInfinity;  // seconds
    std::size_t node_limit = 10'000'000;
};

/**
 * Depth-first branch and bound over the binaries with LP bounds from the
 * bounded simplex (warm-started between nodes). Throws GuardExceeded above
 * the guard and std::invalid_argument for SOS2 groups unless allowed.
 */
SolverRun solve_internal(const ModelArtifact& m, const InternalOptions& opts = {});

/**
 * Runs `command_template` with {model}, {solution} and {timelimit}
 * substituted and reads "<name> <value>" lines back. Lines starting with
 * '#' are comments; "# status OPTIMAL|FEASIBLE|INFEASIBLE|TIMEOUT" and
 * "# objective <v>" are recognized. Unlisted variables are zero.
 */
SolverRun run_external(const std::filesystem::path& model_file, const std::string& command_template,
                       double time_limit, const ModelArtifact& m);

/// Parses a solution file body as run_external does (exit code 0 assumed).
SolverRun parse_solution(std::string_view text, const ModelArtifact& m);

/// Maximum violation of rows and bounds by a full assignment.
double max_violation(const ModelArtifact& m, const Assignment& a);

}  // namespace gemkit

#endif  // GEMKIT_SOLVE_HPP
