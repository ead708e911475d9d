#ifndef GEMKIT_GEM_D_HPP
#define GEMKIT_GEM_D_HPP

#include <string_view>

#include "gemkit/chain.hpp"
#include "gemkit/hypergraph.hpp"
#include "gemkit/model.hpp"

namespace gemkit {

/**
 * GEM-E plus node states: binaries rho, states x (from t = 0), the state
 * recursion, state/activation coupling and the synergistic flow law in
 * log space with SOS2 breakpoint grids for log(x - rho + 1) and
 * log(f - z + 1). Every input node of an active arc must hold state.
 */
ModelArtifact build_gem_d(const Hypergraph& h, const ModelConfig& cfg);

/// Reversible variant: reverse arcs of detected pairs leave the arc families
/// and their action is carried by frev/grev on the forward arc. Without any
/// pair this is build_gem_d.
ModelArtifact build_gem_d_reversible(const Hypergraph& h, const ModelConfig& cfg);

/// Big-M of the log-law rows: |log kappa| + order * max|log x-grid end| +
/// |log flow-grid hi| + 1.
double log_big_m(double kappa, std::int64_t order, const PwlGrid& xgrid, const PwlGrid& fgrid);

/// Decodes activation sets, flows (reverse flows land on the reverse arc's
/// slot), states and state flags. DecodeError when a state contradicts its
/// flag.
ChainSolution decode_gem_d(const ModelArtifact& artifact, const Assignment& assignment, const Hypergraph& h,
                           const ModelConfig& cfg);

/// "gem-e", "gem-d" or "gem-d-rev"; std::invalid_argument otherwise.
ModelArtifact build_model(const Hypergraph& h, const ModelConfig& cfg, std::string_view kind);
ChainSolution decode_model(const ModelArtifact& artifact, const Assignment& assignment, const Hypergraph& h,
                           const ModelConfig& cfg);

}  // namespace gemkit

#endif  // GEMKIT_GEM_D_HPP
