#ifndef GEMKIT_GEM_E_HPP
#define GEMKIT_GEM_E_HPP

#include <span>

#include "gemkit/chain.hpp"
#include "gemkit/hypergraph.hpp"
#include "gemkit/model.hpp"

namespace gemkit {

/**
 * Activation/flow MILP maximizing the ordered q-sum of the growth vector.
 *
 * Rows per family: "ctr:3" |N|(T-1), "ctr:4" |A|(T-1), "ctr:5a"/"ctr:5b"
 * |N|T each, "ctr:6a"/"ctr:6b" |A|T each, "ctr:7" |N|T, "ctr:8a" 2|A|T,
 * "link:theta" T and "owa" T*T.
 */
ModelArtifact build_gem_e(const Hypergraph& h, const ModelConfig& cfg);

/// The same families over a subset of the arcs, optionally without the
/// "ctr:7" rows. The reversible model drops reverse arcs from every family
/// and writes its own realizability rows.
ModelArtifact build_activation_model(const Hypergraph& h, const ModelConfig& cfg, std::span<const ArcIndex> arcs,
                                     bool realizability_rows);

/// Closed-form row counts per family of build_gem_e.
struct GemECounts {
    std::size_t nodes_mono, arcs_mono, node_support, arc_support, realizability, flow_activation, theta_link, owa;
};
GemECounts gem_e_counts(std::size_t nodes, std::size_t arcs, int horizon, int q);

/// True when every row family of `m` has the closed-form count.
bool counts_match(const ModelArtifact& m, const GemECounts& c);

/// Rounds binaries (DecodeError beyond 1e-6), extracts sets and flows,
/// recomputes theta from z and checks it against the solver's theta.
ChainSolution decode_gem_e(const ModelArtifact& artifact, const Assignment& assignment, const Hypergraph& h,
                           const ModelConfig& cfg);

/// decode_gem_e restricted to the given arcs; other arcs stay inactive with
/// zero flow.
ChainSolution decode_activation(const ModelArtifact& artifact, const Assignment& assignment, const Hypergraph& h,
                                const ModelConfig& cfg, std::span<const ArcIndex> arcs);

/// Value of a binary variable rounded to 0/1; DecodeError if missing or fractional.
bool binary_value(const Assignment& assignment, const std::string& name);

}  // namespace gemkit

#endif  // GEMKIT_GEM_E_HPP
