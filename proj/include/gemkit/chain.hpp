#ifndef GEMKIT_CHAIN_HPP
#define GEMKIT_CHAIN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gemkit/hypergraph.hpp"

namespace gemkit {

/// Sum of the q smallest entries. Throws std::invalid_argument unless
/// 1 <= q <= theta.size().
double ordered_q_sum(std::span<const double> theta, int q);
std::int64_t ordered_q_sum(std::span<const std::int64_t> theta, int q);

struct GrowthProfile {
    std::vector<std::int64_t> theta;  // arcs activated for the first time, per period
    std::int64_t ordered_q_sum = 0;
};

/// theta from per-period active arc counts (which must be non-decreasing).
GrowthProfile growth_profile(std::span<const std::size_t> active_counts, int q);

/**
 * Decoded nested chain. Period t (1-based) lives at index t-1 of the
 * per-period vectors; states has T+1 entries with the initial state first.
 * flows and states are indexed by arc / node index of the hypergraph.
 */
struct ChainSolution {
    std::string model;  // "gem-e", "gem-d", "gem-d-rev"
    int q = 1;
    std::vector<std::vector<NodeIndex>> active_nodes;
    std::vector<std::vector<ArcIndex>> active_arcs;
    std::vector<std::vector<double>> flows;
    std::vector<std::vector<double>> states;       // empty for gem-e
    std::vector<std::vector<bool>> state_flags;    // empty for gem-e
    GrowthProfile profile;

    int horizon() const noexcept { return static_cast<int>(active_arcs.size()); }
    bool has_states() const noexcept { return !states.empty(); }
};

/// An all-inactive chain of the given horizon.
ChainSolution empty_chain(const Hypergraph& h, int horizon, int q);

}  // namespace gemkit

#endif  // GEMKIT_CHAIN_HPP
