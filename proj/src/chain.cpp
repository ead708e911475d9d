#include "gemkit/chain.hpp"

#include <algorithm>
#include <stdexcept>

namespace gemkit {

namespace {

template <typename T>
T smallest_sum(std::span<const T> theta, int q) {
    if (q < 1 || static_cast<std::size_t>(q) > theta.size()) {
        throw std::invalid_argument("ordered q-sum needs 1 <= q <= length(theta)");
    }
    std::vector<T> sorted(theta.begin(), theta.end());
    std::partial_sort(sorted.begin(), sorted.begin() + q, sorted.end());
    T sum = 0;
    for (int i = 0; i < q; ++i) sum += sorted[static_cast<std::size_t>(i)];
    return sum;
}

}  // namespace

double ordered_q_sum(std::span<const double> theta, int q) { return smallest_sum(theta, q); }

std::int64_t ordered_q_sum(std::span<const std::int64_t> theta, int q) { return smallest_sum(theta, q); }

GrowthProfile growth_profile(std::span<const std::size_t> active_counts, int q) {
    GrowthProfile p;
    std::size_t prev = 0;
    for (std::size_t c : active_counts) {
        if (c < prev) throw std::invalid_argument("active arc counts must be non-decreasing");
        p.theta.push_back(static_cast<std::int64_t>(c - prev));
        prev = c;
    }
    p.ordered_q_sum = ordered_q_sum(std::span<const std::int64_t>(p.theta), q);
    return p;
}

ChainSolution empty_chain(const Hypergraph& h, int horizon, int q) {
    ChainSolution c;
    c.model = "gem-e";
    c.q = q;
    const auto periods = static_cast<std::size_t>(horizon);
    c.active_nodes.resize(periods);
    c.active_arcs.resize(periods);
    c.flows.assign(periods, std::vector<double>(h.num_arcs(), 0.0));
    std::vector<std::size_t> counts(periods, 0);
    c.profile = growth_profile(counts, q);
    return c;
}

}  // namespace gemkit
