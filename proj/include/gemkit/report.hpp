#ifndef GEMKIT_REPORT_HPP
#define GEMKIT_REPORT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gemkit/chain.hpp"
#include "gemkit/hypergraph.hpp"
#include "gemkit/instances.hpp"
#include "gemkit/io.hpp"

namespace gemkit {

struct PeriodSummary {
    int period = 0;  // 1-based
    std::vector<NodeIndex> new_nodes;
    std::vector<ArcIndex> new_arcs;
    std::size_t active_nodes = 0;
    std::size_t active_arcs = 0;
};

struct ChainReport {
    int q = 1;
    std::vector<std::int64_t> theta;  // recomputed from the arc sets
    std::int64_t ordered_q_sum = 0;
    std::vector<PeriodSummary> periods;
    std::vector<SectorLabel> labels;
};

/// Growth vector, per-period novelties and the sector classification after
/// the last period. A chain with no periods gives an empty theta, ordered
/// q-sum 0 and all labels UNUSED.
ChainReport make_report(const Hypergraph& h, const ChainSolution& chain);

Json to_json(const Hypergraph& h, const ChainReport& report);

/// Plain-text rendering of the same content.
std::string format_report(const Hypergraph& h, const ChainReport& report);

/**
 * Tripartite picture of period `period` (1-based): input copies of the nodes
 * on the left, arcs as squares in the middle, output copies on the right,
 * everything in instance order. Nodes entering the core in this period are
 * filled saturated (orange on the input side, blue on the output side), nodes
 * already in the core pale, the rest white. Arcs activated in this period get
 * a thick red outline, carried-over arcs a thin pale one. Throws
 * std::out_of_range unless 1 <= period <= horizon.
 */
std::string render_dot(const Hypergraph& h, const ChainSolution& chain, int period);

/// The same picture as a standalone SVG with straight edges.
std::string render_svg(const Hypergraph& h, const ChainSolution& chain, int period);

}  // namespace gemkit

#endif  // GEMKIT_REPORT_HPP
