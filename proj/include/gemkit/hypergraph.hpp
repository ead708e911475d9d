#ifndef GEMKIT_HYPERGRAPH_HPP
#define GEMKIT_HYPERGRAPH_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gemkit {

using NodeIndex = std::size_t;
using ArcIndex = std::size_t;

inline constexpr std::int64_t kMaxMultiplicity = 2147483647;  // 2^31 - 1

/// One (node, multiplicity) entry of a hyperarc side. Entries are kept
/// sorted by node index so that equal multisets compare equal.
struct Incidence {
    NodeIndex node;
    std::int32_t multiplicity;

    friend bool operator==(const Incidence&, const Incidence&) = default;
};

/// Unvalidated description of a hyperarc, keyed by node identifier.
/// Repeated node entries on one side are summed.
struct ArcSpec {
    std::string id;
    std::vector<std::pair<std::string, std::int64_t>> source;
    std::vector<std::pair<std::string, std::int64_t>> target;
    double kappa = 1.0;
};

class Hyperarc {
public:
    Hyperarc(std::string id, std::vector<Incidence> source, std::vector<Incidence> target,
             double kappa);

    const std::string& id() const noexcept { return id_; }
    std::span<const Incidence> source() const noexcept { return source_; }
    std::span<const Incidence> target() const noexcept { return target_; }
    double kappa() const noexcept { return kappa_; }

    std::int32_t source_multiplicity(NodeIndex v) const noexcept;
    std::int32_t target_multiplicity(NodeIndex v) const noexcept;

    // sum of source multiplicities (the order of the synergistic law)
    std::int64_t source_order() const noexcept;

    friend bool operator==(const Hyperarc&, const Hyperarc&) = default;

private:
    std::string id_;
    std::vector<Incidence> source_;
    std::vector<Incidence> target_;
    double kappa_;
};

/**
 * Immutable directed multihypergraph.
 *
 * Node and arc orderings are fixed by construction order and are the
 * orderings used by every matrix, model file and report derived from it.
 */
class Hypergraph {
public:
    Hypergraph() = default;

    /// Validates and builds. Throws std::invalid_argument on duplicate ids,
    /// empty arc sides, unknown nodes, multiplicities outside [1, 2^31-1]
    /// or non-positive / non-finite kappa.
    Hypergraph(std::vector<std::string> nodes, std::vector<ArcSpec> arcs);

    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_arcs() const noexcept { return arcs_.size(); }

    const std::vector<std::string>& nodes() const noexcept { return nodes_; }
    const std::vector<Hyperarc>& arcs() const noexcept { return arcs_; }
    const std::string& node(NodeIndex v) const { return nodes_.at(v); }
    const Hyperarc& arc(ArcIndex a) const { return arcs_.at(a); }

    std::optional<NodeIndex> find_node(std::string_view id) const;
    std::optional<ArcIndex> find_arc(std::string_view id) const;
    NodeIndex node_index(std::string_view id) const;  // throws std::out_of_range
    ArcIndex arc_index(std::string_view id) const;    // throws std::out_of_range

    ArcSpec arc_spec(ArcIndex a) const;

    friend bool operator==(const Hypergraph& lhs, const Hypergraph& rhs) {
        return lhs.nodes_ == rhs.nodes_ && lhs.arcs_ == rhs.arcs_;
    }

private:
    std::vector<std::string> nodes_;
    std::vector<Hyperarc> arcs_;
    std::unordered_map<std::string, NodeIndex> node_lookup_;
    std::unordered_map<std::string, ArcIndex> arc_lookup_;
};

/// Row-major dense integer matrix (nodes x arcs).
class IntMatrix {
public:
    IntMatrix() = default;
    IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::int64_t& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    std::int64_t operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::int64_t> data_;
};

struct IncidenceView {
    IntMatrix S;  // source multiplicities
    IntMatrix T;  // target multiplicities
    IntMatrix Q;  // T - S
};

IncidenceView build_incidence(const Hypergraph& h);

/// Net balance Q f. Throws std::invalid_argument on length mismatch.
std::vector<double> net_balance(const Hypergraph& h, std::span<const double> flow);

/// Restriction to the arcs whose source and target lie entirely in `nodes`.
/// The node set of the result is `nodes` in the order of `h`.
Hypergraph restrict_to(const Hypergraph& h, std::span<const std::string> nodes);

enum class ArcRole { Irreversible, Forward, Reverse };

struct ReversiblePairing {
    std::vector<std::pair<ArcIndex, ArcIndex>> pairs;  // (forward, reverse)
    std::vector<ArcRole> roles;                       // one per arc
    std::vector<std::optional<ArcIndex>> partner;     // one per arc

    bool empty() const noexcept { return pairs.empty(); }
};

/// Greedy first-match pairing of arcs with exchanged source/target
/// multisets. The forward role goes to the lexicographically smaller id.
ReversiblePairing detect_reversible(const Hypergraph& h);

std::string_view to_string(ArcRole role) noexcept;

}  // namespace gemkit

#endif  // GEMKIT_HYPERGRAPH_HPP
