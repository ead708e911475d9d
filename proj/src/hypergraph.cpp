#include "gemkit/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace gemkit {

namespace {

std::vector<Incidence> collect_side(const std::vector<std::pair<std::string, std::int64_t>>& entries,
                                    const std::unordered_map<std::string, NodeIndex>& lookup,
                                    const std::string& arc_id, const char* side) {
    if (entries.empty()) {
        throw std::invalid_argument("arc '" + arc_id + "': " + side + " multiset is empty");
    }
    std::map<NodeIndex, std::int64_t> merged;
    for (const auto& [node, mult] : entries) {
        auto it = lookup.find(node);
        if (it == lookup.end()) {
            throw std::invalid_argument("arc '" + arc_id + "': unknown " + side + " node '" + node + "'");
        }
        if (mult < 1 || mult > kMaxMultiplicity) {
            throw std::invalid_argument("arc '" + arc_id + "': multiplicity of '" + node +
                                        "' out of range [1, 2^31-1]");
        }
        merged[it->second] += mult;
        if (merged[it->second] > kMaxMultiplicity) {
            throw std::invalid_argument("arc '" + arc_id + "': multiplicity overflow for '" + node + "'");
        }
    }
    std::vector<Incidence> out;
    out.reserve(merged.size());
    for (const auto& [node, mult] : merged) {
        out.push_back({node, static_cast<std::int32_t>(mult)});
    }
    return out;
}

std::int32_t lookup_multiplicity(std::span<const Incidence> side, NodeIndex v) {
    auto it = std::lower_bound(side.begin(), side.end(), v,
                               [](const Incidence& inc, NodeIndex n) { return inc.node < n; });
    return (it != side.end() && it->node == v) ? it->multiplicity : 0;
}

}  // namespace

Hyperarc::Hyperarc(std::string id, std::vector<Incidence> source, std::vector<Incidence> target,
                   double kappa)
    : id_(std::move(id)), source_(std::move(source)), target_(std::move(target)), kappa_(kappa) {}

std::int32_t Hyperarc::source_multiplicity(NodeIndex v) const noexcept {
    return lookup_multiplicity(source_, v);
}

std::int32_t Hyperarc::target_multiplicity(NodeIndex v) const noexcept {
    return lookup_multiplicity(target_, v);
}

std::int64_t Hyperarc::source_order() const noexcept {
    std::int64_t total = 0;
    for (const auto& inc : source_) total += inc.multiplicity;
    return total;
}

Hypergraph::Hypergraph(std::vector<std::string> nodes, std::vector<ArcSpec> arcs) : nodes_(std::move(nodes)) {
    node_lookup_.reserve(nodes_.size());
    for (NodeIndex v = 0; v < nodes_.size(); ++v) {
        if (!node_lookup_.emplace(nodes_[v], v).second) {
            throw std::invalid_argument("duplicate node id '" + nodes_[v] + "'");
        }
    }
    arcs_.reserve(arcs.size());
    arc_lookup_.reserve(arcs.size());
    for (auto& spec : arcs) {
        if (!arc_lookup_.emplace(spec.id, arcs_.size()).second) {
            throw std::invalid_argument("duplicate arc id '" + spec.id + "'");
        }
        if (!std::isfinite(spec.kappa) || spec.kappa <= 0.0) {
            throw std::invalid_argument("arc '" + spec.id + "': kappa must be positive and finite");
        }
        auto source = collect_side(spec.source, node_lookup_, spec.id, "source");
        auto target = collect_side(spec.target, node_lookup_, spec.id, "target");
        arcs_.emplace_back(std::move(spec.id), std::move(source), std::move(target), spec.kappa);
    }
}

std::optional<NodeIndex> Hypergraph::find_node(std::string_view id) const {
    auto it = node_lookup_.find(std::string(id));
    if (it == node_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<ArcIndex> Hypergraph::find_arc(std::string_view id) const {
    auto it = arc_lookup_.find(std::string(id));
    if (it == arc_lookup_.end()) return std::nullopt;
    return it->second;
}

NodeIndex Hypergraph::node_index(std::string_view id) const {
    if (auto v = find_node(id)) return *v;
    throw std::out_of_range("unknown node id '" + std::string(id) + "'");
}

ArcIndex Hypergraph::arc_index(std::string_view id) const {
    if (auto a = find_arc(id)) return *a;
    throw std::out_of_range("unknown arc id '" + std::string(id) + "'");
}

ArcSpec Hypergraph::arc_spec(ArcIndex a) const {
    const Hyperarc& arc = arcs_.at(a);
    ArcSpec spec{arc.id(), {}, {}, arc.kappa()};
    for (const auto& inc : arc.source()) spec.source.emplace_back(nodes_[inc.node], inc.multiplicity);
    for (const auto& inc : arc.target()) spec.target.emplace_back(nodes_[inc.node], inc.multiplicity);
    return spec;
}

IncidenceView build_incidence(const Hypergraph& h) {
    const std::size_t n = h.num_nodes();
    const std::size_t m = h.num_arcs();
    IncidenceView view{IntMatrix(n, m), IntMatrix(n, m), IntMatrix(n, m)};
    for (ArcIndex a = 0; a < m; ++a) {
        for (const auto& inc : h.arc(a).source()) view.S(inc.node, a) = inc.multiplicity;
        for (const auto& inc : h.arc(a).target()) view.T(inc.node, a) = inc.multiplicity;
    }
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t a = 0; a < m; ++a) view.Q(v, a) = view.T(v, a) - view.S(v, a);
    }
    return view;
}

std::vector<double> net_balance(const Hypergraph& h, std::span<const double> flow) {
    if (flow.size() != h.num_arcs()) {
        throw std::invalid_argument("flow length " + std::to_string(flow.size()) + " does not match arc count " +
                                    std::to_string(h.num_arcs()));
    }
    std::vector<double> x(h.num_nodes(), 0.0);
    for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
        const double f = flow[a];
        if (f == 0.0) continue;
        for (const auto& inc : h.arc(a).target()) x[inc.node] += inc.multiplicity * f;
        for (const auto& inc : h.arc(a).source()) x[inc.node] -= inc.multiplicity * f;
    }
    return x;
}

Hypergraph restrict_to(const Hypergraph& h, std::span<const std::string> nodes) {
    std::vector<bool> keep(h.num_nodes(), false);
    for (const auto& id : nodes) keep[h.node_index(id)] = true;

    std::vector<std::string> kept_nodes;
    for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
        if (keep[v]) kept_nodes.push_back(h.node(v));
    }
    auto inside = [&](std::span<const Incidence> side) {
        return std::all_of(side.begin(), side.end(), [&](const Incidence& inc) { return keep[inc.node]; });
    };
    std::vector<ArcSpec> kept_arcs;
    for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
        if (inside(h.arc(a).source()) && inside(h.arc(a).target())) kept_arcs.push_back(h.arc_spec(a));
    }
    return Hypergraph(std::move(kept_nodes), std::move(kept_arcs));
}

ReversiblePairing detect_reversible(const Hypergraph& h) {
    const std::size_t m = h.num_arcs();
    ReversiblePairing pairing;
    pairing.roles.assign(m, ArcRole::Irreversible);
    pairing.partner.assign(m, std::nullopt);

    auto exchanged = [&](ArcIndex a, ArcIndex b) {
        const auto& x = h.arc(a);
        const auto& y = h.arc(b);
        return std::ranges::equal(x.source(), y.target()) && std::ranges::equal(x.target(), y.source());
    };

    for (ArcIndex a = 0; a < m; ++a) {
        if (pairing.partner[a]) continue;
        for (ArcIndex b = a + 1; b < m; ++b) {
            if (pairing.partner[b] || !exchanged(a, b)) continue;
            pairing.partner[a] = b;
            pairing.partner[b] = a;
            const bool a_forward = h.arc(a).id() < h.arc(b).id();
            const ArcIndex fwd = a_forward ? a : b;
            const ArcIndex rev = a_forward ? b : a;
            pairing.roles[fwd] = ArcRole::Forward;
            pairing.roles[rev] = ArcRole::Reverse;
            pairing.pairs.emplace_back(fwd, rev);
            break;
        }
    }
    return pairing;
}

std::string_view to_string(ArcRole role) noexcept {
    switch (role) {
        case ArcRole::Forward: return "forward";
        case ArcRole::Reverse: return "reverse";
        case ArcRole::Irreversible: break;
    }
    return "irreversible";
}

}  // namespace gemkit
