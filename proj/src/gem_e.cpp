#include "gemkit/gem_e.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gemkit {

namespace {

std::string var_name(const std::string& family, const std::string& entity, int t) {
    return family + "_" + entity + "_" + std::to_string(t);
}

std::vector<ArcIndex> all_arcs(const Hypergraph& h) {
    std::vector<ArcIndex> a(h.num_arcs());
    std::iota(a.begin(), a.end(), ArcIndex{0});
    return a;
}

}  // namespace

ModelArtifact build_activation_model(const Hypergraph& h, const ModelConfig& cfg, std::span<const ArcIndex> arcs,
                                     bool realizability_rows) {
    const auto res = resolve(h, cfg);
    const int T = cfg.horizon;
    ModelArtifact m;
    m.kind = "gem-e";

    // y[t][v], z[t][j] with j indexing `arcs`
    std::vector<std::vector<std::size_t>> y(static_cast<std::size_t>(T)), z(y.size()), f(y.size());
    for (int t = 1; t <= T; ++t) {
        for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
            y[t - 1].push_back(m.add_variable({var_name("y", h.node(v), t), VarKind::Binary, 0, 1, "y", h.node(v), t}));
        }
    }
    for (int t = 1; t <= T; ++t) {
        for (ArcIndex a : arcs) {
            const auto& id = h.arc(a).id();
            z[t - 1].push_back(m.add_variable({var_name("z", id, t), VarKind::Binary, 0, 1, "z", id, t}));
        }
    }
    for (int t = 1; t <= T; ++t) {
        for (ArcIndex a : arcs) {
            const auto& id = h.arc(a).id();
            f[t - 1].push_back(
                m.add_variable({var_name("f", id, t), VarKind::Continuous, 0, res.delta_arc[a], "f", id, t}));
        }
    }
    std::vector<std::size_t> theta, u, w;
    for (int t = 1; t <= T; ++t) {
        theta.push_back(m.add_variable({"theta_" + std::to_string(t), VarKind::Continuous, 0, kInfinity, "theta", "", t}));
    }
    for (int t = 1; t <= T; ++t) {
        u.push_back(m.add_variable({"u_" + std::to_string(t), VarKind::Continuous, -kInfinity, kInfinity, "u", "", t}));
    }
    for (int k = 1; k <= T; ++k) {
        w.push_back(m.add_variable({"w_" + std::to_string(k), VarKind::Continuous, -kInfinity, kInfinity, "w", "", k}));
    }

    const auto n_arcs = arcs.size();
    for (int t = 0; t + 1 < T; ++t) {
        for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
            m.add_constraint("ctr:3", {{y[t][v], 1.0}, {y[t + 1][v], -1.0}}, Sense::LessEqual, 0.0);
        }
    }
    for (int t = 0; t + 1 < T; ++t) {
        for (std::size_t j = 0; j < n_arcs; ++j) {
            m.add_constraint("ctr:4", {{z[t][j], 1.0}, {z[t + 1][j], -1.0}}, Sense::LessEqual, 0.0);
        }
    }
    for (const bool consumed : {true, false}) {
        for (int t = 0; t < T; ++t) {
            for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
                std::vector<Term> terms{{y[t][v], 1.0}};
                for (std::size_t j = 0; j < n_arcs; ++j) {
                    const auto& arc = h.arc(arcs[j]);
                    const auto mult = consumed ? arc.source_multiplicity(v) : arc.target_multiplicity(v);
                    if (mult > 0) terms.push_back({z[t][j], -1.0});
                }
                m.add_constraint(consumed ? "ctr:5a" : "ctr:5b", std::move(terms), Sense::LessEqual, 0.0);
            }
        }
    }
    for (const bool input : {true, false}) {
        for (int t = 0; t < T; ++t) {
            for (std::size_t j = 0; j < n_arcs; ++j) {
                const auto& arc = h.arc(arcs[j]);
                std::vector<Term> terms{{z[t][j], 1.0}};
                for (const auto& inc : input ? arc.source() : arc.target()) terms.push_back({y[t][inc.node], -1.0});
                m.add_constraint(input ? "ctr:6a" : "ctr:6b", std::move(terms), Sense::LessEqual, 0.0);
            }
        }
    }
    if (realizability_rows) {
        for (int t = 0; t < T; ++t) {
            for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
                std::vector<Term> terms;
                for (std::size_t j = 0; j < n_arcs; ++j) {
                    const auto& arc = h.arc(arcs[j]);
                    const double q = static_cast<double>(arc.target_multiplicity(v)) - arc.source_multiplicity(v);
                    if (q != 0.0) terms.push_back({f[t][j], q});
                }
                terms.push_back({y[t][v], -res.delta_node[v]});
                m.add_constraint("ctr:7", std::move(terms), Sense::GreaterEqual, cfg.eps - res.delta_node[v]);
            }
        }
    }
    for (int t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < n_arcs; ++j) {
            const ArcIndex a = arcs[j];
            m.add_constraint("ctr:8a", {{f[t][j], 1.0}, {z[t][j], -res.eps_arc[a]}}, Sense::GreaterEqual, 0.0);
            m.add_constraint("ctr:8a", {{f[t][j], 1.0}, {z[t][j], -res.delta_arc[a]}}, Sense::LessEqual, 0.0);
        }
    }
    for (int t = 0; t < T; ++t) {
        std::vector<Term> terms{{theta[t], 1.0}};
        for (std::size_t j = 0; j < n_arcs; ++j) terms.push_back({z[t][j], -1.0});
        if (t > 0) {
            for (std::size_t j = 0; j < n_arcs; ++j) terms.push_back({z[t - 1][j], 1.0});
        }
        m.add_constraint("link:theta", std::move(terms), Sense::Equal, 0.0);
    }
    for (int t = 0; t < T; ++t) {
        for (int k = 0; k < T; ++k) {
            if (k < cfg.q) {
                m.add_constraint("owa", {{u[t], 1.0}, {w[k], 1.0}, {theta[t], -1.0}}, Sense::LessEqual, 0.0);
            } else {
                m.add_constraint("owa", {{u[t], 1.0}, {w[k], 1.0}}, Sense::LessEqual, 0.0);
            }
        }
    }
    std::vector<Term> obj;
    for (auto i : u) obj.push_back({i, 1.0});
    for (auto i : w) obj.push_back({i, 1.0});
    m.set_objective(std::move(obj));
    return m;
}

ModelArtifact build_gem_e(const Hypergraph& h, const ModelConfig& cfg) {
    const auto arcs = all_arcs(h);
    return build_activation_model(h, cfg, arcs, true);
}

GemECounts gem_e_counts(std::size_t nodes, std::size_t arcs, int horizon, int q) {
    const auto T = static_cast<std::size_t>(horizon);
    const auto Q = static_cast<std::size_t>(q);
    return {nodes * (T - 1), arcs * (T - 1), 2 * nodes * T, 2 * arcs * T, nodes * T, 2 * arcs * T, T,
            T * Q + T * (T - Q)};
}

bool counts_match(const ModelArtifact& m, const GemECounts& c) {
    return m.count_tag("ctr:3") == c.nodes_mono && m.count_tag("ctr:4") == c.arcs_mono &&
           m.count_tag("ctr:5a") + m.count_tag("ctr:5b") == c.node_support &&
           m.count_tag("ctr:6a") + m.count_tag("ctr:6b") == c.arc_support && m.count_tag("ctr:7") == c.realizability &&
           m.count_tag("ctr:8a") == c.flow_activation && m.count_tag("link:theta") == c.theta_link &&
           m.count_tag("owa") == c.owa;
}

bool binary_value(const Assignment& assignment, const std::string& name) {
    auto it = assignment.find(name);
    if (it == assignment.end()) throw DecodeError("assignment lacks binary " + name);
    const double v = it->second;
    if (std::abs(v) <= 1e-6) return false;
    if (std::abs(v - 1.0) <= 1e-6) return true;
    throw DecodeError("binary " + name + " = " + std::to_string(v) + " is not integral");
}

ChainSolution decode_activation(const ModelArtifact& artifact, const Assignment& assignment, const Hypergraph& h,
                                const ModelConfig& cfg, std::span<const ArcIndex> arcs) {
    const int T = cfg.horizon;
    ChainSolution c;
    c.model = artifact.kind;
    c.q = cfg.q;
    c.active_nodes.resize(static_cast<std::size_t>(T));
    c.active_arcs.resize(static_cast<std::size_t>(T));
    c.flows.assign(static_cast<std::size_t>(T), std::vector<double>(h.num_arcs(), 0.0));
    for (int t = 1; t <= T; ++t) {
        auto& nodes = c.active_nodes[t - 1];
        for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
            if (binary_value(assignment, var_name("y", h.node(v), t))) nodes.push_back(v);
        }
        for (ArcIndex a : arcs) {
            const auto& id = h.arc(a).id();
            if (binary_value(assignment, var_name("z", id, t))) c.active_arcs[t - 1].push_back(a);
            auto it = assignment.find(var_name("f", id, t));
            if (it != assignment.end()) c.flows[t - 1][a] = it->second;
        }
        std::sort(c.active_arcs[t - 1].begin(), c.active_arcs[t - 1].end());
    }
    for (int t = 1; t < T; ++t) {
        const auto& a0 = c.active_arcs[t - 1];
        const auto& a1 = c.active_arcs[t];
        const auto& m0 = c.active_nodes[t - 1];
        const auto& m1 = c.active_nodes[t];
        if (!std::includes(a1.begin(), a1.end(), a0.begin(), a0.end()) ||
            !std::includes(m1.begin(), m1.end(), m0.begin(), m0.end())) {
            throw DecodeError("activation of period " + std::to_string(t) + " is not kept in period " +
                              std::to_string(t + 1));
        }
    }
    std::vector<std::size_t> counts;
    for (const auto& a : c.active_arcs) counts.push_back(a.size());
    c.profile = growth_profile(counts, cfg.q);
    for (int t = 1; t <= T; ++t) {
        auto it = assignment.find("theta_" + std::to_string(t));
        if (it == assignment.end()) continue;
        const auto expect = static_cast<double>(c.profile.theta[static_cast<std::size_t>(t - 1)]);
        if (std::abs(it->second - expect) > 1e-6) {
            throw DecodeError("theta_" + std::to_string(t) + " = " + std::to_string(it->second) +
                              " disagrees with the activated arcs (" + std::to_string(expect) + ")");
        }
    }
    return c;
}

ChainSolution decode_gem_e(const ModelArtifact& artifact, const Assignment& assignment, const Hypergraph& h,
                           const ModelConfig& cfg) {
    const auto arcs = all_arcs(h);
    return decode_activation(artifact, assignment, h, cfg, arcs);
}

}  // namespace gemkit
