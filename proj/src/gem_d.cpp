#include "gemkit/gem_d.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gemkit/gem_e.hpp"

namespace gemkit {

namespace {

std::string name_t(const std::string& family, const std::string& entity, int t) {
    return family + "_" + entity + "_" + std::to_string(t);
}

std::string name_kt(const std::string& family, const std::string& entity, std::size_t k, int t) {
    return family + "_" + entity + "_" + std::to_string(k) + "_" + std::to_string(t);
}

struct Lambda {
    std::vector<std::size_t> vars;
    std::vector<double> weights;
};

// lambda block for one (entity, t); returns variable indices
Lambda add_lambdas(ModelArtifact& m, const std::string& family, const std::string& entity, int t,
                   const PwlGrid& grid) {
    Lambda l;
    for (std::size_t k = 1; k <= grid.points.size(); ++k) {
        l.vars.push_back(m.add_variable({name_kt(family, entity, k, t), VarKind::Sos2Weight, 0, 1, family, entity, t}));
        l.weights.push_back(static_cast<double>(k));
    }
    return l;
}

// value - shift + 1 = sum xi lambda, log var = sum log(xi) lambda, sum lambda = 1
void add_pwl_rows(ModelArtifact& m, const std::string& tag, const std::string& group, std::size_t value,
                  std::size_t shift, std::size_t logvar, const Lambda& lam, const PwlGrid& grid) {
    std::vector<Term> a{{value, 1.0}, {shift, -1.0}};
    std::vector<Term> b{{logvar, 1.0}};
    std::vector<Term> c;
    for (std::size_t k = 0; k < lam.vars.size(); ++k) {
        a.push_back({lam.vars[k], -grid.points[k]});
        const double lg = std::log(grid.points[k]);
        if (lg != 0.0) b.push_back({lam.vars[k], -lg});
        c.push_back({lam.vars[k], 1.0});
    }
    m.add_constraint(tag, std::move(a), Sense::Equal, -1.0);
    m.add_constraint(tag, std::move(b), Sense::Equal, 0.0);
    m.add_constraint(tag, std::move(c), Sense::Equal, 1.0);
    m.add_sos2(group, lam.vars, lam.weights);
}

ModelArtifact build(const Hypergraph& h, const ModelConfig& cfg, const ReversiblePairing* pairing) {
    const bool rev = pairing != nullptr && !pairing->empty();
    const auto res = resolve(h, cfg);
    const int T = cfg.horizon;
    const double inv_eps = 1.0 / cfg.eps;

    std::vector<ArcIndex> kept;
    std::vector<ArcIndex> forward;
    for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
        if (rev && pairing->roles[a] == ArcRole::Reverse) continue;
        kept.push_back(a);
        if (rev && pairing->roles[a] == ArcRole::Forward) forward.push_back(a);
    }

    ModelArtifact m = build_activation_model(h, cfg, kept, !rev);
    m.kind = rev ? "gem-d-rev" : "gem-d";

    const auto xgrid = state_grid(cfg);
    std::vector<PwlGrid> fgrid(h.num_arcs());
    std::vector<double> big_m(h.num_arcs(), 0.0);
    for (ArcIndex a : kept) {
        const auto& arc = h.arc(a);
        fgrid[a] = flow_grid(arc.id(), arc.kappa(), arc.source_order(), res.eps_arc[a], cfg);
        big_m[a] = log_big_m(arc.kappa(), arc.source_order(), xgrid, fgrid[a]);
    }
    // reverse grids are indexed by the forward arc
    std::vector<PwlGrid> rgrid(h.num_arcs());
    std::vector<double> rbig_m(h.num_arcs(), 0.0);
    for (ArcIndex a : forward) {
        const auto& r = h.arc(*pairing->partner[a]);
        rgrid[a] = flow_grid(r.id(), r.kappa(), r.source_order(), res.eps_arc[a], cfg);
        rbig_m[a] = log_big_m(r.kappa(), r.source_order(), xgrid, rgrid[a]);
    }

    auto var = [&m](const std::string& name) { return m.index_of(name); };
    const auto& N = h.nodes();

    for (int t = 1; t <= T; ++t) {
        for (const auto& v : N) m.add_variable({name_t("rho", v, t), VarKind::Binary, 0, 1, "rho", v, t});
    }
    for (int t = 0; t <= T; ++t) {
        for (const auto& v : N) m.add_variable({name_t("x", v, t), VarKind::Continuous, 0, inv_eps, "x", v, t});
    }
    for (int t = 1; t <= T; ++t) {
        for (const auto& v : N) {
            m.add_variable({name_t("hvar", v, t), VarKind::Continuous, std::log(xgrid.points.front()),
                            std::log(xgrid.points.back()), "hvar", v, t});
        }
    }
    std::vector<std::vector<Lambda>> lamx(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
        for (const auto& v : N) lamx[t - 1].push_back(add_lambdas(m, "lamx", v, t, xgrid));
    }
    for (int t = 1; t <= T; ++t) {
        for (ArcIndex a : kept) {
            const auto& id = h.arc(a).id();
            m.add_variable({name_t("gvar", id, t), VarKind::Continuous, std::log(fgrid[a].points.front()),
                            std::log(fgrid[a].points.back()), "gvar", id, t});
        }
    }
    std::vector<std::vector<Lambda>> lamf(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
        for (ArcIndex a : kept) lamf[t - 1].push_back(add_lambdas(m, "lamf", h.arc(a).id(), t, fgrid[a]));
    }
    std::vector<std::vector<Lambda>> lamr(static_cast<std::size_t>(T));
    if (rev) {
        for (int t = 1; t <= T; ++t) {
            for (ArcIndex a : forward) {
                const auto& id = h.arc(a).id();
                m.add_variable({name_t("frev", id, t), VarKind::Continuous, 0, res.delta_arc[a], "frev", id, t});
            }
        }
        for (int t = 1; t <= T; ++t) {
            for (ArcIndex a : forward) {
                const auto& id = h.arc(a).id();
                m.add_variable({name_t("grev", id, t), VarKind::Continuous, std::log(rgrid[a].points.front()),
                                std::log(rgrid[a].points.back()), "grev", id, t});
            }
        }
        for (int t = 1; t <= T; ++t) {
            for (ArcIndex a : forward) lamr[t - 1].push_back(add_lambdas(m, "lamfrev", h.arc(a).id(), t, rgrid[a]));
        }
    }

    auto q_of = [&h](ArcIndex a, NodeIndex v) {
        return static_cast<double>(h.arc(a).target_multiplicity(v)) - h.arc(a).source_multiplicity(v);
    };

    if (rev) {
        for (int t = 1; t <= T; ++t) {
            for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
                double need = cfg.eps;
                std::vector<Term> terms;
                for (ArcIndex a : kept) {
                    const double q = q_of(a, v);
                    if (q != 0.0) terms.push_back({var(name_t("f", h.arc(a).id(), t)), q});
                    need += std::max(0.0, -q) * res.delta_arc[a];
                }
                for (ArcIndex a : forward) {
                    const double q = q_of(a, v);
                    if (q != 0.0) terms.push_back({var(name_t("frev", h.arc(a).id(), t)), -q});
                    need += std::max(0.0, q) * res.delta_arc[a];
                }
                double big = res.delta_node[v];
                if (cfg.delta_node.count(N[v]) == 0) {
                    big = std::max(big, need);
                } else if (big < need) {
                    throw std::invalid_argument("node '" + N[v] + "': delta_node below eps + sum of consumption bounds");
                }
                terms.push_back({var(name_t("y", N[v], t)), -big});
                m.add_constraint("appB:realizability", std::move(terms), Sense::GreaterEqual, cfg.eps - big);
            }
        }
    }

    const std::string balance_tag = rev ? "appB:balance" : "ctr:9";
    for (int t = 1; t <= T; ++t) {
        for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
            std::vector<Term> terms{{var(name_t("x", N[v], t)), 1.0}, {var(name_t("x", N[v], t - 1)), -1.0}};
            for (ArcIndex a : kept) {
                const double q = q_of(a, v);
                if (q != 0.0) terms.push_back({var(name_t("f", h.arc(a).id(), t)), -q});
            }
            for (ArcIndex a : forward) {
                const double q = q_of(a, v);
                if (q != 0.0) terms.push_back({var(name_t("frev", h.arc(a).id(), t)), q});
            }
            m.add_constraint(balance_tag, std::move(terms), Sense::Equal, 0.0);
        }
    }
    for (int t = 1; t < T; ++t) {
        for (const auto& v : N) {
            m.add_constraint("ctr:10", {{var(name_t("rho", v, t)), 1.0}, {var(name_t("rho", v, t + 1)), -1.0}},
                             Sense::LessEqual, 0.0);
        }
    }
    for (int t = 1; t <= T; ++t) {
        for (const auto& v : N) {
            const auto x = var(name_t("x", v, t));
            const auto rho = var(name_t("rho", v, t));
            m.add_constraint("ctr:11", {{x, 1.0}, {rho, -cfg.eps}}, Sense::GreaterEqual, 0.0);
            m.add_constraint("ctr:11", {{x, 1.0}, {rho, -inv_eps}}, Sense::LessEqual, 0.0);
        }
    }
    for (int t = 1; t <= T; ++t) {
        for (const auto& v : N) {
            m.add_constraint("link:y_rho", {{var(name_t("y", v, t)), 1.0}, {var(name_t("rho", v, t)), -1.0}},
                             Sense::LessEqual, 0.0);
        }
    }
    for (const auto& v : N) {
        m.add_constraint("init:x0", {{var(name_t("x", v, 0)), 1.0}, {var(name_t("rho", v, 1)), -inv_eps}},
                         Sense::LessEqual, 0.0);
    }
    for (int t = 1; t <= T; ++t) {
        for (ArcIndex a : kept) {
            const auto& arc = h.arc(a);
            const auto z = var(name_t("z", arc.id(), t));
            std::vector<NodeIndex> readers;
            for (const auto& inc : arc.source()) readers.push_back(inc.node);
            if (rev && pairing->roles[a] == ArcRole::Forward) {
                for (const auto& inc : arc.target()) readers.push_back(inc.node);
                std::sort(readers.begin(), readers.end());
                readers.erase(std::unique(readers.begin(), readers.end()), readers.end());
            }
            for (NodeIndex v : readers) {
                m.add_constraint("link:z_rho", {{z, 1.0}, {var(name_t("rho", N[v], t)), -1.0}}, Sense::LessEqual, 0.0);
            }
        }
    }
    for (int t = 1; t <= T; ++t) {
        for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
            add_pwl_rows(m, "ctr:13a", name_t("sos_x", N[v], t), var(name_t("x", N[v], t)), var(name_t("rho", N[v], t)),
                         var(name_t("hvar", N[v], t)), lamx[t - 1][v], xgrid);
        }
    }
    for (int t = 1; t <= T; ++t) {
        for (std::size_t j = 0; j < kept.size(); ++j) {
            const auto& id = h.arc(kept[j]).id();
            add_pwl_rows(m, "ctr:13b", name_t("sos_f", id, t), var(name_t("f", id, t)), var(name_t("z", id, t)),
                         var(name_t("gvar", id, t)), lamf[t - 1][j], fgrid[kept[j]]);
        }
    }

    // g - sum_v mult_v h_v -/+ M z >= / <= log kappa -/+ M
    auto add_law = [&](const std::string& tag_lo, const std::string& tag_hi, std::size_t g, std::size_t z,
                       std::span<const Incidence> inputs, int t, double kappa, double bm) {
        std::vector<Term> base{{g, 1.0}};
        for (const auto& inc : inputs) {
            base.push_back({var(name_t("hvar", N[inc.node], t)), -static_cast<double>(inc.multiplicity)});
        }
        auto lo = base;
        lo.push_back({z, -bm});
        auto hi = base;
        hi.push_back({z, bm});
        m.add_constraint(tag_lo, std::move(lo), Sense::GreaterEqual, std::log(kappa) - bm);
        m.add_constraint(tag_hi, std::move(hi), Sense::LessEqual, std::log(kappa) + bm);
    };
    for (int t = 1; t <= T; ++t) {
        for (ArcIndex a : kept) {
            const auto& arc = h.arc(a);
            add_law("ctr:14a", "ctr:14b", var(name_t("gvar", arc.id(), t)), var(name_t("z", arc.id(), t)), arc.source(),
                    t, arc.kappa(), big_m[a]);
        }
    }

    if (rev) {
        for (int t = 1; t <= T; ++t) {
            for (ArcIndex a : forward) {
                const auto& id = h.arc(a).id();
                const auto fr = var(name_t("frev", id, t));
                const auto z = var(name_t("z", id, t));
                m.add_constraint("appB:bounds", {{fr, 1.0}, {z, -res.eps_arc[a]}}, Sense::GreaterEqual, 0.0);
                m.add_constraint("appB:bounds", {{fr, 1.0}, {z, -res.delta_arc[a]}}, Sense::LessEqual, 0.0);
            }
        }
        for (int t = 1; t <= T; ++t) {
            for (std::size_t j = 0; j < forward.size(); ++j) {
                const auto& id = h.arc(forward[j]).id();
                add_pwl_rows(m, "appB:13b", name_t("sos_frev", id, t), var(name_t("frev", id, t)), var(name_t("z", id, t)),
                             var(name_t("grev", id, t)), lamr[t - 1][j], rgrid[forward[j]]);
            }
        }
        for (int t = 1; t <= T; ++t) {
            for (ArcIndex a : forward) {
                const auto& arc = h.arc(a);
                const auto& r = h.arc(*pairing->partner[a]);
                add_law("appB:14a", "appB:14b", var(name_t("grev", arc.id(), t)), var(name_t("z", arc.id(), t)),
                        arc.target(), t, r.kappa(), rbig_m[a]);
            }
        }
    }
    return m;
}

}  // namespace

double log_big_m(double kappa, std::int64_t order, const PwlGrid& xgrid, const PwlGrid& fgrid) {
    const double xlog = std::max(std::abs(std::log(xgrid.lo)), std::abs(std::log(xgrid.hi)));
    return std::abs(std::log(kappa)) + static_cast<double>(order) * xlog + std::abs(std::log(fgrid.hi)) + 1.0;
}

ModelArtifact build_gem_d(const Hypergraph& h, const ModelConfig& cfg) { return build(h, cfg, nullptr); }

ModelArtifact build_gem_d_reversible(const Hypergraph& h, const ModelConfig& cfg) {
    const auto pairing = detect_reversible(h);
    return build(h, cfg, &pairing);
}

ChainSolution decode_gem_d(const ModelArtifact& artifact, const Assignment& assignment, const Hypergraph& h,
                           const ModelConfig& cfg) {
    const bool rev = artifact.kind == "gem-d-rev";
    const auto pairing = rev ? detect_reversible(h) : ReversiblePairing{};
    std::vector<ArcIndex> kept;
    for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
        if (!rev || pairing.roles[a] != ArcRole::Reverse) kept.push_back(a);
    }
    auto c = decode_activation(artifact, assignment, h, cfg, kept);
    auto value = [&assignment](const std::string& name) {
        auto it = assignment.find(name);
        return it == assignment.end() ? 0.0 : it->second;
    };
    const int T = cfg.horizon;
    for (int t = 0; t <= T; ++t) {
        std::vector<double> x;
        for (const auto& v : h.nodes()) x.push_back(value(name_t("x", v, t)));
        c.states.push_back(std::move(x));
    }
    for (int t = 1; t <= T; ++t) {
        std::vector<bool> flags;
        for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
            const bool on = binary_value(assignment, name_t("rho", h.node(v), t));
            const double x = c.states[static_cast<std::size_t>(t)][v];
            if (!on && x > 1e-6) {
                throw DecodeError("x_" + h.node(v) + "_" + std::to_string(t) + " is positive while its state flag is 0");
            }
            if (on && (x < cfg.eps - 1e-6 || x > 1.0 / cfg.eps + 1e-6)) {
                throw DecodeError("x_" + h.node(v) + "_" + std::to_string(t) + " is outside [eps, 1/eps]");
            }
            flags.push_back(on);
        }
        c.state_flags.push_back(std::move(flags));
        if (rev) {
            for (const auto& [fwd, back] : pairing.pairs) {
                c.flows[static_cast<std::size_t>(t - 1)][back] = value(name_t("frev", h.arc(fwd).id(), t));
            }
        }
    }
    return c;
}

ModelArtifact build_model(const Hypergraph& h, const ModelConfig& cfg, std::string_view kind) {
    if (kind == "gem-e") return build_gem_e(h, cfg);
    if (kind == "gem-d") return cfg.reversible ? build_gem_d_reversible(h, cfg) : build_gem_d(h, cfg);
    if (kind == "gem-d-rev") return build_gem_d_reversible(h, cfg);
    throw std::invalid_argument("unknown model kind '" + std::string(kind) + "'");
}

ChainSolution decode_model(const ModelArtifact& artifact, const Assignment& assignment, const Hypergraph& h,
                           const ModelConfig& cfg) {
    if (artifact.kind == "gem-e") return decode_gem_e(artifact, assignment, h, cfg);
    if (artifact.kind == "gem-d" || artifact.kind == "gem-d-rev") return decode_gem_d(artifact, assignment, h, cfg);
    throw std::invalid_argument("cannot decode a model of kind '" + artifact.kind + "'");
}

}  // namespace gemkit
