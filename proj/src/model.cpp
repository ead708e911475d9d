#include "gemkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gemkit {

std::string_view to_string(VarKind kind) noexcept {
    switch (kind) {
        case VarKind::Binary: return "binary";
        case VarKind::Sos2Weight: return "sos2";
        case VarKind::Continuous: break;
    }
    return "continuous";
}

std::string_view to_string(Sense sense) noexcept {
    switch (sense) {
        case Sense::LessEqual: return "<=";
        case Sense::GreaterEqual: return ">=";
        case Sense::Equal: break;
    }
    return "=";
}

std::size_t ModelArtifact::add_variable(Variable v) {
    if (!lookup_.emplace(v.name, variables_.size()).second) {
        throw std::invalid_argument("duplicate variable name '" + v.name + "'");
    }
    variables_.push_back(std::move(v));
    return variables_.size() - 1;
}

std::size_t ModelArtifact::add_constraint(std::string tag, std::vector<Term> terms, Sense sense, double rhs) {
    for (const auto& t : terms) {
        if (t.var >= variables_.size()) throw std::out_of_range("constraint references unknown variable");
    }
    std::string name = tag;
    std::replace(name.begin(), name.end(), ':', '_');
    name += "_" + std::to_string(++tag_counts_[tag]);
    constraints_.push_back({std::move(tag), std::move(name), std::move(terms), sense, rhs});
    return constraints_.size() - 1;
}

void ModelArtifact::add_named_constraint(Constraint c) {
    for (const auto& t : c.terms) {
        if (t.var >= variables_.size()) throw std::out_of_range("constraint references unknown variable");
    }
    ++tag_counts_[c.tag];
    constraints_.push_back(std::move(c));
}

void ModelArtifact::add_sos2(std::string name, std::vector<std::size_t> vars, std::vector<double> weights) {
    if (vars.size() != weights.size()) throw std::invalid_argument("sos2 weights and members differ in length");
    sos2_.push_back({std::move(name), std::move(vars), std::move(weights)});
}

std::optional<std::size_t> ModelArtifact::find(std::string_view name) const {
    auto it = lookup_.find(std::string(name));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::size_t ModelArtifact::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw std::out_of_range("unknown variable '" + std::string(name) + "'");
}

std::size_t ModelArtifact::count_tag(std::string_view tag) const {
    auto it = tag_counts_.find(std::string(tag));
    return it == tag_counts_.end() ? 0 : it->second;
}

std::size_t ModelArtifact::num_binaries() const {
    return static_cast<std::size_t>(std::count_if(variables_.begin(), variables_.end(),
                                                  [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

double ModelArtifact::evaluate_objective(const std::vector<double>& values) const {
    double obj = 0.0;
    for (const auto& t : objective_) obj += t.coef * values.at(t.var);
    return obj;
}

void ModelArtifact::fix(const std::map<std::string, double>& values) {
    for (const auto& [name, value] : values) {
        add_constraint("fix", {{index_of(name), 1.0}}, Sense::Equal, value);
    }
}

PwlGrid make_geometric_grid(double lo, double hi, int k) {
    if (k < 3) throw std::invalid_argument("pwl grid needs at least 3 breakpoints");
    if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("pwl grid needs 0 < lo < hi < inf");
    }
    if (lo > 1.0 || hi < 1.0) throw std::invalid_argument("pwl grid range must contain 1");
    PwlGrid grid;
    grid.lo = lo;
    grid.hi = hi;
    grid.ratio = std::pow(hi / lo, 1.0 / (k - 1));
    grid.points.reserve(static_cast<std::size_t>(k) + 1);
    bool has_one = false;
    for (int i = 0; i < k; ++i) {
        double p = i == 0 ? lo : (i == k - 1 ? hi : lo * std::pow(hi / lo, static_cast<double>(i) / (k - 1)));
        if (std::abs(p - 1.0) <= 1e-12) {
            p = 1.0;
            has_one = true;
        }
        grid.points.push_back(p);
    }
    if (!has_one) {
        grid.points.insert(std::upper_bound(grid.points.begin(), grid.points.end(), 1.0), 1.0);
    }
    return grid;
}

double pwl_log_error_bound(const PwlGrid& grid) {
    const double r = grid.ratio;
    return (r - 1.0) * (r - 1.0) / 8.0;
}

ModelConfig ModelConfig::gem_e(int horizon, int q) {
    ModelConfig cfg;
    cfg.horizon = horizon;
    cfg.q = q;
    cfg.eps = 1.0;
    return cfg;
}

ModelConfig ModelConfig::gem_d(int horizon, int q) {
    ModelConfig cfg;
    cfg.horizon = horizon;
    cfg.q = q;
    cfg.eps = 0.01;
    return cfg;
}

ResolvedConfig resolve(const Hypergraph& h, const ModelConfig& cfg) {
    if (cfg.horizon < 1) throw std::invalid_argument("horizon T must be at least 1");
    if (cfg.q < 1 || cfg.q > cfg.horizon) throw std::invalid_argument("q must lie in [1, T]");
    if (!(cfg.eps > 0.0) || !std::isfinite(cfg.eps)) throw std::invalid_argument("eps must be positive");
    for (const auto& [id, v] : cfg.eps_arc) {
        if (!h.find_arc(id)) throw std::invalid_argument("eps_arc override for unknown arc '" + id + "'");
    }
    for (const auto& [id, v] : cfg.delta_arc) {
        if (!h.find_arc(id)) throw std::invalid_argument("delta_arc override for unknown arc '" + id + "'");
    }
    for (const auto& [id, v] : cfg.delta_node) {
        if (!h.find_node(id)) throw std::invalid_argument("delta_node override for unknown node '" + id + "'");
    }

    ResolvedConfig out;
    for (const auto& arc : h.arcs()) {
        auto e = cfg.eps_arc.find(arc.id());
        auto d = cfg.delta_arc.find(arc.id());
        const double lo = e == cfg.eps_arc.end() ? cfg.eps_arc_default : e->second;
        const double hi = d == cfg.delta_arc.end() ? cfg.delta_arc_default : d->second;
        if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
            throw std::invalid_argument("arc '" + arc.id() + "': need 0 < eps_arc <= delta_arc < inf");
        }
        out.eps_arc.push_back(lo);
        out.delta_arc.push_back(hi);
    }
    for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
        double need = cfg.eps;
        for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
            const double q = static_cast<double>(h.arc(a).target_multiplicity(v)) - h.arc(a).source_multiplicity(v);
            need += std::max(0.0, -q) * out.delta_arc[a];
        }
        auto it = cfg.delta_node.find(h.node(v));
        if (it == cfg.delta_node.end()) {
            out.delta_node.push_back(need);
        } else {
            if (it->second < need) {
                throw std::invalid_argument("node '" + h.node(v) + "': delta_node below eps + sum of consumption bounds");
            }
            out.delta_node.push_back(it->second);
        }
    }
    return out;
}

PwlGrid state_grid(const ModelConfig& cfg) {
    const double lo = cfg.pwl.x_lo.value_or(cfg.eps);
    const double hi = cfg.pwl.x_hi.value_or(1.0 / cfg.eps);
    return make_geometric_grid(lo, hi, cfg.pwl.k);
}

PwlGrid flow_grid(const std::string& arc_id, double kappa, std::int64_t order, double eps_arc,
                  const ModelConfig& cfg) {
    const double x_hi = cfg.pwl.x_hi.value_or(1.0 / cfg.eps);
    const double peak = kappa * std::pow(x_hi, static_cast<double>(order));
    const double lo = std::min(eps_arc, 1.0);
    double hi = std::max(peak, 1.0) + 1.0;
    if (cfg.pwl.flow_hi) {
        if (*cfg.pwl.flow_hi < peak) {
            throw std::invalid_argument("arc '" + arc_id + "': kappa * (1/eps)^order exceeds the flow grid upper end");
        }
        hi = *cfg.pwl.flow_hi;
    }
    if (!std::isfinite(hi)) throw std::invalid_argument("arc '" + arc_id + "': flow grid upper end overflows");
    return make_geometric_grid(lo, hi, cfg.pwl.k);
}

}  // namespace gemkit
