#include "gemkit/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>

#include "gemkit/lp.hpp"

namespace gemkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::int64_t net(const Hyperarc& arc, NodeIndex v) {
    return static_cast<std::int64_t>(arc.target_multiplicity(v)) - arc.source_multiplicity(v);
}

std::vector<bool> membership(std::size_t n, std::span<const std::size_t> members, const char* what) {
    std::vector<bool> in(n, false);
    for (std::size_t i : members) {
        if (i >= n) throw std::out_of_range(std::string(what) + " index out of range");
        in[i] = true;
    }
    return in;
}

// Nodes that some arc of the set produces and some arc of the set consumes.
std::vector<NodeIndex> both_sided_nodes(const Hypergraph& h, std::span<const ArcIndex> arcs) {
    std::vector<bool> produced(h.num_nodes(), false);
    std::vector<bool> consumed(h.num_nodes(), false);
    for (ArcIndex a : arcs) {
        for (const auto& inc : h.arc(a).target()) produced[inc.node] = true;
        for (const auto& inc : h.arc(a).source()) consumed[inc.node] = true;
    }
    std::vector<NodeIndex> out;
    for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
        if (produced[v] && consumed[v]) out.push_back(v);
    }
    return out;
}

double balance_margin(const Hypergraph& h, std::span<const ArcIndex> arcs, std::span<const NodeIndex> core,
                      std::span<const double> flow) {
    double margin = kInf;
    for (NodeIndex v : core) {
        double sum = 0.0;
        for (ArcIndex a : arcs) sum += static_cast<double>(net(h.arc(a), v)) * flow[a];
        margin = std::min(margin, sum);
    }
    return margin;
}

std::vector<std::size_t> mask_members(std::uint64_t mask, std::span<const std::size_t> universe) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < universe.size(); ++i) {
        if (mask >> i & 1U) out.push_back(universe[i]);
    }
    return out;
}

std::vector<std::size_t> iota_vector(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

constexpr std::size_t kMaxCoreCandidates = 20;

}  // namespace

Hypergraph rif_example() {
    return Hypergraph({"R", "I", "F"}, {
                                           {"a1", {{"R", 2}}, {{"I", 1}}, 1.0},
                                           {"a2", {{"I", 1}}, {{"F", 2}}, 1.0},
                                           {"a3", {{"F", 1}}, {{"R", 1}}, 1.0},
                                       });
}

Hypergraph seven_node_example() {
    return Hypergraph({"S1", "S2", "S3", "S4", "S5", "S6", "S7"},
                      {
                          {"R1", {{"S1", 1}}, {{"S2", 1}, {"S4", 1}}, 9.0},
                          {"R2", {{"S2", 1}, {"S6", 1}}, {{"S6", 1}}, 4.4},
                          {"R3", {{"S1", 1}, {"S6", 1}}, {{"S3", 1}, {"S6", 1}}, 6.7},
                          {"R4", {{"S3", 1}}, {{"S1", 1}, {"S5", 1}}, 4.0},
                          {"R5", {{"S3", 1}, {"S7", 1}}, {{"S2", 1}}, 1.5},
                          {"R6", {{"S3", 1}, {"S5", 1}}, {{"S2", 1}, {"S6", 1}}, 6.8},
                      });
}

std::vector<NodeIndex> node_indices(const Hypergraph& h, std::span<const std::string> ids) {
    std::vector<NodeIndex> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(h.node_index(id));
    return out;
}

std::vector<ArcIndex> arc_indices(const Hypergraph& h, std::span<const std::string> ids) {
    std::vector<ArcIndex> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(h.arc_index(id));
    return out;
}

SelfSufficiency check_self_sufficiency(const Hypergraph& h, std::span<const ArcIndex> arcs,
                                       std::span<const NodeIndex> core) {
    const auto in_core = membership(h.num_nodes(), core, "node");
    membership(h.num_arcs(), arcs, "arc");
    SelfSufficiency out;
    std::vector<bool> produced(h.num_nodes(), false);
    std::vector<bool> consumed(h.num_nodes(), false);
    for (ArcIndex a : arcs) {
        const auto& arc = h.arc(a);
        bool has_output = false;
        bool has_input = false;
        for (const auto& inc : arc.target()) {
            produced[inc.node] = true;
            has_output = has_output || in_core[inc.node];
        }
        for (const auto& inc : arc.source()) {
            consumed[inc.node] = true;
            has_input = has_input || in_core[inc.node];
        }
        if (!has_output) {
            out.arcs_have_core_output = false;
            out.violations.push_back("arc " + arc.id() + " has no core output");
        }
        if (!has_input) {
            out.arcs_have_core_input = false;
            out.violations.push_back("arc " + arc.id() + " has no core input");
        }
    }
    for (NodeIndex v : core) {
        if (!produced[v]) {
            out.nodes_produced = false;
            out.violations.push_back("node " + h.node(v) + " is not produced by the arc set");
        }
        if (!consumed[v]) {
            out.nodes_consumed = false;
            out.violations.push_back("node " + h.node(v) + " is not consumed by the arc set");
        }
    }
    return out;
}

double check_realizability(const Hypergraph& h, std::span<const ArcIndex> arcs, std::span<const NodeIndex> core,
                           std::span<const double> flow) {
    if (flow.size() != h.num_arcs()) throw std::invalid_argument("flow length differs from the arc count");
    const auto in_set = membership(h.num_arcs(), arcs, "arc");
    membership(h.num_nodes(), core, "node");
    for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
        if (in_set[a] && !(flow[a] > 0.0)) {
            throw std::invalid_argument("flow on arc " + h.arc(a).id() + " must be positive");
        }
        if (!in_set[a] && flow[a] != 0.0) {
            throw std::invalid_argument("flow on arc " + h.arc(a).id() + " lies outside the arc set");
        }
    }
    return balance_margin(h, arcs, core, flow);
}

FlowSearch exists_realizing_flow(const Hypergraph& h, std::span<const ArcIndex> arcs,
                                 std::span<const NodeIndex> core, std::span<const double> eps_arc,
                                 std::span<const double> delta_arc, double margin) {
    if (eps_arc.size() != h.num_arcs() || delta_arc.size() != h.num_arcs()) {
        throw std::invalid_argument("flow bounds need one entry per arc");
    }
    membership(h.num_arcs(), arcs, "arc");
    membership(h.num_nodes(), core, "node");
    lp::Problem p;
    for (ArcIndex a : arcs) {
        if (!(eps_arc[a] > 0.0) || !(delta_arc[a] >= eps_arc[a]) || !std::isfinite(delta_arc[a])) {
            throw std::invalid_argument("arc " + h.arc(a).id() + ": need 0 < eps_arc <= delta_arc < inf");
        }
        p.add_column(eps_arc[a], delta_arc[a]);
    }
    for (NodeIndex v : core) {
        lp::Row row;
        for (std::size_t j = 0; j < arcs.size(); ++j) {
            const auto q = net(h.arc(arcs[j]), v);
            if (q != 0) row.emplace_back(j, static_cast<double>(q));
        }
        p.add_row(std::move(row), margin, lp::kInf);
    }
    lp::Options opts;
    opts.bland = true;
    const auto res = lp::solve(p, opts);

    FlowSearch out;
    if (res.status == lp::Status::Infeasible) {
        out.verdict = FlowVerdict::Infeasible;
        return out;
    }
    if (res.status != lp::Status::Optimal) return out;
    out.flow.assign(h.num_arcs(), 0.0);
    for (std::size_t j = 0; j < arcs.size(); ++j) {
        out.flow[arcs[j]] = std::clamp(res.x[j], eps_arc[arcs[j]], delta_arc[arcs[j]]);
    }
    if (balance_margin(h, arcs, core, out.flow) < margin - 1e-7) {
        out.flow.clear();
        return out;
    }
    out.verdict = FlowVerdict::Feasible;
    return out;
}

double synergy_rate(const Hyperarc& arc, std::span<const double> states) {
    double rate = arc.kappa();
    for (const auto& inc : arc.source()) {
        rate *= std::pow(states[inc.node], static_cast<double>(inc.multiplicity));
    }
    return rate;
}

SynergyCheck check_synergy(const Hypergraph& h, std::span<const ArcIndex> arcs, std::span<const double> flow,
                           std::span<const double> states, double tol) {
    if (flow.size() != h.num_arcs()) throw std::invalid_argument("flow length differs from the arc count");
    if (states.size() != h.num_nodes()) throw std::invalid_argument("state length differs from the node count");
    SynergyCheck out;
    for (ArcIndex a : arcs) {
        const double r = std::abs(flow[a] - synergy_rate(h.arc(a), states));
        out.residuals.push_back(r);
        out.max_residual = std::max(out.max_residual, r);
    }
    out.ok = out.max_residual <= tol;
    return out;
}

SynergyInfeasibility check_synergistic_infeasibility(const Hypergraph& h, std::span<const ArcIndex> arcs,
                                                     std::span<const NodeIndex> core, int points_per_state) {
    if (points_per_state < 2) throw std::invalid_argument("need at least 2 grid points per state");
    membership(h.num_arcs(), arcs, "arc");
    membership(h.num_nodes(), core, "node");
    SynergyInfeasibility out;

    // lambda >= 0 on the core, sum 1, lambda^T Q <= 0 on every arc.
    lp::Problem p;
    for (std::size_t i = 0; i < core.size(); ++i) p.add_column(0.0, lp::kInf);
    lp::Row total;
    for (std::size_t i = 0; i < core.size(); ++i) total.emplace_back(i, 1.0);
    if (!core.empty()) p.add_row(std::move(total), 1.0, 1.0);
    for (ArcIndex a : arcs) {
        lp::Row row;
        for (std::size_t i = 0; i < core.size(); ++i) {
            const auto q = net(h.arc(a), core[i]);
            if (q != 0) row.emplace_back(i, static_cast<double>(q));
        }
        p.add_row(std::move(row), -lp::kInf, 0.0);
    }
    if (!core.empty()) {
        lp::Options opts;
        opts.bland = true;
        const auto res = lp::solve(p, opts);
        if (res.status == lp::Status::Optimal) {
            out.farkas_certificate = true;
            out.multipliers = res.x;
        }
    }

    std::vector<NodeIndex> inputs;
    for (ArcIndex a : arcs) {
        for (const auto& inc : h.arc(a).source()) inputs.push_back(inc.node);
    }
    std::sort(inputs.begin(), inputs.end());
    inputs.erase(std::unique(inputs.begin(), inputs.end()), inputs.end());

    const double total_points = std::pow(static_cast<double>(points_per_state), static_cast<double>(inputs.size()));
    if (total_points > 2e7) throw GuardExceeded("synergy grid search exceeds 2e7 points");

    std::vector<double> levels;
    for (int k = 0; k < points_per_state; ++k) {
        levels.push_back(std::pow(10.0, -2.0 + 4.0 * k / (points_per_state - 1)));
    }
    std::vector<double> states(h.num_nodes(), 0.0);
    std::vector<int> digit(inputs.size(), 0);
    std::vector<double> rate(arcs.size());
    for (;;) {
        for (std::size_t i = 0; i < inputs.size(); ++i) states[inputs[i]] = levels[static_cast<std::size_t>(digit[i])];
        for (std::size_t j = 0; j < arcs.size(); ++j) rate[j] = synergy_rate(h.arc(arcs[j]), states);
        bool all_positive = true;
        for (NodeIndex v : core) {
            double sum = 0.0;
            for (std::size_t j = 0; j < arcs.size(); ++j) sum += static_cast<double>(net(h.arc(arcs[j]), v)) * rate[j];
            if (!(sum > 0.0)) {
                all_positive = false;
                break;
            }
        }
        ++out.grid_points;
        if (all_positive) out.grid_witness = true;

        std::size_t i = 0;
        while (i < digit.size() && ++digit[i] == points_per_state) digit[i++] = 0;
        if (i == digit.size()) break;
    }
    return out;
}

SynergyInfeasibility check_synergistic_infeasibility_7node() {
    const auto h = seven_node_example();
    const std::vector<std::string> arcs{"R2", "R3", "R4", "R5", "R6"};
    const std::vector<std::string> core{"S1", "S2", "S3", "S5", "S6"};
    return check_synergistic_infeasibility(h, arc_indices(h, arcs), node_indices(h, core));
}

bool Certificate::pass() const noexcept {
    if (!self_sufficiency.ok() || !(margin > tolerance)) return false;
    return !synergy_max_residual || *synergy_max_residual <= tolerance;
}

Certificate certify_candidate(const Hypergraph& h, std::span<const ArcIndex> arcs, std::span<const NodeIndex> core,
                              std::span<const double> flow, std::optional<std::span<const double>> states,
                              double tol) {
    Certificate c;
    c.tolerance = tol;
    c.self_sufficiency = check_self_sufficiency(h, arcs, core);
    c.margin = check_realizability(h, arcs, core, flow);
    if (states) c.synergy_max_residual = check_synergy(h, arcs, flow, *states, kInf).max_residual;
    return c;
}

bool ChainCertificate::pass() const noexcept {
    if (!nesting_ok || !theta_ok || !issues.empty()) return false;
    return std::all_of(periods.begin(), periods.end(), [](const PeriodCertificate& p) { return p.pass; });
}

double ChainCertificate::min_margin() const noexcept {
    double m = kInf;
    for (const auto& p : periods) m = std::min(m, p.margin);
    return m;
}

std::optional<double> ChainCertificate::synergy_max_residual() const noexcept {
    std::optional<double> out;
    for (const auto& p : periods) {
        if (p.synergy_max_residual) out = std::max(out.value_or(0.0), *p.synergy_max_residual);
    }
    return out;
}

ChainCertificate certify_chain(const Hypergraph& h, const ModelConfig& cfg, const ChainSolution& chain) {
    const auto res = resolve(h, cfg);
    const int horizon = chain.horizon();
    const auto periods = static_cast<std::size_t>(horizon);
    ChainCertificate cert;
    cert.margin_tolerance = 1e-6;
    constexpr double tol = 1e-6;

    if (horizon != cfg.horizon) cert.issues.push_back("chain horizon differs from the configured horizon");
    if (chain.active_nodes.size() != periods || chain.flows.size() != periods) {
        throw std::invalid_argument("chain has inconsistent period counts");
    }
    for (std::size_t t = 0; t < periods; ++t) {
        if (chain.flows[t].size() != h.num_arcs()) throw std::invalid_argument("chain flow length differs from the arc count");
        membership(h.num_nodes(), chain.active_nodes[t], "node");
        membership(h.num_arcs(), chain.active_arcs[t], "arc");
    }
    if (chain.has_states()) {
        if (chain.states.size() != periods + 1 || chain.state_flags.size() != periods) {
            throw std::invalid_argument("chain states need T+1 entries and T flag vectors");
        }
        for (std::size_t t = 0; t <= periods; ++t) {
            if (chain.states[t].size() != h.num_nodes()) throw std::invalid_argument("state length differs from the node count");
            if (t < periods && chain.state_flags[t].size() != h.num_nodes()) {
                throw std::invalid_argument("state flag length differs from the node count");
            }
        }
    }

    auto sorted = [](std::vector<std::size_t> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    for (std::size_t t = 0; t + 1 < periods; ++t) {
        const auto m0 = sorted(chain.active_nodes[t]);
        const auto m1 = sorted(chain.active_nodes[t + 1]);
        const auto a0 = sorted(chain.active_arcs[t]);
        const auto a1 = sorted(chain.active_arcs[t + 1]);
        if (!std::includes(m1.begin(), m1.end(), m0.begin(), m0.end())) {
            cert.nesting_ok = false;
            cert.issues.push_back("active nodes of period " + std::to_string(t + 1) + " are not kept in period " +
                                  std::to_string(t + 2));
        }
        if (!std::includes(a1.begin(), a1.end(), a0.begin(), a0.end())) {
            cert.nesting_ok = false;
            cert.issues.push_back("active arcs of period " + std::to_string(t + 1) + " are not kept in period " +
                                  std::to_string(t + 2));
        }
    }

    if (cert.nesting_ok && horizon >= 1) {
        std::vector<std::size_t> counts;
        for (const auto& a : chain.active_arcs) counts.push_back(a.size());
        const auto profile = growth_profile(counts, std::clamp(chain.q, 1, horizon));
        if (profile.theta != chain.profile.theta || profile.ordered_q_sum != chain.profile.ordered_q_sum ||
            chain.q != cfg.q) {
            cert.theta_ok = false;
            cert.issues.push_back("growth profile does not match the active arc counts");
        }
    }

    // Paired reverse arcs carry their forward arc's reverse flow.
    const bool reversible = chain.model == "gem-d-rev";
    const auto pairing = reversible ? detect_reversible(h) : ReversiblePairing{};
    std::vector<ArcIndex> bound_owner = iota_vector(h.num_arcs());
    if (reversible) {
        for (const auto& [fwd, rev] : pairing.pairs) bound_owner[rev] = fwd;
    }

    std::optional<PwlGrid> xgrid;
    double xbound = 0.0;
    if (chain.has_states()) {
        xgrid = state_grid(cfg);
        xbound = pwl_log_error_bound(*xgrid);
    }

    for (std::size_t t = 0; t < periods; ++t) {
        PeriodCertificate pc;
        pc.period = static_cast<int>(t + 1);
        const auto& arcs = chain.active_arcs[t];
        const auto& core = chain.active_nodes[t];
        const auto& flow = chain.flows[t];
        if (reversible) {
            for (ArcIndex a : arcs) {
                if (pairing.roles[a] == ArcRole::Reverse) {
                    pc.issues.push_back("reverse arc " + h.arc(a).id() + " is listed as active");
                }
            }
        }
        pc.self_sufficiency = check_self_sufficiency(h, arcs, core);
        for (const auto& v : pc.self_sufficiency.violations) pc.issues.push_back(v);

        std::vector<ArcIndex> flowing = arcs;
        if (reversible) {
            for (ArcIndex a : arcs) {
                if (pairing.roles[a] == ArcRole::Forward) flowing.push_back(*pairing.partner[a]);
            }
            std::sort(flowing.begin(), flowing.end());
        }
        std::vector<bool> is_flowing(h.num_arcs(), false);
        for (ArcIndex a : flowing) is_flowing[a] = true;

        for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
            const ArcIndex owner = bound_owner[a];
            const double f = flow[a];
            if (is_flowing[a]) {
                if (f < res.eps_arc[owner] - tol || f > res.delta_arc[owner] + tol) {
                    pc.flows_ok = false;
                    pc.issues.push_back("flow on arc " + h.arc(a).id() + " is outside its bounds");
                }
            } else if (std::abs(f) > tol) {
                pc.flows_ok = false;
                pc.issues.push_back("inactive arc " + h.arc(a).id() + " carries flow");
            }
        }

        pc.margin = balance_margin(h, flowing, core, flow);
        if (pc.margin < cfg.eps - cert.margin_tolerance) {
            pc.issues.push_back("realizability margin " + std::to_string(pc.margin) + " below eps");
        }

        if (chain.has_states()) {
            const auto& prev = chain.states[t];
            const auto& x = chain.states[t + 1];
            const auto& rho = chain.state_flags[t];
            const auto balance = net_balance(h, flow);
            double worst = 0.0;
            for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
                worst = std::max(worst, std::abs(x[v] - prev[v] - balance[v]));
                if (rho[v]) {
                    if (x[v] < cfg.eps - tol || x[v] > 1.0 / cfg.eps + tol) {
                        pc.issues.push_back("state of active node " + h.node(v) + " is outside [eps, 1/eps]");
                    }
                } else if (std::abs(x[v]) > tol) {
                    pc.issues.push_back("inactive node " + h.node(v) + " holds state");
                }
                if (t > 0 && chain.state_flags[t - 1][v] && !rho[v]) {
                    pc.issues.push_back("state flag of node " + h.node(v) + " switches off");
                }
                if (t == 0 && !rho[v] && std::abs(prev[v]) > tol) {
                    pc.issues.push_back("node " + h.node(v) + " has initial state but is inactive in period 1");
                }
            }
            for (NodeIndex v : core) {
                if (!rho[v]) pc.issues.push_back("self-amplifying node " + h.node(v) + " has no state");
            }
            pc.balance_max_residual = worst;
            if (worst > tol) pc.issues.push_back("state recursion residual " + std::to_string(worst));

            double abs_worst = 0.0;
            double log_worst = 0.0;
            double log_tol_worst = 0.0;
            for (ArcIndex a : flowing) {
                const auto& arc = h.arc(a);
                const double rate = synergy_rate(arc, x);
                abs_worst = std::max(abs_worst, std::abs(flow[a] - rate));
                const auto fgrid = flow_grid(arc.id(), arc.kappa(), arc.source_order(), res.eps_arc[bound_owner[a]], cfg);
                const double allowed =
                    pwl_log_error_bound(fgrid) + static_cast<double>(arc.source_order()) * xbound + tol;
                log_tol_worst = std::max(log_tol_worst, allowed);
                if (!(flow[a] > 0.0) || !(rate > 0.0)) {
                    pc.issues.push_back("synergistic law undefined on arc " + arc.id() + " (zero flow or input state)");
                    log_worst = kInf;
                    continue;
                }
                const double r = std::abs(std::log(flow[a]) - std::log(rate));
                log_worst = std::max(log_worst, r);
                if (r > allowed) {
                    pc.issues.push_back("synergy residual on arc " + arc.id() + " exceeds the grid error bound");
                }
            }
            pc.synergy_max_residual = abs_worst;
            pc.synergy_max_log_residual = log_worst;
            pc.synergy_log_tolerance = log_tol_worst;
        }
        pc.pass = pc.issues.empty() && pc.flows_ok && pc.self_sufficiency.ok();
        cert.periods.push_back(std::move(pc));
    }
    return cert;
}

namespace {

// Feasible cores of one arc set under self-sufficiency and (7)/(8a).
struct CoreOption {
    std::vector<NodeIndex> core;
    std::vector<double> flow;
};

class CoreCache {
public:
    CoreCache(const Hypergraph& h, const ModelConfig& cfg, const ResolvedConfig& res)
        : h_(h), cfg_(cfg), res_(res) {}

    const std::vector<CoreOption>& options(std::uint64_t arc_mask) {
        auto it = cache_.find(arc_mask);
        if (it != cache_.end()) return it->second;
        std::vector<CoreOption> out;
        const auto arcs = mask_members(arc_mask, all_arcs_);
        if (arcs.empty()) {
            out.push_back({{}, std::vector<double>(h_.num_arcs(), 0.0)});
        } else {
            const auto cand = both_sided_nodes(h_, arcs);
            if (cand.size() > kMaxCoreCandidates) throw GuardExceeded("too many candidate core nodes");
            for (std::uint64_t m = 1; m < (std::uint64_t{1} << cand.size()); ++m) {
                const auto core = mask_members(m, cand);
                if (!check_self_sufficiency(h_, arcs, core).ok()) continue;
                auto fs = exists_realizing_flow(h_, arcs, core, res_.eps_arc, res_.delta_arc, cfg_.eps);
                if (fs.verdict == FlowVerdict::NumericalFailure) {
                    throw std::runtime_error("flow search failed numerically");
                }
                if (fs.verdict == FlowVerdict::Feasible) out.push_back({core, std::move(fs.flow)});
            }
        }
        return cache_.emplace(arc_mask, std::move(out)).first->second;
    }

private:
    const Hypergraph& h_;
    const ModelConfig& cfg_;
    const ResolvedConfig& res_;
    std::vector<ArcIndex> all_arcs_ = iota_vector(h_.num_arcs());
    std::map<std::uint64_t, std::vector<CoreOption>> cache_;
};

bool is_subset(const std::vector<std::size_t>& small, const std::vector<std::size_t>& big) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

OracleResult oracle_gem_e(const Hypergraph& h, const ModelConfig& cfg) {
    const auto res = resolve(h, cfg);
    const auto horizon = static_cast<std::size_t>(cfg.horizon);
    if (h.num_arcs() * horizon > 16) throw GuardExceeded("oracle_gem_e needs |arcs| * T <= 16");
    CoreCache cache(h, cfg, res);

    const std::size_t n_arcs = h.num_arcs();
    const std::size_t base = horizon + 1;  // digit value T means "never"
    std::vector<std::size_t> digit(n_arcs, 0);

    OracleResult best;
    best.objective = 0.0;
    bool have_best = false;
    std::vector<std::uint64_t> best_masks;

    for (;;) {
        ++best.schedules;
        std::vector<std::uint64_t> masks(horizon, 0);
        for (std::size_t a = 0; a < n_arcs; ++a) {
            for (std::size_t t = digit[a]; t < horizon; ++t) masks[t] |= std::uint64_t{1} << a;
        }
        std::vector<std::size_t> counts(horizon);
        for (std::size_t t = 0; t < horizon; ++t) counts[t] = static_cast<std::size_t>(std::popcount(masks[t]));
        const auto profile = growth_profile(counts, cfg.q);
        const auto value = static_cast<double>(profile.ordered_q_sum);

        if (!have_best || value > best.objective) {
            // Forward reachability over nested cores.
            std::vector<const CoreOption*> reach;
            std::vector<CoreOption> empty_start{{{}, {}}};
            std::vector<const CoreOption*> prev{&empty_start[0]};
            bool feasible = true;
            for (std::size_t t = 0; t < horizon && feasible; ++t) {
                reach.clear();
                for (const auto& opt : cache.options(masks[t])) {
                    for (const auto* p : prev) {
                        if (is_subset(p->core, opt.core)) {
                            reach.push_back(&opt);
                            break;
                        }
                    }
                }
                feasible = !reach.empty();
                prev = reach;
            }
            if (feasible) {
                have_best = true;
                best.objective = value;
                best_masks = masks;
            }
        }

        std::size_t i = n_arcs;
        while (i > 0 && ++digit[i - 1] == base) digit[--i] = 0;
        if (i == 0) break;
    }

    // Rebuild the chain: per period the first reachable core that extends to the end.
    ChainSolution chain = empty_chain(h, cfg.horizon, cfg.q);
    if (have_best) {
        std::vector<std::vector<const CoreOption*>> reach(horizon);
        std::vector<NodeIndex> none;
        for (std::size_t t = 0; t < horizon; ++t) {
            for (const auto& opt : cache.options(best_masks[t])) {
                bool ok = t == 0;
                if (!ok) {
                    for (const auto* p : reach[t - 1]) ok = ok || is_subset(p->core, opt.core);
                }
                if (ok) reach[t].push_back(&opt);
            }
        }
        std::vector<const CoreOption*> pick(horizon, nullptr);
        for (std::size_t t = horizon; t-- > 0;) {
            for (const auto* opt : reach[t]) {
                if (t + 1 == horizon || is_subset(opt->core, pick[t + 1]->core)) {
                    pick[t] = opt;
                    break;
                }
            }
        }
        std::vector<std::size_t> counts;
        for (std::size_t t = 0; t < horizon; ++t) {
            chain.active_nodes[t] = pick[t]->core;
            chain.active_arcs[t] = mask_members(best_masks[t], iota_vector(n_arcs));
            chain.flows[t] = pick[t]->flow;
            counts.push_back(chain.active_arcs[t].size());
        }
        chain.profile = growth_profile(counts, cfg.q);
    }
    best.chain = std::move(chain);
    return best;
}

std::vector<Structure> find_minimal(const Hypergraph& h, const ModelConfig& cfg) {
    const auto res = resolve(h, cfg);
    if (h.num_arcs() > 12) throw GuardExceeded("find_minimal needs |arcs| <= 12");
    const auto all_arcs = iota_vector(h.num_arcs());

    struct Found {
        std::uint64_t arcs;
        std::vector<NodeIndex> core;
        Structure s;
    };
    std::vector<Found> found;
    for (std::uint64_t am = 1; am < (std::uint64_t{1} << h.num_arcs()); ++am) {
        const auto arcs = mask_members(am, all_arcs);
        const auto cand = both_sided_nodes(h, arcs);
        if (cand.size() > kMaxCoreCandidates) throw GuardExceeded("too many candidate core nodes");
        for (std::uint64_t m = 1; m < (std::uint64_t{1} << cand.size()); ++m) {
            const auto core = mask_members(m, cand);
            if (!check_self_sufficiency(h, arcs, core).ok()) continue;
            auto fs = exists_realizing_flow(h, arcs, core, res.eps_arc, res.delta_arc, cfg.eps);
            if (fs.verdict == FlowVerdict::NumericalFailure) throw std::runtime_error("flow search failed numerically");
            if (fs.verdict != FlowVerdict::Feasible) continue;
            found.push_back({am, core, {arcs, core, std::move(fs.flow)}});
        }
    }

    std::vector<Structure> out;
    for (std::size_t i = 0; i < found.size(); ++i) {
        bool minimal = true;
        for (std::size_t j = 0; j < found.size() && minimal; ++j) {
            if (i == j) continue;
            const bool arcs_sub = (found[j].arcs & ~found[i].arcs) == 0;
            if (arcs_sub && is_subset(found[j].core, found[i].core)) minimal = false;
        }
        if (minimal) out.push_back(found[i].s);
    }
    return out;
}

}  // namespace gemkit
