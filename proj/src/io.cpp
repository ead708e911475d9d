#include "gemkit/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace gemkit {

namespace {

Json number_or_null(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

Json optional_number(const std::optional<double>& v) {
    if (!v) return nullptr;
    return number_or_null(*v);
}

Json ids(const Hypergraph& h, const std::vector<NodeIndex>& nodes, bool arcs) {
    Json out = Json::array();
    for (std::size_t i : nodes) out.push_back(arcs ? h.arc(i).id() : h.node(i));
    return out;
}

std::vector<std::size_t> indices_from(const Hypergraph& h, const Json& j, bool arcs) {
    std::vector<std::size_t> out;
    for (const auto& id : j) out.push_back(arcs ? h.arc_index(id.get<std::string>()) : h.node_index(id.get<std::string>()));
    return out;
}

Json self_sufficiency_json(const SelfSufficiency& s) {
    Json j;
    j["ok"] = s.ok();
    j["arcs_have_core_output"] = s.arcs_have_core_output;
    j["arcs_have_core_input"] = s.arcs_have_core_input;
    j["nodes_produced"] = s.nodes_produced;
    j["nodes_consumed"] = s.nodes_consumed;
    j["violations"] = s.violations;
    return j;
}

Json string_map(const std::map<std::string, double>& m) {
    Json j = Json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

std::map<std::string, double> map_from(const Json& j) {
    std::map<std::string, double> out;
    for (const auto& [k, v] : j.items()) out[k] = v.get<double>();
    return out;
}

}  // namespace

Json to_json(const Hypergraph& h, const std::optional<Json>& meta) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["nodes"] = h.nodes();
    Json arcs = Json::array();
    for (const auto& arc : h.arcs()) {
        Json a;
        a["id"] = arc.id();
        Json src = Json::object();
        for (const auto& inc : arc.source()) src[h.node(inc.node)] = inc.multiplicity;
        Json tgt = Json::object();
        for (const auto& inc : arc.target()) tgt[h.node(inc.node)] = inc.multiplicity;
        a["source"] = std::move(src);
        a["target"] = std::move(tgt);
        a["kappa"] = arc.kappa();
        arcs.push_back(std::move(a));
    }
    j["arcs"] = std::move(arcs);
    if (meta) j["meta"] = *meta;
    return j;
}

Hypergraph hypergraph_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("nodes") || !j.contains("arcs")) {
        throw std::invalid_argument("instance needs \"nodes\" and \"arcs\"");
    }
    std::vector<std::string> nodes;
    for (const auto& n : j.at("nodes")) nodes.push_back(n.get<std::string>());
    std::vector<ArcSpec> arcs;
    for (const auto& a : j.at("arcs")) {
        ArcSpec spec;
        spec.id = a.at("id").get<std::string>();
        for (const auto& [node, m] : a.at("source").items()) spec.source.emplace_back(node, m.get<std::int64_t>());
        for (const auto& [node, m] : a.at("target").items()) spec.target.emplace_back(node, m.get<std::int64_t>());
        spec.kappa = a.contains("kappa") ? a.at("kappa").get<double>() : 1.0;
        arcs.push_back(std::move(spec));
    }
    return Hypergraph(std::move(nodes), std::move(arcs));
}

Hypergraph read_instance(const std::filesystem::path& path) { return hypergraph_from_json(read_json(path)); }

void write_instance(const std::filesystem::path& path, const Hypergraph& h, const std::optional<Json>& meta) {
    write_text(path, dump(to_json(h, meta)));
}

Json to_json(const ModelConfig& cfg) {
    Json j;
    j["horizon"] = cfg.horizon;
    j["q"] = cfg.q;
    j["eps"] = cfg.eps;
    j["eps_arc_default"] = cfg.eps_arc_default;
    j["delta_arc_default"] = cfg.delta_arc_default;
    j["eps_arc"] = string_map(cfg.eps_arc);
    j["delta_arc"] = string_map(cfg.delta_arc);
    j["delta_node"] = string_map(cfg.delta_node);
    Json pwl;
    pwl["k"] = cfg.pwl.k;
    pwl["x_lo"] = optional_number(cfg.pwl.x_lo);
    pwl["x_hi"] = optional_number(cfg.pwl.x_hi);
    pwl["flow_hi"] = optional_number(cfg.pwl.flow_hi);
    j["pwl"] = std::move(pwl);
    j["reversible"] = cfg.reversible;
    return j;
}

ModelConfig config_from_json(const Json& j) {
    ModelConfig cfg;
    cfg.horizon = j.at("horizon").get<int>();
    cfg.q = j.at("q").get<int>();
    cfg.eps = j.at("eps").get<double>();
    cfg.eps_arc_default = j.value("eps_arc_default", cfg.eps_arc_default);
    cfg.delta_arc_default = j.value("delta_arc_default", cfg.delta_arc_default);
    if (j.contains("eps_arc")) cfg.eps_arc = map_from(j.at("eps_arc"));
    if (j.contains("delta_arc")) cfg.delta_arc = map_from(j.at("delta_arc"));
    if (j.contains("delta_node")) cfg.delta_node = map_from(j.at("delta_node"));
    if (j.contains("pwl")) {
        const auto& p = j.at("pwl");
        cfg.pwl.k = p.value("k", cfg.pwl.k);
        auto opt = [&p](const char* key) -> std::optional<double> {
            if (!p.contains(key) || p.at(key).is_null()) return std::nullopt;
            return p.at(key).get<double>();
        };
        cfg.pwl.x_lo = opt("x_lo");
        cfg.pwl.x_hi = opt("x_hi");
        cfg.pwl.flow_hi = opt("flow_hi");
    }
    cfg.reversible = j.value("reversible", false);
    return cfg;
}

Json to_json(const Hypergraph& h, const ChainSolution& chain) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["model"] = chain.model;
    j["q"] = chain.q;
    j["theta"] = chain.profile.theta;
    j["ordered_q_sum"] = chain.profile.ordered_q_sum;
    if (chain.has_states()) {
        Json x0 = Json::object();
        for (NodeIndex v = 0; v < h.num_nodes(); ++v) x0[h.node(v)] = chain.states[0][v];
        j["initial_states"] = std::move(x0);
    }
    Json periods = Json::array();
    for (std::size_t t = 0; t < chain.active_arcs.size(); ++t) {
        Json p;
        p["period"] = t + 1;
        p["active_nodes"] = ids(h, chain.active_nodes[t], false);
        p["active_arcs"] = ids(h, chain.active_arcs[t], true);
        Json flows = Json::object();
        for (ArcIndex a = 0; a < h.num_arcs(); ++a) flows[h.arc(a).id()] = chain.flows[t][a];
        p["flows"] = std::move(flows);
        if (chain.has_states()) {
            Json x = Json::object();
            Json flagged = Json::array();
            for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
                x[h.node(v)] = chain.states[t + 1][v];
                if (chain.state_flags[t][v]) flagged.push_back(h.node(v));
            }
            p["states"] = std::move(x);
            p["state_active"] = std::move(flagged);
        }
        periods.push_back(std::move(p));
    }
    j["periods"] = std::move(periods);
    return j;
}

ChainSolution chain_from_json(const Hypergraph& h, const Json& j) {
    ChainSolution c;
    c.model = j.at("model").get<std::string>();
    c.q = j.at("q").get<int>();
    const auto& periods = j.at("periods");
    const bool states = j.contains("initial_states");
    if (states) {
        std::vector<double> x0(h.num_nodes(), 0.0);
        for (const auto& [id, v] : j.at("initial_states").items()) x0[h.node_index(id)] = v.get<double>();
        c.states.push_back(std::move(x0));
    }
    for (const auto& p : periods) {
        c.active_nodes.push_back(indices_from(h, p.at("active_nodes"), false));
        c.active_arcs.push_back(indices_from(h, p.at("active_arcs"), true));
        std::vector<double> f(h.num_arcs(), 0.0);
        for (const auto& [id, v] : p.at("flows").items()) f[h.arc_index(id)] = v.get<double>();
        c.flows.push_back(std::move(f));
        if (states) {
            std::vector<double> x(h.num_nodes(), 0.0);
            for (const auto& [id, v] : p.at("states").items()) x[h.node_index(id)] = v.get<double>();
            c.states.push_back(std::move(x));
            std::vector<bool> flags(h.num_nodes(), false);
            for (const auto& id : p.at("state_active")) flags[h.node_index(id.get<std::string>())] = true;
            c.state_flags.push_back(std::move(flags));
        }
    }
    std::vector<std::size_t> counts;
    for (const auto& a : c.active_arcs) counts.push_back(a.size());
    if (!counts.empty()) c.profile = growth_profile(counts, c.q);
    return c;
}

Json to_json(const ChainCertificate& cert) {
    SelfSufficiency overall;
    for (const auto& p : cert.periods) {
        overall.arcs_have_core_output = overall.arcs_have_core_output && p.self_sufficiency.arcs_have_core_output;
        overall.arcs_have_core_input = overall.arcs_have_core_input && p.self_sufficiency.arcs_have_core_input;
        overall.nodes_produced = overall.nodes_produced && p.self_sufficiency.nodes_produced;
        overall.nodes_consumed = overall.nodes_consumed && p.self_sufficiency.nodes_consumed;
        for (const auto& v : p.self_sufficiency.violations) {
            overall.violations.push_back("period " + std::to_string(p.period) + ": " + v);
        }
    }
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["self_sufficiency"] = self_sufficiency_json(overall);
    j["margin"] = number_or_null(cert.min_margin());
    j["synergy_max_residual"] = optional_number(cert.synergy_max_residual());
    j["verdict"] = cert.pass() ? "PASS" : "FAIL";
    j["nesting_ok"] = cert.nesting_ok;
    j["theta_ok"] = cert.theta_ok;
    j["margin_tolerance"] = cert.margin_tolerance;
    j["issues"] = cert.issues;
    Json periods = Json::array();
    for (const auto& p : cert.periods) {
        Json pj;
        pj["period"] = p.period;
        pj["self_sufficiency"] = self_sufficiency_json(p.self_sufficiency);
        pj["margin"] = number_or_null(p.margin);
        pj["flows_ok"] = p.flows_ok;
        pj["balance_max_residual"] = optional_number(p.balance_max_residual);
        pj["synergy_max_residual"] = optional_number(p.synergy_max_residual);
        pj["synergy_max_log_residual"] = optional_number(p.synergy_max_log_residual);
        pj["synergy_log_tolerance"] = optional_number(p.synergy_log_tolerance);
        pj["issues"] = p.issues;
        pj["verdict"] = p.pass ? "PASS" : "FAIL";
        periods.push_back(std::move(pj));
    }
    j["periods"] = std::move(periods);
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path) {
    try {
        return Json::parse(read_text(path));
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

std::string sha256_hex(std::string_view bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 15]);
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

}  // namespace gemkit
