#include "gemkit/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace gemkit {

std::uint64_t SplitMix64::next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t SplitMix64::below(std::uint64_t bound) noexcept {
    // rejection keeps the result unbiased
    const std::uint64_t limit = -bound % bound;
    for (;;) {
        const std::uint64_t r = next();
        if (r >= limit) return r % bound;
    }
}

Hypergraph generate(const GenSpec& spec) {
    if (spec.n < 2) throw std::invalid_argument("generator needs n >= 2");
    if (spec.d < 1 || spec.d > spec.n) throw std::invalid_argument("generator needs 1 <= d <= n");
    const std::size_t n = spec.n;
    SplitMix64 rng(spec.seed);
    std::vector<std::string> nodes;
    for (std::size_t i = 1; i <= n; ++i) nodes.push_back("S" + std::to_string(i));
    std::vector<ArcSpec> arcs;
    std::vector<std::size_t> perm(n);
    for (std::size_t r = 1; r <= n; ++r) {
        const std::size_t s_in = 1 + rng.below(std::min(spec.d, n - 1));
        const std::size_t s_out = 1 + rng.below(std::min(spec.d, n - s_in));
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = 0; i < s_in + s_out; ++i) std::swap(perm[i], perm[i + rng.below(n - i)]);
        std::vector<std::size_t> in(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(s_in));
        std::vector<std::size_t> out(perm.begin() + static_cast<std::ptrdiff_t>(s_in),
                                     perm.begin() + static_cast<std::ptrdiff_t>(s_in + s_out));
        std::sort(in.begin(), in.end());
        std::sort(out.begin(), out.end());
        ArcSpec a;
        a.id = "R" + std::to_string(r);
        for (auto v : in) a.source.emplace_back(nodes[v], 1);
        for (auto v : out) a.target.emplace_back(nodes[v], 1);
        a.kappa = std::max(rng.uniform(), 1e-6);
        arcs.push_back(std::move(a));
    }
    return Hypergraph(std::move(nodes), std::move(arcs));
}

Json generation_meta(const GenSpec& spec) {
    Json j;
    j["n"] = spec.n;
    j["d"] = spec.d;
    j["seed"] = spec.seed;
    return j;
}

void IoTables::validate() const {
    auto unique = [](const std::vector<std::string>& names, const char* what) {
        std::unordered_set<std::string> seen;
        for (const auto& n : names) {
            if (n.empty()) throw std::invalid_argument(std::string("empty ") + what + " name");
            if (!seen.insert(n).second) throw std::invalid_argument(std::string("duplicate ") + what + " '" + n + "'");
        }
    };
    unique(commodity_names, "commodity");
    unique(industry_names, "industry");
    auto shape = [](const std::vector<std::vector<double>>& m, std::size_t rows, std::size_t cols, const char* what) {
        if (m.size() != rows) throw std::invalid_argument(std::string(what) + " table has the wrong number of rows");
        for (const auto& row : m) {
            if (row.size() != cols) throw std::invalid_argument(std::string(what) + " table is ragged");
            for (double v : row) {
                if (!(v >= 0.0) || !std::isfinite(v)) {
                    throw std::invalid_argument(std::string(what) + " table has a negative or non-finite entry");
                }
            }
        }
    };
    shape(use, commodity_names.size(), industry_names.size(), "use");
    shape(make, industry_names.size(), commodity_names.size(), "make");
    std::unordered_set<std::string> seen;
    for (const auto& s : special_categories) {
        if (std::find(commodity_names.begin(), commodity_names.end(), s) == commodity_names.end()) {
            throw std::invalid_argument("special category '" + s + "' is not a commodity");
        }
        if (!seen.insert(s).second) throw std::invalid_argument("special category '" + s + "' listed twice");
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw std::invalid_argument("unterminated quote in CSV line: " + line);
    out.push_back(cur);
    for (auto& s : out) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }
    return out;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::string> rows;
    std::vector<std::vector<double>> values;
};

Table read_csv_table(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    Table t;
    std::size_t line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split_csv_line(line);
        if (header) {
            t.columns.assign(cells.begin() + 1, cells.end());
            header = false;
            continue;
        }
        if (cells.size() != t.columns.size() + 1) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                        std::to_string(t.columns.size() + 1) + " fields");
        }
        t.rows.push_back(cells[0]);
        std::vector<double> row;
        for (std::size_t k = 1; k < cells.size(); ++k) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cells[k], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cells[k].size()) {
                throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                                            cells[k] + "'");
            }
            row.push_back(v);
        }
        t.values.push_back(std::move(row));
    }
    if (header) throw std::invalid_argument(path.string() + ": empty table");
    return t;
}

std::vector<std::size_t> match(const std::vector<std::string>& wanted, const std::vector<std::string>& have,
                               const std::string& what) {
    if (wanted.size() != have.size()) throw std::invalid_argument(what + ": name lists differ in length");
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < have.size(); ++i) pos[have[i]] = i;
    std::vector<std::size_t> out;
    for (const auto& w : wanted) {
        auto it = pos.find(w);
        if (it == pos.end()) throw std::invalid_argument(what + ": missing '" + w + "'");
        out.push_back(it->second);
    }
    return out;
}

}  // namespace

IoTables read_io_tables(const std::filesystem::path& use_csv, const std::filesystem::path& make_csv,
                        const std::filesystem::path& sidecar_json) {
    const auto use = read_csv_table(use_csv);
    const auto make = read_csv_table(make_csv);
    IoTables t;
    t.commodity_names = use.rows;
    t.industry_names = use.columns;
    t.use = use.values;
    const auto rows = match(t.industry_names, make.rows, "make rows vs use industries");
    const auto cols = match(t.commodity_names, make.columns, "make columns vs use commodities");
    t.make.assign(t.industry_names.size(), std::vector<double>(t.commodity_names.size(), 0.0));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        for (std::size_t c = 0; c < cols.size(); ++c) t.make[j][c] = make.values[rows[j]][cols[c]];
    }
    const auto side = read_json(sidecar_json);
    if (side.contains("special_categories")) {
        for (const auto& s : side.at("special_categories")) t.special_categories.push_back(s.get<std::string>());
    }
    if (side.contains("labels")) {
        for (const auto& [k, v] : side.at("labels").items()) t.labels[k] = v.get<std::string>();
    }
    t.validate();
    return t;
}

Ingestion ingest_io(const IoTables& tables, double threshold) {
    tables.validate();
    if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be non-negative");
    const std::size_t nc = tables.commodity_names.size();
    const std::size_t ni = tables.industry_names.size();
    std::vector<bool> special(nc, false);
    for (const auto& s : tables.special_categories) {
        special[static_cast<std::size_t>(
            std::find(tables.commodity_names.begin(), tables.commodity_names.end(), s) -
            tables.commodity_names.begin())] = true;
    }
    std::vector<std::string> nodes;
    for (std::size_t c = 0; c < nc; ++c) {
        if (!special[c]) nodes.push_back(tables.commodity_names[c]);
    }

    std::vector<double> use_total(ni, 0.0), make_total(ni, 0.0);
    for (std::size_t j = 0; j < ni; ++j) {
        for (std::size_t c = 0; c < nc; ++c) {
            use_total[j] += tables.use[c][j];
            make_total[j] += tables.make[j][c];
        }
    }
    auto use_share = [&](std::size_t c, std::size_t j) {
        return use_total[j] > 0.0 ? tables.use[c][j] / use_total[j] : 0.0;
    };
    auto make_share = [&](std::size_t j, std::size_t c) {
        return make_total[j] > 0.0 ? tables.make[j][c] / make_total[j] : 0.0;
    };

    Ingestion out;
    std::vector<ArcSpec> arcs;
    auto add = [&](std::string id, const std::vector<std::size_t>& src, const std::vector<std::size_t>& tgt) {
        if (src.empty() || tgt.empty()) {
            out.warnings.push_back("arc " + id + " dropped: empty " + (src.empty() ? "source" : "target") +
                                   " after thresholding");
            return;
        }
        ArcSpec a;
        a.id = std::move(id);
        for (auto c : src) a.source.emplace_back(tables.commodity_names[c], 1);
        for (auto c : tgt) a.target.emplace_back(tables.commodity_names[c], 1);
        arcs.push_back(std::move(a));
    };

    for (std::size_t j = 0; j < ni; ++j) {
        std::vector<std::size_t> src, tgt;
        for (std::size_t c = 0; c < nc; ++c) {
            if (special[c]) continue;
            if (use_share(c, j) > threshold) src.push_back(c);
            if (make_share(j, c) > threshold) tgt.push_back(c);
        }
        add(tables.industry_names[j], src, tgt);
    }

    std::vector<std::optional<std::size_t>> primary(ni);
    for (std::size_t j = 0; j < ni; ++j) {
        for (std::size_t c = 0; c < nc; ++c) {
            if (special[c] || tables.make[j][c] <= 0.0) continue;
            if (!primary[j] || tables.make[j][c] > tables.make[j][*primary[j]]) primary[j] = c;
        }
    }
    for (const auto& s : tables.special_categories) {
        const auto k = static_cast<std::size_t>(
            std::find(tables.commodity_names.begin(), tables.commodity_names.end(), s) - tables.commodity_names.begin());
        std::set<std::size_t> src, tgt;
        for (std::size_t j = 0; j < ni; ++j) {
            if (!primary[j]) continue;
            if (make_share(j, k) > threshold) src.insert(*primary[j]);
            if (use_share(k, j) > threshold) tgt.insert(*primary[j]);
        }
        add(s, {src.begin(), src.end()}, {tgt.begin(), tgt.end()});
    }
    out.hypergraph = Hypergraph(std::move(nodes), std::move(arcs));
    return out;
}

std::string_view to_string(SectorLabel label) noexcept {
    switch (label) {
        case SectorLabel::SelfAmplifying: return "SELF_AMPLIFYING";
        case SectorLabel::Food: return "FOOD";
        case SectorLabel::Waste: return "WASTE";
        case SectorLabel::NegativeNet: return "NEGATIVE_NET";
        case SectorLabel::Unused: break;
    }
    return "UNUSED";
}

std::vector<SectorLabel> classify_sectors(const Hypergraph& h, const ChainSolution& sol) {
    std::vector<SectorLabel> labels(h.num_nodes(), SectorLabel::Unused);
    if (sol.horizon() == 0) return labels;
    const auto last = static_cast<std::size_t>(sol.horizon() - 1);
    std::vector<bool> arc_on(h.num_arcs(), false);
    for (auto a : sol.active_arcs[last]) arc_on[a] = true;
    const auto& flow = sol.flows[last];
    for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
        if (a < flow.size() && flow[a] > 0.0) arc_on[a] = true;
    }
    std::vector<bool> consumed(h.num_nodes(), false), produced(h.num_nodes(), false);
    std::vector<double> net(h.num_nodes(), 0.0);
    for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
        if (!arc_on[a]) continue;
        const double fa = a < flow.size() ? flow[a] : 0.0;
        for (const auto& inc : h.arc(a).source()) {
            consumed[inc.node] = true;
            net[inc.node] -= static_cast<double>(inc.multiplicity) * fa;
        }
        for (const auto& inc : h.arc(a).target()) {
            produced[inc.node] = true;
            net[inc.node] += static_cast<double>(inc.multiplicity) * fa;
        }
    }
    for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
        if (consumed[v] && !produced[v]) labels[v] = SectorLabel::Food;
        if (produced[v] && !consumed[v]) labels[v] = SectorLabel::Waste;
        if (produced[v] && consumed[v] && net[v] < 0.0) labels[v] = SectorLabel::NegativeNet;
    }
    for (auto v : sol.active_nodes[last]) labels[v] = SectorLabel::SelfAmplifying;
    return labels;
}

}  // namespace gemkit
