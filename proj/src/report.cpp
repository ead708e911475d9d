#include "gemkit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace gemkit {

namespace {

std::vector<bool> mask(std::size_t n, const std::vector<std::size_t>& members) {
    std::vector<bool> out(n, false);
    for (auto i : members) out.at(i) = true;
    return out;
}

enum class Status { Inactive, Old, New };

struct PeriodView {
    std::vector<Status> nodes;
    std::vector<Status> arcs;
};

PeriodView view_of(const Hypergraph& h, const ChainSolution& chain, int period) {
    if (period < 1 || period > chain.horizon()) {
        throw std::out_of_range("period " + std::to_string(period) + " outside 1.." + std::to_string(chain.horizon()));
    }
    const auto t = static_cast<std::size_t>(period - 1);
    const auto now_n = mask(h.num_nodes(), chain.active_nodes[t]);
    const auto now_a = mask(h.num_arcs(), chain.active_arcs[t]);
    const auto before_n = t > 0 ? mask(h.num_nodes(), chain.active_nodes[t - 1]) : std::vector<bool>(h.num_nodes());
    const auto before_a = t > 0 ? mask(h.num_arcs(), chain.active_arcs[t - 1]) : std::vector<bool>(h.num_arcs());
    PeriodView v;
    for (NodeIndex i = 0; i < h.num_nodes(); ++i) {
        v.nodes.push_back(!now_n[i] ? Status::Inactive : before_n[i] ? Status::Old : Status::New);
    }
    for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
        v.arcs.push_back(!now_a[a] ? Status::Inactive : before_a[a] ? Status::Old : Status::New);
    }
    return v;
}

// xcolor mixes with white: orange!70, orange!20, blue!70, blue!20, ...
constexpr const char* kInNew = "#FFA64D";
constexpr const char* kInOld = "#FFE6CC";
constexpr const char* kOutNew = "#4D4DFF";
constexpr const char* kOutOld = "#CCCCFF";
constexpr const char* kEdgeInOn = "#FF9933";
constexpr const char* kEdgeInOff = "#FFD9B3";
constexpr const char* kEdgeOutOn = "#1A1AFF";
constexpr const char* kEdgeOutOff = "#B3B3FF";
constexpr const char* kArcNew = "#FF0000";
constexpr const char* kArcOld = "#F4A6A6";

const char* node_fill(Status s, bool input) {
    switch (s) {
        case Status::New: return input ? kInNew : kOutNew;
        case Status::Old: return input ? kInOld : kOutOld;
        case Status::Inactive: break;
    }
    return "#FFFFFF";
}

std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

}  // namespace

ChainReport make_report(const Hypergraph& h, const ChainSolution& chain) {
    ChainReport r;
    r.q = chain.q;
    r.labels = classify_sectors(h, chain);
    if (chain.horizon() == 0) return r;
    std::vector<std::size_t> counts;
    for (const auto& arcs : chain.active_arcs) counts.push_back(arcs.size());
    const auto profile = growth_profile(counts, chain.q);
    r.theta = profile.theta;
    r.ordered_q_sum = profile.ordered_q_sum;
    for (int t = 1; t <= chain.horizon(); ++t) {
        const auto v = view_of(h, chain, t);
        PeriodSummary p;
        p.period = t;
        for (NodeIndex i = 0; i < h.num_nodes(); ++i) {
            if (v.nodes[i] == Status::New) p.new_nodes.push_back(i);
        }
        for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
            if (v.arcs[a] == Status::New) p.new_arcs.push_back(a);
        }
        p.active_nodes = chain.active_nodes[static_cast<std::size_t>(t - 1)].size();
        p.active_arcs = chain.active_arcs[static_cast<std::size_t>(t - 1)].size();
        r.periods.push_back(std::move(p));
    }
    return r;
}

Json to_json(const Hypergraph& h, const ChainReport& report) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["q"] = report.q;
    j["theta"] = report.theta;
    j["ordered_q_sum"] = report.ordered_q_sum;
    Json periods = Json::array();
    for (const auto& p : report.periods) {
        Json pj;
        pj["period"] = p.period;
        Json nodes = Json::array();
        for (auto v : p.new_nodes) nodes.push_back(h.node(v));
        Json arcs = Json::array();
        for (auto a : p.new_arcs) arcs.push_back(h.arc(a).id());
        pj["new_nodes"] = nodes;
        pj["new_arcs"] = arcs;
        pj["active_nodes"] = p.active_nodes;
        pj["active_arcs"] = p.active_arcs;
        periods.push_back(pj);
    }
    j["periods"] = periods;
    Json labels = Json::object();
    Json classes = Json::object();
    for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
        const std::string label(to_string(report.labels[v]));
        labels[h.node(v)] = label;
        classes[label].push_back(h.node(v));
    }
    j["classification"] = labels;
    j["classes"] = classes;
    return j;
}

std::string format_report(const Hypergraph& h, const ChainReport& report) {
    std::ostringstream out;
    out << "theta:";
    for (auto t : report.theta) out << ' ' << t;
    out << "\nordered " << report.q << "-sum: " << report.ordered_q_sum << '\n';
    for (const auto& p : report.periods) {
        out << "period " << p.period << ": " << p.active_arcs << " arcs, " << p.active_nodes << " core nodes; new arcs:";
        for (auto a : p.new_arcs) out << ' ' << h.arc(a).id();
        out << "; new nodes:";
        for (auto v : p.new_nodes) out << ' ' << h.node(v);
        out << '\n';
    }
    std::size_t width = 4;
    for (const auto& n : h.nodes()) width = std::max(width, n.size());
    out << "classification:\n";
    for (NodeIndex v = 0; v < h.num_nodes(); ++v) {
        out << "  " << h.node(v) << std::string(width - h.node(v).size() + 2, ' ') << to_string(report.labels[v]) << '\n';
    }
    return out.str();
}

std::string render_dot(const Hypergraph& h, const ChainSolution& chain, int period) {
    const auto v = view_of(h, chain, period);
    std::ostringstream out;
    out << "digraph period_" << period << " {\n";
    out << "  rankdir=LR;\n  nodesep=0.25;\n  ranksep=1.2;\n  newrank=true;\n";
    out << "  node [fontsize=10];\n";
    auto node_block = [&](const char* prefix, bool input) {
        out << "  subgraph " << (input ? "inputs" : "outputs") << " {\n    rank=same;\n";
        for (NodeIndex i = 0; i < h.num_nodes(); ++i) {
            out << "    " << prefix << i << " [shape=circle, style=filled, fillcolor=\"" << node_fill(v.nodes[i], input)
                << "\", label=" << dot_quote(h.node(i)) << "];\n";
        }
        for (NodeIndex i = 1; i < h.num_nodes(); ++i) out << "    " << prefix << i - 1 << " -> " << prefix << i << " [style=invis];\n";
        out << "  }\n";
    };
    node_block("in_", true);
    out << "  subgraph arcs {\n    rank=same;\n";
    for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
        out << "    arc_" << a << " [shape=square, style=filled, fillcolor=\"#FFFFFF\", ";
        switch (v.arcs[a]) {
            case Status::New: out << "color=\"" << kArcNew << "\", penwidth=2.5"; break;
            case Status::Old: out << "color=\"" << kArcOld << "\", penwidth=1.2"; break;
            case Status::Inactive: out << "color=\"#000000\", penwidth=0.6"; break;
        }
        out << ", label=" << dot_quote(h.arc(a).id()) << "];\n";
    }
    for (ArcIndex a = 1; a < h.num_arcs(); ++a) out << "    arc_" << a - 1 << " -> arc_" << a << " [style=invis];\n";
    out << "  }\n";
    node_block("out_", false);
    for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
        const bool on = v.arcs[a] != Status::Inactive;
        for (const auto& inc : h.arc(a).source()) {
            out << "  in_" << inc.node << " -> arc_" << a << " [color=\"" << (on ? kEdgeInOn : kEdgeInOff)
                << "\", penwidth=" << (on ? "1.6" : "0.8");
            if (inc.multiplicity > 1) out << ", label=\"" << inc.multiplicity << "\"";
            out << "];\n";
        }
        for (const auto& inc : h.arc(a).target()) {
            out << "  arc_" << a << " -> out_" << inc.node << " [color=\"" << (on ? kEdgeOutOn : kEdgeOutOff)
                << "\", penwidth=" << (on ? "1.6" : "0.8");
            if (inc.multiplicity > 1) out << ", label=\"" << inc.multiplicity << "\"";
            out << "];\n";
        }
    }
    out << "}\n";
    return out.str();
}

std::string render_svg(const Hypergraph& h, const ChainSolution& chain, int period) {
    const auto v = view_of(h, chain, period);
    constexpr double kRow = 40.0;
    constexpr double kTop = 40.0;
    constexpr double kLeft = 60.0;
    constexpr double kMid = 260.0;
    constexpr double kRight = 460.0;
    constexpr double kRadius = 14.0;
    constexpr double kHalf = 12.0;
    const std::size_t rows = std::max<std::size_t>({h.num_nodes(), h.num_arcs(), 1});
    const double height = kTop * 2 + kRow * static_cast<double>(rows - 1);
    // both columns centered on the same axis
    auto node_y = [&](std::size_t i) {
        return kTop + kRow * (static_cast<double>(i) + (static_cast<double>(rows) - static_cast<double>(h.num_nodes())) / 2);
    };
    auto arc_y = [&](std::size_t a) {
        return kTop + kRow * (static_cast<double>(a) + (static_cast<double>(rows) - static_cast<double>(h.num_arcs())) / 2);
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"520\" height=\"" << fixed(height) << "\" viewBox=\"0 0 520 "
        << fixed(height) << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    out << "<title>period " << period << "</title>\n";
    out << "<defs>\n";
    for (const char* c : {kEdgeInOn, kEdgeInOff, kEdgeOutOn, kEdgeOutOff}) {
        out << "<marker id=\"m" << (c + 1) << "\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"6\" "
            << "markerHeight=\"6\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"" << c << "\"/></marker>\n";
    }
    out << "</defs>\n";
    auto line = [&](double x1, double y1, double x2, double y2, const char* color, bool on) {
        out << "<line x1=\"" << fixed(x1) << "\" y1=\"" << fixed(y1) << "\" x2=\"" << fixed(x2) << "\" y2=\"" << fixed(y2)
            << "\" stroke=\"" << color << "\" stroke-width=\"" << (on ? "1.6" : "0.8") << "\" marker-end=\"url(#m"
            << (color + 1) << ")\"/>\n";
    };
    for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
        const bool on = v.arcs[a] != Status::Inactive;
        for (const auto& inc : h.arc(a).source()) {
            line(kLeft + kRadius, node_y(inc.node), kMid - kHalf, arc_y(a), on ? kEdgeInOn : kEdgeInOff, on);
        }
        for (const auto& inc : h.arc(a).target()) {
            line(kMid + kHalf, arc_y(a), kRight - kRadius, node_y(inc.node), on ? kEdgeOutOn : kEdgeOutOff, on);
        }
    }
    for (bool input : {true, false}) {
        const double x = input ? kLeft : kRight;
        for (NodeIndex i = 0; i < h.num_nodes(); ++i) {
            out << "<circle cx=\"" << fixed(x) << "\" cy=\"" << fixed(node_y(i)) << "\" r=\"" << fixed(kRadius)
                << "\" fill=\"" << node_fill(v.nodes[i], input) << "\" stroke=\"#000000\"/>\n";
            out << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(node_y(i) + 3.5) << "\" text-anchor=\"middle\">"
                << xml_escape(h.node(i)) << "</text>\n";
        }
    }
    for (ArcIndex a = 0; a < h.num_arcs(); ++a) {
        const char* stroke = "#000000";
        const char* width = "0.6";
        if (v.arcs[a] == Status::New) {
            stroke = kArcNew;
            width = "2.5";
        } else if (v.arcs[a] == Status::Old) {
            stroke = kArcOld;
            width = "1.2";
        }
        out << "<rect x=\"" << fixed(kMid - kHalf) << "\" y=\"" << fixed(arc_y(a) - kHalf) << "\" width=\""
            << fixed(2 * kHalf) << "\" height=\"" << fixed(2 * kHalf) << "\" fill=\"#FFFFFF\" stroke=\"" << stroke
            << "\" stroke-width=\"" << width << "\"/>\n";
        out << "<text x=\"" << fixed(kMid) << "\" y=\"" << fixed(arc_y(a) + 3.5) << "\" text-anchor=\"middle\">"
            << xml_escape(h.arc(a).id()) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace gemkit
