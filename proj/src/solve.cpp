#include "gemkit/solve.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "gemkit/io.hpp"
#include "gemkit/lp.hpp"

namespace gemkit {

std::string_view to_string(RunStatus s) noexcept {
    switch (s) {
        case RunStatus::Optimal: return "OPTIMAL";
        case RunStatus::Feasible: return "FEASIBLE";
        case RunStatus::Infeasible: return "INFEASIBLE";
        case RunStatus::Timeout: return "TIMEOUT";
        case RunStatus::Error: break;
    }
    return "ERROR";
}

namespace {

constexpr std::size_t kMaxLine = 255;

std::string num(double v) {
    if (v == kInfinity) return "inf";
    if (v == -kInfinity) return "-inf";
    if (v == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool name_char(char c) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')) return true;
    static constexpr std::string_view extra = "!\"#$%&()/,.;?@_`'{}|~";
    return extra.find(c) != std::string_view::npos;
}

void check_name(const std::string& name) {
    if (name.empty()) throw std::invalid_argument("empty name in model");
    if (name.size() > kMaxLine) throw std::invalid_argument("name longer than 255 characters: " + name.substr(0, 40) + "...");
    if ((name[0] >= '0' && name[0] <= '9') || name[0] == '.') {
        throw std::invalid_argument("name '" + name + "' starts with a digit or period");
    }
    for (char c : name) {
        if (!name_char(c)) throw std::invalid_argument("name '" + name + "' contains an unsupported character");
    }
}

void check_names(const ModelArtifact& m) {
    for (const auto& v : m.variables()) check_name(v.name);
    for (const auto& c : m.constraints()) check_name(c.name);
    for (const auto& g : m.sos2_groups()) check_name(g.name);
}

// Appends tokens, wrapping before the line would exceed the width.
class LineWriter {
public:
    explicit LineWriter(std::string& out) : out_(out) {}

    void start(std::string_view head) {
        finish();
        line_ = head;
    }
    void token(std::string_view tok) {
        if (line_.size() + 1 + tok.size() > kMaxLine) {
            out_ += line_;
            out_ += '\n';
            line_ = "   ";
        }
        line_ += ' ';
        line_ += tok;
    }
    void finish() {
        if (!line_.empty()) {
            out_ += line_;
            out_ += '\n';
            line_.clear();
        }
    }

private:
    std::string& out_;
    std::string line_;
};

void terms_out(LineWriter& w, const ModelArtifact& m, const std::vector<Term>& terms) {
    const auto& vars = m.variables();
    for (const auto& t : terms) {
        w.token(t.coef < 0 ? "-" : "+");
        w.token(num(std::abs(t.coef)));
        w.token(vars[t.var].name);
    }
}

double parse_number(std::string_view s) {
    if (s == "inf" || s == "+inf" || s == "infinity" || s == "+infinity" || s == "Inf" || s == "+Inf") return kInfinity;
    if (s == "-inf" || s == "-infinity" || s == "-Inf") return -kInfinity;
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size()) throw std::invalid_argument("bad number '" + tmp + "'");
    return v;
}

bool is_number(std::string_view s) {
    if (s.empty()) return false;
    try {
        parse_number(s);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

std::vector<std::string> split_ws(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Builds an artifact while reading, creating variables on first mention.
class Reader {
public:
    Reader() { m.kind = "lp"; }

    std::size_t var(const std::string& name) {
        if (auto i = m.find(name)) return *i;
        return m.add_variable({name, VarKind::Continuous, 0.0, kInfinity, "", "", 0});
    }

    ModelArtifact finish() {
        ModelArtifact out;
        out.kind = "lp";
        for (std::size_t i = 0; i < m.variables().size(); ++i) {
            auto v = m.variables()[i];
            if (auto it = lower_bound.find(v.name); it != lower_bound.end()) v.lower = it->second;
            if (auto it = upper_bound.find(v.name); it != upper_bound.end()) v.upper = it->second;
            if (binaries.count(v.name)) {
                v.kind = VarKind::Binary;
                if (!upper_bound.count(v.name)) v.upper = 1.0;
            }
            out.add_variable(std::move(v));
        }
        for (const auto& c : m.constraints()) out.add_named_constraint(c);
        for (const auto& g : m.sos2_groups()) out.add_sos2(g.name, g.vars, g.weights);
        out.set_objective(m.objective());
        return out;
    }

    ModelArtifact m;
    std::unordered_map<std::string, bool> binaries;
    std::unordered_map<std::string, double> lower_bound;
    std::unordered_map<std::string, double> upper_bound;
};

Sense sense_of(std::string_view s) {
    if (s == "<=" || s == "=<" || s == "<") return Sense::LessEqual;
    if (s == ">=" || s == "=>" || s == ">") return Sense::GreaterEqual;
    if (s == "=") return Sense::Equal;
    throw std::invalid_argument("bad sense '" + std::string(s) + "'");
}

bool is_sense(std::string_view s) {
    return s == "<=" || s == "=<" || s == "<" || s == ">=" || s == "=>" || s == ">" || s == "=";
}

// Parses "[+|-] [coef] var ..." starting at tokens[i] until a sense or a
// stop predicate; returns terms.
template <typename Stop>
std::vector<Term> parse_terms(Reader& r, const std::vector<std::string>& tok, std::size_t& i, Stop stop) {
    std::vector<Term> terms;
    double sign = 1.0;
    double coef = 1.0;
    bool have_coef = false;
    while (i < tok.size() && !stop(i)) {
        const auto& t = tok[i];
        if (t == "+") {
            sign = 1.0;
        } else if (t == "-") {
            sign = -1.0;
        } else if (is_number(t) && !have_coef) {
            coef = parse_number(t);
            have_coef = true;
        } else {
            terms.push_back({r.var(t), sign * coef});
            sign = 1.0;
            coef = 1.0;
            have_coef = false;
        }
        ++i;
    }
    return terms;
}

enum class Section { None, Objective, Constraints, Bounds, Binary, General, Sos, End };

Section section_keyword(const std::vector<std::string>& tok, std::size_t i, std::size_t& consumed) {
    const auto t = lower(tok[i]);
    consumed = 1;
    if (t == "maximize" || t == "maximise" || t == "max" || t == "minimize" || t == "minimise" || t == "min") {
        return Section::Objective;
    }
    if (t == "subject" && i + 1 < tok.size() && lower(tok[i + 1]) == "to") {
        consumed = 2;
        return Section::Constraints;
    }
    if (t == "st" || t == "s.t." || t == "st.") return Section::Constraints;
    if (t == "bounds" || t == "bound") return Section::Bounds;
    if (t == "binary" || t == "binaries" || t == "bin") return Section::Binary;
    if (t == "general" || t == "generals" || t == "gen") return Section::General;
    if (t == "sos") return Section::Sos;
    if (t == "end") return Section::End;
    return Section::None;
}

void add_bound(Reader& r, const std::string& name, double lo, double hi, bool set_lo, bool set_hi) {
    r.var(name);
    if (set_lo) r.lower_bound[name] = lo;
    if (set_hi) r.upper_bound[name] = hi;
}

double row_activity(const Constraint& c, const std::vector<double>& x) {
    double s = 0.0;
    for (const auto& t : c.terms) s += t.coef * x[t.var];
    return s;
}

}  // namespace

std::string format_lp(const ModelArtifact& m) {
    check_names(m);
    std::string out;
    LineWriter w(out);
    out += "Maximize\n";
    w.start(" obj:");
    terms_out(w, m, m.objective());
    w.finish();
    out += "Subject To\n";
    for (const auto& c : m.constraints()) {
        w.start(" " + c.name + ":");
        if (c.terms.empty()) {
            if (m.variables().empty()) throw std::invalid_argument("row " + c.name + " has no variables to reference");
            w.token("0");
            w.token(m.variables().front().name);
        }
        terms_out(w, m, c.terms);
        w.token(std::string(to_string(c.sense)));
        w.token(num(c.rhs));
        w.finish();
    }
    out += "Bounds\n";
    for (const auto& v : m.variables()) {
        if (v.kind == VarKind::Binary) continue;
        if (v.lower == -kInfinity && v.upper == kInfinity) {
            out += " " + v.name + " free\n";
        } else if (v.upper == kInfinity) {
            out += " " + v.name + " >= " + num(v.lower) + "\n";
        } else {
            out += " " + num(v.lower) + " <= " + v.name + " <= " + num(v.upper) + "\n";
        }
    }
    bool any_binary = false;
    for (const auto& v : m.variables()) {
        if (v.kind != VarKind::Binary) continue;
        if (!any_binary) {
            out += "Binary\n";
            any_binary = true;
        }
        out += " " + v.name + "\n";
    }
    if (!m.sos2_groups().empty()) {
        out += "SOS\n";
        for (const auto& g : m.sos2_groups()) {
            w.start(" " + g.name + ": S2::");
            for (std::size_t k = 0; k < g.vars.size(); ++k) w.token(m.variables()[g.vars[k]].name + ":" + num(g.weights[k]));
            w.finish();
        }
    }
    out += "End\n";
    return out;
}

void emit_lp(const ModelArtifact& m, const std::filesystem::path& path) { write_text(path, format_lp(m)); }

std::string format_mps(const ModelArtifact& m) {
    check_names(m);
    const auto& vars = m.variables();
    std::vector<std::vector<std::pair<std::string_view, double>>> cols(vars.size());
    for (const auto& t : m.objective()) cols[t.var].emplace_back("obj", t.coef);
    for (const auto& c : m.constraints()) {
        for (const auto& t : c.terms) cols[t.var].emplace_back(c.name, t.coef);
    }
    std::string out = "NAME gemkit\nOBJSENSE\n    MAX\nROWS\n N  obj\n";
    for (const auto& c : m.constraints()) {
        const char* s = c.sense == Sense::LessEqual ? " L  " : c.sense == Sense::GreaterEqual ? " G  " : " E  ";
        out += s + c.name + "\n";
    }
    out += "COLUMNS\n";
    for (std::size_t j = 0; j < vars.size(); ++j) {
        if (cols[j].empty()) {
            out += "    " + vars[j].name + " obj 0\n";
            continue;
        }
        for (const auto& [row, coef] : cols[j]) out += "    " + vars[j].name + " " + std::string(row) + " " + num(coef) + "\n";
    }
    out += "RHS\n";
    for (const auto& c : m.constraints()) {
        if (c.rhs != 0.0) out += "    RHS " + c.name + " " + num(c.rhs) + "\n";
    }
    out += "BOUNDS\n";
    for (const auto& v : vars) {
        if (v.kind == VarKind::Binary) {
            out += " BV BND " + v.name + "\n";
        } else if (v.lower == -kInfinity && v.upper == kInfinity) {
            out += " FR BND " + v.name + "\n";
        } else {
            if (v.lower == -kInfinity) {
                out += " MI BND " + v.name + "\n";
            } else if (v.lower != 0.0) {
                out += " LO BND " + v.name + " " + num(v.lower) + "\n";
            }
            if (v.upper != kInfinity) out += " UP BND " + v.name + " " + num(v.upper) + "\n";
        }
    }
    if (!m.sos2_groups().empty()) {
        out += "SOS\n";
        for (const auto& g : m.sos2_groups()) {
            out += " S2 SOS " + g.name + "\n";
            for (std::size_t k = 0; k < g.vars.size(); ++k) out += "    " + vars[g.vars[k]].name + " " + num(g.weights[k]) + "\n";
        }
    }
    out += "ENDATA\n";
    return out;
}

void emit_mps(const ModelArtifact& m, const std::filesystem::path& path) { write_text(path, format_mps(m)); }

ModelArtifact parse_lp(std::string_view text) {
    // strip comments
    std::string clean;
    for (std::size_t i = 0; i < text.size();) {
        std::size_t j = text.find('\n', i);
        if (j == std::string_view::npos) j = text.size();
        auto line = text.substr(i, j - i);
        if (auto c = line.find('\\'); c != std::string_view::npos) line = line.substr(0, c);
        clean.append(line);
        clean.push_back('\n');
        i = j + 1;
    }
    // keep "S2::" and "name:" separable from following tokens
    const auto tok = split_ws(clean);
    Reader r;
    Section sec = Section::None;
    bool maximize = true;
    std::size_t i = 0;
    auto at_section = [&](std::size_t k) {
        std::size_t used = 0;
        return section_keyword(tok, k, used) != Section::None;
    };
    while (i < tok.size()) {
        std::size_t used = 0;
        const auto kw = section_keyword(tok, i, used);
        if (kw != Section::None) {
            if (kw == Section::Objective) maximize = lower(tok[i]).rfind("max", 0) == 0;
            sec = kw;
            i += used;
            if (sec == Section::End) break;
            continue;
        }
        switch (sec) {
            case Section::Objective: {
                if (tok[i].back() == ':') ++i;
                auto terms = parse_terms(r, tok, i, at_section);
                if (!maximize) {
                    for (auto& t : terms) t.coef = -t.coef;
                }
                r.m.set_objective(std::move(terms));
                break;
            }
            case Section::Constraints: {
                std::string name;
                if (tok[i].back() == ':') {
                    name = tok[i].substr(0, tok[i].size() - 1);
                    ++i;
                } else {
                    name = "R" + std::to_string(r.m.constraints().size() + 1);
                }
                auto terms = parse_terms(r, tok, i, [&](std::size_t k) { return is_sense(tok[k]) || at_section(k); });
                if (i + 1 >= tok.size() || !is_sense(tok[i])) throw std::invalid_argument("row " + name + " lacks a sense");
                const auto sense = sense_of(tok[i]);
                const double rhs = parse_number(tok[i + 1]);
                i += 2;
                std::erase_if(terms, [](const Term& t) { return t.coef == 0.0; });
                r.m.add_named_constraint({name, name, std::move(terms), sense, rhs});
                break;
            }
            case Section::Bounds: {
                const auto& a = tok[i];
                if (is_number(a)) {
                    if (i + 2 >= tok.size()) throw std::invalid_argument("truncated bound");
                    const double lo = parse_number(a);
                    const auto& name = tok[i + 2];
                    if (tok[i + 1] == "=") {
                        add_bound(r, name, lo, lo, true, true);
                        i += 3;
                        break;
                    }
                    add_bound(r, name, lo, 0, true, false);
                    i += 3;
                    if (i + 1 < tok.size() && (tok[i] == "<=" || tok[i] == "<")) {
                        add_bound(r, name, 0, parse_number(tok[i + 1]), false, true);
                        i += 2;
                    }
                } else {
                    if (i + 1 >= tok.size()) throw std::invalid_argument("truncated bound");
                    if (lower(tok[i + 1]) == "free") {
                        add_bound(r, a, -kInfinity, kInfinity, true, true);
                        i += 2;
                        break;
                    }
                    if (i + 2 >= tok.size()) throw std::invalid_argument("truncated bound");
                    const auto s = sense_of(tok[i + 1]);
                    const double v = parse_number(tok[i + 2]);
                    add_bound(r, a, v, v, s != Sense::LessEqual, s != Sense::GreaterEqual);
                    i += 3;
                }
                break;
            }
            case Section::Binary:
                r.var(tok[i]);
                r.binaries[tok[i]] = true;
                ++i;
                break;
            case Section::General:
                throw std::invalid_argument("general integer variables are not supported");
            case Section::Sos: {
                if (tok[i].back() != ':') throw std::invalid_argument("SOS group needs a name");
                const auto name = tok[i].substr(0, tok[i].size() - 1);
                if (i + 1 >= tok.size() || (tok[i + 1] != "S2::" && tok[i + 1] != "s2::")) {
                    throw std::invalid_argument("only S2 groups are supported");
                }
                i += 2;
                std::vector<std::size_t> members;
                std::vector<double> weights;
                while (i < tok.size() && !at_section(i) && tok[i].back() != ':') {
                    const auto colon = tok[i].rfind(':');
                    if (colon == std::string::npos) throw std::invalid_argument("SOS member needs name:weight");
                    members.push_back(r.var(tok[i].substr(0, colon)));
                    weights.push_back(parse_number(tok[i].substr(colon + 1)));
                    ++i;
                }
                r.m.add_sos2(name, std::move(members), std::move(weights));
                break;
            }
            case Section::None:
            case Section::End:
                throw std::invalid_argument("unexpected token '" + tok[i] + "'");
        }
    }
    return r.finish();
}

ModelArtifact parse_mps(std::string_view text) {
    Reader r;
    std::string section;
    bool maximize = false;
    std::string objective_row;
    std::unordered_map<std::string, std::size_t> row_index;
    std::vector<Constraint> rows;
    std::vector<Term> objective;
    std::optional<std::size_t> sos_current;
    std::vector<std::pair<std::string, std::pair<std::vector<std::size_t>, std::vector<double>>>> groups;

    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty() || line[0] == '*') continue;
        const auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (!std::isspace(static_cast<unsigned char>(line[0]))) {
            section = tok[0];
            if (section == "OBJSENSE" && tok.size() > 1) maximize = tok[1] == "MAX" || tok[1] == "MAXIMIZE";
            if (section == "ENDATA") break;
            continue;
        }
        if (section == "OBJSENSE") {
            maximize = tok[0] == "MAX" || tok[0] == "MAXIMIZE";
        } else if (section == "ROWS") {
            if (tok.size() != 2) throw std::invalid_argument("bad ROWS line");
            if (tok[0] == "N") {
                if (objective_row.empty()) objective_row = tok[1];
                continue;
            }
            const Sense s = tok[0] == "L" ? Sense::LessEqual : tok[0] == "G" ? Sense::GreaterEqual : Sense::Equal;
            if (tok[0] != "L" && tok[0] != "G" && tok[0] != "E") throw std::invalid_argument("bad row type " + tok[0]);
            row_index[tok[1]] = rows.size();
            rows.push_back({tok[1], tok[1], {}, s, 0.0});
        } else if (section == "COLUMNS") {
            if (tok.size() == 3 && tok[1] == "'MARKER'") throw std::invalid_argument("integer markers are not supported");
            if (tok.size() != 3 && tok.size() != 5) throw std::invalid_argument("bad COLUMNS line");
            const auto v = r.var(tok[0]);
            for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
                const double c = parse_number(tok[k + 1]);
                if (tok[k] == objective_row) {
                    if (c != 0.0) objective.push_back({v, c});
                } else {
                    auto it = row_index.find(tok[k]);
                    if (it == row_index.end()) throw std::invalid_argument("unknown row " + tok[k]);
                    if (c != 0.0) rows[it->second].terms.push_back({v, c});
                }
            }
        } else if (section == "RHS") {
            for (std::size_t k = tok.size() % 2 == 1 ? 1 : 0; k + 1 < tok.size(); k += 2) {
                auto it = row_index.find(tok[k]);
                if (it == row_index.end()) throw std::invalid_argument("unknown row " + tok[k]);
                rows[it->second].rhs = parse_number(tok[k + 1]);
            }
        } else if (section == "BOUNDS") {
            if (tok.size() < 3) throw std::invalid_argument("bad BOUNDS line");
            const auto& type = tok[0];
            const auto& name = tok[2];
            const double v = tok.size() > 3 ? parse_number(tok[3]) : 0.0;
            if (type == "BV") {
                r.var(name);
                r.binaries[name] = true;
            } else if (type == "FR") {
                add_bound(r, name, -kInfinity, kInfinity, true, true);
            } else if (type == "MI") {
                add_bound(r, name, -kInfinity, 0, true, false);
            } else if (type == "PL") {
                add_bound(r, name, 0, kInfinity, false, true);
            } else if (type == "LO") {
                add_bound(r, name, v, 0, true, false);
            } else if (type == "UP") {
                add_bound(r, name, 0, v, false, true);
            } else if (type == "FX") {
                add_bound(r, name, v, v, true, true);
            } else {
                throw std::invalid_argument("unsupported bound type " + type);
            }
        } else if (section == "SOS") {
            if (tok[0] == "S2" && tok.size() >= 2) {
                groups.push_back({tok.back(), {}});
                sos_current = groups.size() - 1;
            } else if (tok[0] == "S1") {
                throw std::invalid_argument("only S2 groups are supported");
            } else {
                if (!sos_current || tok.size() != 2) throw std::invalid_argument("bad SOS line");
                groups[*sos_current].second.first.push_back(r.var(tok[0]));
                groups[*sos_current].second.second.push_back(parse_number(tok[1]));
            }
        } else if (section != "NAME") {
            throw std::invalid_argument("unsupported MPS section " + section);
        }
    }
    if (!maximize) {
        for (auto& t : objective) t.coef = -t.coef;
    }
    r.m.set_objective(std::move(objective));
    for (auto& c : rows) r.m.add_named_constraint(std::move(c));
    for (auto& [name, g] : groups) r.m.add_sos2(name, std::move(g.first), std::move(g.second));
    return r.finish();
}

ModelArtifact read_model(const std::filesystem::path& path) {
    const auto text = read_text(path);
    if (path.extension() == ".mps") return parse_mps(text);
    return parse_lp(text);
}

ModelArtifact sos2_to_binaries(const ModelArtifact& m) {
    ModelArtifact out;
    out.kind = m.kind;
    for (const auto& v : m.variables()) out.add_variable(v);
    for (const auto& c : m.constraints()) out.add_named_constraint(c);
    for (const auto& g : m.sos2_groups()) {
        const std::size_t K = g.vars.size();
        std::vector<std::size_t> order(K);
        for (std::size_t k = 0; k < K; ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(), [&g](std::size_t a, std::size_t b) { return g.weights[a] < g.weights[b]; });
        for (std::size_t k = 1; k + 1 < K; ++k) {
            const auto d = out.add_variable(
                {"sosbin_" + g.name + "_" + std::to_string(k), VarKind::Binary, 0, 1, "sosbin", g.name, static_cast<int>(k)});
            // sum_{j>k+1} lambda_j <= d_k
            std::vector<Term> upper{{d, -1.0}};
            for (std::size_t j = k + 1; j < K; ++j) upper.push_back({g.vars[order[j]], 1.0});
            out.add_constraint("sos2:incremental", std::move(upper), Sense::LessEqual, 0.0);
            // d_k <= sum_{j>k} lambda_j
            std::vector<Term> lower_row{{d, 1.0}};
            for (std::size_t j = k; j < K; ++j) lower_row.push_back({g.vars[order[j]], -1.0});
            out.add_constraint("sos2:incremental", std::move(lower_row), Sense::LessEqual, 0.0);
        }
    }
    out.set_objective(m.objective());
    return out;
}

double max_violation(const ModelArtifact& m, const Assignment& a) {
    std::vector<double> x(m.variables().size(), 0.0);
    double worst = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const auto& v = m.variables()[j];
        auto it = a.find(v.name);
        if (it != a.end()) x[j] = it->second;
        worst = std::max({worst, v.lower - x[j], x[j] - v.upper});
        if (v.kind == VarKind::Binary) worst = std::max(worst, std::min(std::abs(x[j]), std::abs(x[j] - 1.0)));
    }
    for (const auto& c : m.constraints()) {
        const double s = row_activity(c, x);
        if (c.sense != Sense::GreaterEqual) worst = std::max(worst, s - c.rhs);
        if (c.sense != Sense::LessEqual) worst = std::max(worst, c.rhs - s);
    }
    for (const auto& g : m.sos2_groups()) {
        std::vector<std::size_t> nz;
        for (std::size_t k = 0; k < g.vars.size(); ++k) {
            if (std::abs(x[g.vars[k]]) > 1e-9) nz.push_back(k);
        }
        if (nz.size() > 2 || (nz.size() == 2 && nz[1] != nz[0] + 1)) {
            double mass = 0.0;
            for (std::size_t k : nz) mass += std::abs(x[g.vars[k]]);
            worst = std::max(worst, mass);
        }
    }
    return worst;
}

namespace {

lp::Problem to_problem(const ModelArtifact& m) {
    lp::Problem p;
    for (const auto& v : m.variables()) p.add_column(v.lower, v.upper, 0.0);
    for (const auto& t : m.objective()) p.objective[t.var] += t.coef;
    for (const auto& c : m.constraints()) {
        lp::Row row;
        for (const auto& t : c.terms) row.emplace_back(t.var, t.coef);
        const double lo = c.sense == Sense::LessEqual ? -lp::kInf : c.rhs;
        const double hi = c.sense == Sense::GreaterEqual ? lp::kInf : c.rhs;
        p.add_row(std::move(row), lo, hi);
    }
    return p;
}

struct BoundChange {
    std::size_t col;
    double lower;
    double upper;
};

struct Node {
    std::vector<BoundChange> changes;
    std::shared_ptr<const lp::Simplex::Basis> start;  // parent's optimal basis
};

}  // namespace

SolverRun solve_internal(const ModelArtifact& m, const InternalOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    if (m.num_binaries() > opts.guard) {
        throw GuardExceeded("model has " + std::to_string(m.num_binaries()) + " binaries, guard is " +
                            std::to_string(opts.guard));
    }
    if (!m.sos2_groups().empty() && !opts.allow_sos2) {
        throw std::invalid_argument("model has SOS2 groups; enable SOS2 branching or rewrite them with binaries");
    }
    const bool integral = opts.integral_objective.value_or(m.kind.rfind("gem", 0) == 0);

    SolverRun run;
    run.artifact_digest = sha256_hex(format_lp(m));
    const auto problem = to_problem(m);
    lp::Simplex simplex(problem);
    std::vector<std::size_t> binaries;
    for (std::size_t j = 0; j < m.variables().size(); ++j) {
        if (m.variables()[j].kind == VarKind::Binary) binaries.push_back(j);
    }

    std::vector<Node> stack{Node{}};
    std::vector<BoundChange> applied;
    std::shared_ptr<const lp::Simplex::Basis> resident;  // basis currently loaded, if saved
    std::optional<double> incumbent;
    std::vector<double> best;
    bool lp_trouble = false;

    auto elapsed = [&start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    bool stopped = false;

    while (!stack.empty()) {
        if (run.nodes >= opts.node_limit || elapsed() > opts.time_limit) {
            stopped = true;
            break;
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        ++run.nodes;

        for (const auto& c : applied) simplex.set_column_bounds(c.col, problem.col_lower[c.col], problem.col_upper[c.col]);
        for (const auto& c : node.changes) simplex.set_column_bounds(c.col, c.lower, c.upper);
        applied = node.changes;
        if (node.start && node.start != resident) simplex.set_basis(*node.start);
        resident.reset();

        const auto status = simplex.solve();
        if (status == lp::Status::Infeasible) continue;
        if (status != lp::Status::Optimal) {
            lp_trouble = true;
            run.message = "LP relaxation returned " + std::string(lp::to_string(status));
            continue;
        }
        const double bound = simplex.objective_value();
        if (incumbent) {
            if (integral ? std::floor(bound + 1e-6) <= *incumbent + 1e-9 : bound <= *incumbent + 1e-9) continue;
        }
        const auto x = simplex.column_values();

        std::optional<std::size_t> branch_col;
        double best_frac = 1.0;
        for (std::size_t j : binaries) {
            const double frac = std::abs(x[j] - std::round(x[j]));
            if (frac > 1e-6) {
                const double dist = std::abs(x[j] - 0.5);
                if (dist < best_frac) {
                    best_frac = dist;
                    branch_col = j;
                }
            }
        }
        node.start = std::make_shared<const lp::Simplex::Basis>(simplex.basis());
        resident = node.start;
        if (branch_col) {
            const std::size_t j = *branch_col;
            Node down = node;
            down.changes.push_back({j, 0.0, 0.0});
            Node up = node;
            up.changes.push_back({j, 1.0, 1.0});
            if (x[j] >= 0.5) {
                stack.push_back(std::move(down));
                stack.push_back(std::move(up));
            } else {
                stack.push_back(std::move(up));
                stack.push_back(std::move(down));
            }
            continue;
        }

        bool sos_branched = false;
        for (const auto& g : m.sos2_groups()) {
            std::vector<std::size_t> nz;
            for (std::size_t k = 0; k < g.vars.size(); ++k) {
                if (std::abs(x[g.vars[k]]) > 1e-9) nz.push_back(k);
            }
            if (nz.size() <= 1 || (nz.size() == 2 && nz[1] == nz[0] + 1)) continue;
            const std::size_t r = nz.front() + (nz.back() - nz.front()) / 2;
            Node left = node;
            Node right = node;
            double left_mass = 0.0;
            double right_mass = 0.0;
            for (std::size_t k = 0; k < g.vars.size(); ++k) {
                if (k > r) {
                    left.changes.push_back({g.vars[k], 0.0, 0.0});
                    right_mass += x[g.vars[k]];
                }
                if (k < r) {
                    right.changes.push_back({g.vars[k], 0.0, 0.0});
                    left_mass += x[g.vars[k]];
                }
            }
            if (left_mass >= right_mass) {
                stack.push_back(std::move(right));
                stack.push_back(std::move(left));
            } else {
                stack.push_back(std::move(left));
                stack.push_back(std::move(right));
            }
            sos_branched = true;
            break;
        }
        if (sos_branched) continue;

        incumbent = integral ? std::round(bound) : bound;
        if (integral && std::abs(bound - *incumbent) > 1e-6) incumbent = bound;
        best = x;
    }

    run.wall_time = elapsed();
    if (!incumbent) {
        if (lp_trouble) {
            run.status = RunStatus::Error;
        } else {
            run.status = stopped ? RunStatus::Timeout : RunStatus::Infeasible;
        }
        return run;
    }
    for (std::size_t j = 0; j < m.variables().size(); ++j) {
        double v = best[j];
        if (m.variables()[j].kind == VarKind::Binary) v = std::round(v);
        if (std::abs(v) < 1e-12) v = 0.0;
        run.assignment[m.variables()[j].name] = v;
    }
    std::vector<double> values;
    for (const auto& v : m.variables()) values.push_back(run.assignment[v.name]);
    run.objective = m.evaluate_objective(values);
    if (std::abs(*run.objective - *incumbent) > 1e-6) {
        run.status = RunStatus::Error;
        run.message = "recomputed objective disagrees with the search value";
        return run;
    }
    if (integral && *incumbent == std::round(*incumbent)) run.objective = *incumbent;
    if (lp_trouble) {
        run.status = RunStatus::Feasible;
    } else {
        run.status = stopped ? RunStatus::Feasible : RunStatus::Optimal;
    }
    return run;
}

SolverRun parse_solution(std::string_view text, const ModelArtifact& m) {
    SolverRun run;
    std::optional<RunStatus> marker;
    std::optional<double> reported;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        const auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok[0][0] == '#') {
            std::vector<std::string> body = tok;
            if (body[0] == "#") {
                body.erase(body.begin());
            } else {
                body[0] = body[0].substr(1);
            }
            if (body.size() == 2 && body[0] == "status") {
                if (body[1] == "OPTIMAL") marker = RunStatus::Optimal;
                else if (body[1] == "FEASIBLE") marker = RunStatus::Feasible;
                else if (body[1] == "INFEASIBLE") marker = RunStatus::Infeasible;
                else if (body[1] == "TIMEOUT") marker = RunStatus::Timeout;
                else {
                    run.status = RunStatus::Error;
                    run.message = "line " + std::to_string(line_no) + ": unknown status '" + body[1] + "'";
                    return run;
                }
            } else if (body.size() == 2 && body[0] == "objective") {
                if (!is_number(body[1])) {
                    run.status = RunStatus::Error;
                    run.message = "line " + std::to_string(line_no) + ": unparsable objective";
                    return run;
                }
                reported = parse_number(body[1]);
            }
            continue;
        }
        if (tok.size() != 2 || !is_number(tok[1]) || !m.find(tok[0])) {
            run.status = RunStatus::Error;
            run.assignment.clear();
            run.message = "line " + std::to_string(line_no) + ": expected '<variable> <value>'";
            return run;
        }
        run.assignment[tok[0]] = parse_number(tok[1]);
    }

    if (marker == RunStatus::Infeasible) {
        run.status = RunStatus::Infeasible;
        run.assignment.clear();
        return run;
    }
    if (marker == RunStatus::Timeout) {
        run.status = RunStatus::Timeout;
    } else if (run.assignment.empty()) {
        run.status = RunStatus::Error;
        run.message = "solution file holds no assignment";
        return run;
    } else {
        run.status = marker.value_or(RunStatus::Optimal);
    }
    if (run.assignment.empty()) return run;
    for (const auto& v : m.variables()) run.assignment.emplace(v.name, 0.0);
    std::vector<double> values;
    for (const auto& v : m.variables()) values.push_back(run.assignment.at(v.name));
    run.objective = m.evaluate_objective(values);
    if (reported && std::abs(*reported - *run.objective) > 1e-6) {
        run.status = RunStatus::Error;
        run.message = "reported objective " + num(*reported) + " differs from recomputed " + num(*run.objective);
    }
    return run;
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    return out + "'";
}

std::string substitute(std::string tpl, const std::string& key, const std::string& value) {
    for (std::size_t p = tpl.find(key); p != std::string::npos; p = tpl.find(key, p + value.size())) {
        tpl.replace(p, key.size(), value);
    }
    return tpl;
}

}  // namespace

SolverRun run_external(const std::filesystem::path& model_file, const std::string& command_template, double time_limit,
                       const ModelArtifact& m) {
    if (command_template.find("{model}") == std::string::npos ||
        command_template.find("{solution}") == std::string::npos) {
        throw std::invalid_argument("solver command needs {model} and {solution} placeholders");
    }
    const auto start = std::chrono::steady_clock::now();
    const auto digest = sha256_file(model_file);
    auto solution = model_file;
    solution += ".sol";
    std::error_code ec;
    std::filesystem::remove(solution, ec);

    std::string cmd = substitute(command_template, "{model}", shell_quote(model_file.string()));
    cmd = substitute(cmd, "{solution}", shell_quote(solution.string()));
    cmd = substitute(cmd, "{timelimit}", std::isfinite(time_limit) ? num(time_limit) : "1e+30");
    const int raw = std::system(cmd.c_str());
    const int code = raw == -1 ? -1 : (WIFEXITED(raw) ? WEXITSTATUS(raw) : 128);

    SolverRun run;
    if (!std::filesystem::exists(solution)) {
        run.status = RunStatus::Error;
        run.message = "solver wrote no solution file (exit code " + std::to_string(code) + ")";
    } else {
        run = parse_solution(read_text(solution), m);
        if (code != 0 && run.status != RunStatus::Infeasible && run.status != RunStatus::Timeout) {
            run.status = RunStatus::Error;
            run.assignment.clear();
            run.objective.reset();
            run.message = "solver exited with code " + std::to_string(code);
        }
    }
    run.artifact_digest = digest;
    run.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

}  // namespace gemkit
