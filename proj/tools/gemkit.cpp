// gemkit command-line front end.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "gemkit/chain.hpp"
#include "gemkit/gem_d.hpp"
#include "gemkit/gem_e.hpp"
#include "gemkit/instances.hpp"
#include "gemkit/io.hpp"
#include "gemkit/report.hpp"
#include "gemkit/solve.hpp"
#include "gemkit/verify.hpp"

namespace fs = std::filesystem;
using namespace gemkit;

namespace {

enum Exit { kOk = 0, kUsage = 2, kInfeasible = 3, kSolverError = 4, kCertificate = 5 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Runs body(i) for i in [0, count) on up to `jobs` threads; the first
// exception is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

Json output_entry(const fs::path& path) {
    Json j;
    j["path"] = path.generic_string();
    j["sha256"] = sha256_file(path);
    return j;
}

void write_manifest(const fs::path& out, Json manifest, const std::vector<fs::path>& outputs) {
    manifest["schema_version"] = kSchemaVersion;
    Json list = Json::array();
    for (const auto& p : outputs) list.push_back(output_entry(p));
    manifest["outputs"] = list;
    write_text(fs::path(out.string() + ".manifest.json"), dump(manifest));
}

std::optional<Json> instance_meta(const fs::path& path) {
    const auto j = read_json(path);
    if (j.contains("meta")) return j.at("meta");
    return std::nullopt;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
    std::size_t n = 0;
    std::size_t d = 0;
    std::uint64_t seed = 0;
    std::size_t count = 1;
    std::string from_io;
    double threshold = 0.05;
    std::string out;
};

fs::path gen_one(const GenSpec& spec, const fs::path& out) {
    const auto h = generate(spec);
    write_instance(out, h, generation_meta(spec));
    Json m;
    m["command"] = "gen";
    m["generator"] = generation_meta(spec);
    write_manifest(out, m, {out});
    return out;
}

int cmd_gen(const GenArgs& a, unsigned jobs) {
    if (!a.from_io.empty()) {
        const fs::path dir = a.from_io;
        const auto tables = read_io_tables(dir / "use.csv", dir / "make.csv", dir / "tables.json");
        const auto ing = ingest_io(tables, a.threshold);
        for (const auto& w : ing.warnings) std::cerr << "warning: " << w << "\n";
        Json meta;
        meta["source"] = "io";
        meta["threshold"] = a.threshold;
        meta["use_sha256"] = sha256_file(dir / "use.csv");
        meta["make_sha256"] = sha256_file(dir / "make.csv");
        meta["sidecar_sha256"] = sha256_file(dir / "tables.json");
        if (!tables.labels.empty()) {
            Json labels = Json::object();
            for (const auto& [k, v] : tables.labels) labels[k] = v;
            meta["labels"] = labels;
        }
        write_instance(a.out, ing.hypergraph, meta);
        Json m;
        m["command"] = "gen";
        m["ingestion"] = meta;
        m["warnings"] = ing.warnings;
        write_manifest(a.out, m, {a.out});
        std::cout << a.out << ": " << ing.hypergraph.num_nodes() << " nodes, " << ing.hypergraph.num_arcs() << " arcs\n";
        return kOk;
    }
    if (a.d == 0) throw UsageError("--d must be at least 1");
    if (a.n < 2) throw UsageError("--n must be at least 2");
    if (a.d > a.n) throw UsageError("--d must not exceed --n");
    if (a.count == 1) {
        gen_one({a.n, a.d, a.seed}, a.out);
        std::cout << a.out << "\n";
        return kOk;
    }
    fs::create_directories(a.out);
    parallel_for(a.count, jobs, [&](std::size_t i) {
        const GenSpec spec{a.n, a.d, a.seed + i};
        gen_one(spec, fs::path(a.out) / ("n" + std::to_string(a.n) + "_d" + std::to_string(a.d) + "_s" +
                                         std::to_string(spec.seed) + ".json"));
    });
    std::cout << a.count << " instances in " << a.out << "\n";
    return kOk;
}

// ---------------------------------------------------------------- build

struct BuildArgs {
    std::string instance;
    std::string model = "gem-e";
    std::optional<int> horizon;
    std::optional<int> q;
    std::optional<double> eps;
    std::optional<int> grid_k;
    std::string config;
    std::string format = "lp";
    std::string out;
    std::vector<std::string> fix;
    bool allow_ingested = false;
};

std::map<std::string, double> parse_fixes(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--fix expects name=value, got '" + item + "'");
        try {
            std::size_t used = 0;
            const double v = std::stod(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1) throw std::invalid_argument(item);
            out[item.substr(0, eq)] = v;
        } catch (const std::logic_error&) {
            throw UsageError("--fix expects name=value, got '" + item + "'");
        }
    }
    return out;
}

Json fixes_json(const std::map<std::string, double>& fixes) {
    Json j = Json::object();
    for (const auto& [k, v] : fixes) j[k] = v;
    return j;
}

ModelArtifact rebuild(const Hypergraph& h, const ModelConfig& cfg, const std::string& kind,
                      const std::map<std::string, double>& fixes) {
    auto m = build_model(h, cfg, kind);
    if (!fixes.empty()) m.fix(fixes);
    return m;
}

std::string model_text(const ModelArtifact& m, const std::string& format) {
    return format == "mps" ? format_mps(m) : format_lp(m);
}

int cmd_build(const BuildArgs& a) {
    ModelConfig cfg = a.model == "gem-e" ? ModelConfig::gem_e(1, 1) : ModelConfig::gem_d(1, 1);
    if (!a.config.empty()) cfg = config_from_json(read_json(a.config));
    if (a.horizon) cfg.horizon = *a.horizon;
    if (a.q) cfg.q = *a.q;
    if (cfg.horizon < 1) throw UsageError("--T must be at least 1");
    if (cfg.q < 1 || cfg.q > cfg.horizon) throw UsageError("--q must lie in [1, T]");
    if (a.eps) cfg.eps = *a.eps;
    if (a.grid_k) cfg.pwl.k = *a.grid_k;
    if (a.model == "gem-d-rev") cfg.reversible = true;

    const auto meta = instance_meta(a.instance);
    if (a.model != "gem-e" && meta && meta->value("source", "") == "io" && !a.allow_ingested) {
        throw UsageError("synergistic models on ingested input-output data need --allow-ingested");
    }
    const auto h = read_instance(a.instance);
    const auto fixes = parse_fixes(a.fix);
    const auto m = rebuild(h, cfg, a.model, fixes);
    const std::string text = model_text(m, a.format);
    const fs::path out = a.out;
    write_text(out, text);

    Json vm;
    vm["schema_version"] = kSchemaVersion;
    vm["kind"] = m.kind;
    vm["requested_model"] = a.model;
    vm["format"] = a.format;
    vm["instance_sha256"] = sha256_file(a.instance);
    vm["model_sha256"] = sha256_hex(text);
    vm["config"] = to_json(cfg);
    vm["fixed"] = fixes_json(fixes);
    vm["binaries"] = m.num_binaries();
    vm["rows"] = m.constraints().size();
    Json vars = Json::array();
    for (const auto& v : m.variables()) {
        Json e;
        e["name"] = v.name;
        e["kind"] = std::string(to_string(v.kind));
        e["family"] = v.family;
        e["entity"] = v.entity;
        e["period"] = v.period;
        vars.push_back(e);
    }
    vm["variables"] = vars;
    const fs::path varmap = out.string() + ".varmap.json";
    write_text(varmap, dump(vm));

    Json man;
    man["command"] = "build";
    man["config"] = vm["config"];
    man["instance_sha256"] = vm["instance_sha256"];
    man["model_sha256"] = vm["model_sha256"];
    write_manifest(out, man, {out, varmap});
    std::cout << out.generic_string() << ": " << m.kind << ", " << m.variables().size() << " columns, "
              << m.constraints().size() << " rows, " << m.num_binaries() << " binaries\n";
    return kOk;
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
    std::string model;
    std::string varmap;
    std::string instance;
    std::string backend = "internal";
    double timelimit = 600.0;
    std::size_t guard = 24;
    std::string sos2 = "reject";
    std::string out;
};

struct Loaded {
    Hypergraph h;
    ModelConfig cfg;
    ModelArtifact artifact;
    Json varmap;
};

Loaded load_model(const SolveArgs& a) {
    const fs::path varmap_path = a.varmap.empty() ? fs::path(a.model + ".varmap.json") : fs::path(a.varmap);
    Loaded l;
    l.varmap = read_json(varmap_path);
    if (sha256_file(a.instance) != l.varmap.at("instance_sha256").get<std::string>()) {
        throw UsageError("instance does not match the digest recorded in " + varmap_path.generic_string());
    }
    const std::string text = read_text(a.model);
    if (sha256_hex(text) != l.varmap.at("model_sha256").get<std::string>()) {
        throw UsageError("model file does not match the digest recorded in " + varmap_path.generic_string());
    }
    l.h = read_instance(a.instance);
    l.cfg = config_from_json(l.varmap.at("config"));
    std::map<std::string, double> fixes;
    for (const auto& [k, v] : l.varmap.at("fixed").items()) fixes[k] = v.get<double>();
    l.artifact = rebuild(l.h, l.cfg, l.varmap.at("requested_model").get<std::string>(), fixes);
    if (sha256_hex(model_text(l.artifact, l.varmap.at("format").get<std::string>())) != sha256_hex(text)) {
        throw UsageError("rebuilding the model from its variable map gives a different file");
    }
    return l;
}

int cmd_solve(const SolveArgs& a) {
    const auto l = load_model(a);
    SolverRun run;
    if (a.backend == "external") {
        const char* cmd = std::getenv("GEMKIT_SOLVER_CMD");
        if (cmd == nullptr || *cmd == '\0') throw UsageError("the external backend needs GEMKIT_SOLVER_CMD");
        run = run_external(a.model, cmd, a.timelimit, l.artifact);
    } else {
        InternalOptions opts;
        opts.guard = a.guard;
        opts.time_limit = a.timelimit;
        opts.allow_sos2 = a.sos2 == "branch";
        const auto target = a.sos2 == "binaries" ? sos2_to_binaries(l.artifact) : l.artifact;
        try {
            run = solve_internal(target, opts);
        } catch (const GuardExceeded& e) {
            throw UsageError(std::string(e.what()) + " (raise --guard)");
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string(e.what()) + " (see --sos2)");
        }
    }

    Json sol;
    sol["schema_version"] = kSchemaVersion;
    sol["backend"] = a.backend;
    sol["status"] = std::string(to_string(run.status));
    sol["objective"] = run.objective ? Json(*run.objective) : Json(nullptr);
    sol["message"] = run.message;
    sol["kind"] = l.artifact.kind;
    sol["instance_sha256"] = l.varmap.at("instance_sha256");
    sol["model_sha256"] = l.varmap.at("model_sha256");
    sol["config"] = to_json(l.cfg);

    int code = kOk;
    std::optional<ChainCertificate> cert;
    if (run.status == RunStatus::Optimal || run.status == RunStatus::Feasible) {
        try {
            const auto chain = decode_model(l.artifact, run.assignment, l.h, l.cfg);
            cert = certify_chain(l.h, l.cfg, chain);
            sol["chain"] = to_json(l.h, chain);
            sol["certificate"] = to_json(*cert);
            if (!cert->pass()) code = kCertificate;
        } catch (const DecodeError& e) {
            sol["status"] = "ERROR";
            sol["message"] = std::string("decode failed: ") + e.what();
            code = kSolverError;
        }
        Json assignment = Json::object();
        for (const auto& v : l.artifact.variables()) {
            const auto it = run.assignment.find(v.name);
            assignment[v.name] = it == run.assignment.end() ? 0.0 : it->second;
        }
        sol["assignment"] = assignment;
    } else {
        code = run.status == RunStatus::Infeasible ? kInfeasible : kSolverError;
    }

    if (!a.out.empty()) {
        write_text(a.out, dump(sol));
        Json man;
        man["command"] = "solve";
        man["backend"] = a.backend;
        man["config"] = sol["config"];
        man["instance_sha256"] = sol["instance_sha256"];
        man["model_sha256"] = sol["model_sha256"];
        Json summary;
        summary["status"] = sol["status"];
        summary["objective"] = sol["objective"];
        summary["certified"] = cert ? Json(cert->pass()) : Json(nullptr);
        man["solver"] = summary;
        write_manifest(a.out, man, {a.out});
    }
    std::cout << "status " << sol["status"].get<std::string>();
    if (run.objective) std::cout << ", objective " << *run.objective;
    if (cert) std::cout << ", certificate " << (cert->pass() ? "ok" : "FAILED");
    std::cout << ", " << run.wall_time << " s";
    if (!run.message.empty()) std::cout << " (" << run.message << ")";
    std::cout << "\n";
    return code;
}

// ------------------------------------------------ verify / report / viz

struct SolutionArgs {
    std::string instance;
    std::string solution;
};

struct LoadedSolution {
    Hypergraph h;
    Json sol;
    ChainSolution chain;
};

LoadedSolution load_solution(const SolutionArgs& a) {
    LoadedSolution l;
    l.sol = read_json(a.solution);
    if (l.sol.contains("instance_sha256") && sha256_file(a.instance) != l.sol.at("instance_sha256").get<std::string>()) {
        throw UsageError("solution " + a.solution + " was computed for a different instance");
    }
    l.h = read_instance(a.instance);
    if (l.sol.contains("chain")) {
        l.chain = chain_from_json(l.h, l.sol.at("chain"));
    } else {
        // infeasible or failed runs report an all-inactive chain
        const auto cfg = l.sol.contains("config") ? config_from_json(l.sol.at("config")) : ModelConfig::gem_e(1, 1);
        l.chain = empty_chain(l.h, cfg.horizon, cfg.q);
    }
    return l;
}

int cmd_verify(const SolutionArgs& a) {
    const auto l = load_solution(a);
    if (!l.sol.contains("chain")) throw UsageError("solution carries no chain to verify");
    const auto cfg = config_from_json(l.sol.at("config"));
    const auto cert = certify_chain(l.h, cfg, l.chain);
    std::cout << dump(to_json(cert));
    return cert.pass() ? kOk : kCertificate;
}

int cmd_report(const SolutionArgs& a, const std::string& format, const std::string& out) {
    const auto l = load_solution(a);
    const auto report = make_report(l.h, l.chain);
    std::string text;
    if (format == "json") {
        auto j = to_json(l.h, report);
        j["solution_sha256"] = sha256_file(a.solution);
        text = dump(j);
    } else {
        text = format_report(l.h, report);
    }
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
        Json man;
        man["command"] = "report";
        man["instance_sha256"] = sha256_file(a.instance);
        man["solution_sha256"] = sha256_file(a.solution);
        write_manifest(out, man, {out});
    }
    return kOk;
}

int cmd_viz(const SolutionArgs& a, std::optional<int> period, const std::string& format, const std::string& out) {
    const auto l = load_solution(a);
    std::vector<int> periods;
    if (period) {
        if (*period < 1 || *period > l.chain.horizon()) {
            throw UsageError("--period must lie in 1.." + std::to_string(l.chain.horizon()));
        }
        periods.push_back(*period);
    } else {
        for (int t = 1; t <= l.chain.horizon(); ++t) periods.push_back(t);
    }
    std::vector<fs::path> written;
    for (int t : periods) {
        const std::string body = format == "svg" ? render_svg(l.h, l.chain, t) : render_dot(l.h, l.chain, t);
        const fs::path path = period ? fs::path(out) : fs::path(out + "_p" + std::to_string(t) + "." + format);
        write_text(path, body);
        written.push_back(path);
        std::cout << path.generic_string() << "\n";
    }
    Json man;
    man["command"] = "viz";
    man["instance_sha256"] = sha256_file(a.instance);
    man["solution_sha256"] = sha256_file(a.solution);
    write_manifest(out, man, written);
    return kOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
    std::size_t n = 20;
    std::size_t d = 3;
    int horizon = 2;
    int q = 1;
    std::uint64_t seed = 1;
    std::size_t seeds = 1;
    bool solve = false;
    std::size_t guard = 24;
    double timelimit = 60.0;
};

int cmd_bench(const BenchArgs& a, unsigned jobs) {
    if (a.d == 0 || a.d > a.n || a.n < 2) throw UsageError("bench needs n >= 2 and 1 <= d <= n");
    if (a.q < 1 || a.q > a.horizon) throw UsageError("--q must lie in [1, T]");
    std::vector<Json> rows(a.seeds);
    std::vector<int> failed(a.seeds, 0);
    parallel_for(a.seeds, jobs, [&](std::size_t i) {
        const GenSpec spec{a.n, a.d, a.seed + i};
        const auto cfg = ModelConfig::gem_e(a.horizon, a.q);
        const auto t0 = std::chrono::steady_clock::now();
        const auto h = generate(spec);
        const auto m = build_gem_e(h, cfg);
        const double build_s = seconds_since(t0);
        const auto t1 = std::chrono::steady_clock::now();
        const std::string lp = format_lp(m);
        const double emit_s = seconds_since(t1);

        const auto c = gem_e_counts(h.num_nodes(), h.num_arcs(), a.horizon, a.q);
        const bool counts_ok = counts_match(m, c);
        Json r;
        r["seed"] = spec.seed;
        r["columns"] = m.variables().size();
        r["rows"] = m.constraints().size();
        r["counts_ok"] = counts_ok;
        r["lp_sha256"] = sha256_hex(lp);
        r["build_s"] = build_s;
        r["emit_s"] = emit_s;
        bool ok = counts_ok;
        if (a.solve) {
            InternalOptions opts;
            opts.guard = a.guard;
            opts.time_limit = a.timelimit;
            const auto run = solve_internal(m, opts);
            r["status"] = std::string(to_string(run.status));
            r["objective"] = run.objective ? Json(*run.objective) : Json(nullptr);
            r["solve_s"] = run.wall_time;
            if (h.num_arcs() * static_cast<std::size_t>(a.horizon) <= 16) {
                const auto oracle = oracle_gem_e(h, cfg);
                r["oracle"] = oracle.objective;
                ok = ok && run.objective && *run.objective == oracle.objective;
            }
        }
        failed[i] = ok ? 0 : 1;
        rows[i] = r;
    });
    for (const auto& r : rows) std::cout << r.dump() << "\n";
    const auto bad = std::count(failed.begin(), failed.end(), 1);
    std::cout << "{\"schema_version\":" << kSchemaVersion << ",\"instances\":" << a.seeds << ",\"failures\":" << bad
              << "}\n";
    return bad == 0 ? kOk : kCertificate;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gemkit: self-amplifying structures in directed hypergraphs"};
    app.require_subcommand(1);
    unsigned jobs = 1;
    app.add_option("--jobs,-j", jobs, "worker threads for batch gen/bench")->check(CLI::Range(1u, 256u));

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "generate a random instance or ingest input-output tables");
    g->add_option("--n", gen.n, "number of nodes and arcs");
    g->add_option("--d", gen.d, "bound on the side sizes");
    g->add_option("--seed", gen.seed, "seed (first seed with --count)");
    g->add_option("--count", gen.count, "number of consecutive seeds; --out is then a directory")
        ->check(CLI::PositiveNumber);
    g->add_option("--from-io", gen.from_io, "directory with use.csv, make.csv and tables.json");
    g->add_option("--threshold", gen.threshold, "share threshold for ingestion")->check(CLI::NonNegativeNumber);
    g->add_option("--out,-o", gen.out, "output path")->required();

    BuildArgs build;
    auto* b = app.add_subcommand("build", "build and emit a model");
    b->add_option("--instance,-i", build.instance)->required()->check(CLI::ExistingFile);
    b->add_option("--model,-m", build.model)->check(CLI::IsMember({"gem-e", "gem-d", "gem-d-rev"}));
    b->add_option("--T", build.horizon, "horizon");
    b->add_option("--q", build.q, "ordered sum over the q smallest growth entries");
    b->add_option("--eps", build.eps, "realizability margin / state threshold");
    b->add_option("--grid-k", build.grid_k, "breakpoints per piecewise-linear grid");
    b->add_option("--config", build.config, "model configuration JSON")->check(CLI::ExistingFile);
    b->add_option("--format", build.format)->check(CLI::IsMember({"lp", "mps"}));
    b->add_option("--fix", build.fix, "pin a variable, name=value (repeatable)");
    b->add_flag("--allow-ingested", build.allow_ingested, "allow synergistic models on ingested tables");
    b->add_option("--out,-o", build.out)->required();

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "solve an emitted model and decode the chain");
    s->add_option("--model,-m", solve.model)->required()->check(CLI::ExistingFile);
    s->add_option("--varmap", solve.varmap, "variable map (default <model>.varmap.json)");
    s->add_option("--instance,-i", solve.instance)->required()->check(CLI::ExistingFile);
    s->add_option("--backend", solve.backend)->check(CLI::IsMember({"internal", "external"}));
    s->add_option("--timelimit", solve.timelimit)->check(CLI::PositiveNumber);
    s->add_option("--guard", solve.guard, "largest binary count the internal solver accepts");
    s->add_option("--sos2", solve.sos2, "internal handling of SOS2 groups")
        ->check(CLI::IsMember({"reject", "branch", "binaries"}));
    s->add_option("--out,-o", solve.out, "solution JSON");

    SolutionArgs verify_args;
    auto* v = app.add_subcommand("verify", "re-certify a solved chain");
    v->add_option("--instance,-i", verify_args.instance)->required()->check(CLI::ExistingFile);
    v->add_option("--solution,-s", verify_args.solution)->required()->check(CLI::ExistingFile);

    SolutionArgs report_args;
    std::string report_format = "text";
    std::string report_out;
    auto* r = app.add_subcommand("report", "growth vector and sector classification");
    r->add_option("--instance,-i", report_args.instance)->required()->check(CLI::ExistingFile);
    r->add_option("--solution,-s", report_args.solution)->required()->check(CLI::ExistingFile);
    r->add_option("--format", report_format)->check(CLI::IsMember({"text", "json"}));
    r->add_option("--out,-o", report_out);

    SolutionArgs viz_args;
    std::optional<int> viz_period;
    std::string viz_format = "dot";
    std::string viz_out;
    auto* z = app.add_subcommand("viz", "tripartite figure of one period (all periods without --period)");
    z->add_option("--instance,-i", viz_args.instance)->required()->check(CLI::ExistingFile);
    z->add_option("--solution,-s", viz_args.solution)->required()->check(CLI::ExistingFile);
    z->add_option("--period,-t", viz_period);
    z->add_option("--format", viz_format)->check(CLI::IsMember({"dot", "svg"}));
    z->add_option("--out,-o", viz_out, "file, or prefix when every period is drawn")->required();

    BenchArgs bench;
    auto* k = app.add_subcommand("bench", "build/emit (and optionally solve) generated instances");
    k->add_option("--n", bench.n);
    k->add_option("--d", bench.d);
    k->add_option("--T", bench.horizon);
    k->add_option("--q", bench.q);
    k->add_option("--seed", bench.seed);
    k->add_option("--seeds", bench.seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
    k->add_flag("--solve", bench.solve, "also solve with the internal solver (and the oracle when small)");
    k->add_option("--guard", bench.guard);
    k->add_option("--timelimit", bench.timelimit)->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*g) return cmd_gen(gen, jobs);
        if (*b) return cmd_build(build);
        if (*s) return cmd_solve(solve);
        if (*v) return cmd_verify(verify_args);
        if (*r) return cmd_report(report_args, report_format, report_out);
        if (*z) return cmd_viz(viz_args, viz_period, viz_format, viz_out);
        if (*k) return cmd_bench(bench, jobs);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolverError;
    }
    return kUsage;
}
