#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gemkit/chain.hpp"
#include "gemkit/gem_d.hpp"
#include "gemkit/gem_e.hpp"
#include "gemkit/io.hpp"
#include "gemkit/solve.hpp"
#include "gemkit/verify.hpp"

using namespace gemkit;

namespace {

Hypergraph two_cycle(double kappa = 1.0) {
    return Hypergraph({"A", "B"}, {
                                      {"r1", {{"A", 1}}, {{"B", 2}}, kappa},
                                      {"r2", {{"B", 1}}, {{"A", 2}}, kappa},
                                  });
}

// A <-> B as a reversible pair plus B -> 2A.
Hypergraph reversible_pair() {
    return Hypergraph({"A", "B"}, {
                                      {"fwd", {{"A", 1}}, {{"B", 1}}, 1.0},
                                      {"rev", {{"B", 1}}, {{"A", 1}}, 1.0},
                                      {"g", {{"B", 1}}, {{"A", 2}}, 1.0},
                                  });
}

InternalOptions sos_options() {
    InternalOptions o;
    o.allow_sos2 = true;
    o.guard = 64;
    return o;
}

}  // namespace

TEST_CASE("GEM-E row families match the closed form") {
    const auto h = seven_node_example();
    for (int T : {1, 2, 3}) {
        for (int q = 1; q <= T; ++q) {
            const auto m = build_gem_e(h, ModelConfig::gem_e(T, q));
            const auto c = gem_e_counts(h.num_nodes(), h.num_arcs(), T, q);
            CHECK(m.count_tag("ctr:3") == c.nodes_mono);
            CHECK(m.count_tag("ctr:4") == c.arcs_mono);
            CHECK(m.count_tag("ctr:5a") + m.count_tag("ctr:5b") == c.node_support);
            CHECK(m.count_tag("ctr:6a") + m.count_tag("ctr:6b") == c.arc_support);
            CHECK(m.count_tag("ctr:7") == c.realizability);
            CHECK(m.count_tag("ctr:8a") == c.flow_activation);
            CHECK(m.count_tag("link:theta") == c.theta_link);
            CHECK(m.count_tag("owa") == c.owa);
            CHECK(m.num_binaries() == (h.num_nodes() + h.num_arcs()) * static_cast<std::size_t>(T));
        }
    }
}

TEST_CASE("GEM-E solves agree with the oracle") {
    struct Case {
        Hypergraph h;
        int T, q;
        double expect;
    };
    const std::vector<Case> cases{
        {rif_example(), 1, 1, 0.0},
        {seven_node_example(), 1, 1, 5.0},
        {two_cycle(), 2, 1, 0.0},
        {two_cycle(), 2, 2, 2.0},
    };
    for (const auto& c : cases) {
        const auto cfg = ModelConfig::gem_e(c.T, c.q);
        const auto m = build_gem_e(c.h, cfg);
        const auto run = solve_internal(m);
        REQUIRE(run.status == RunStatus::Optimal);
        CHECK(*run.objective == doctest::Approx(c.expect).epsilon(1e-9));
        CHECK(*run.objective == doctest::Approx(oracle_gem_e(c.h, cfg).objective));
        CHECK(max_violation(m, run.assignment) <= 1e-6);
        const auto chain = decode_gem_e(m, run.assignment, c.h, cfg);
        CHECK(certify_chain(c.h, cfg, chain).pass());
    }
}

TEST_CASE("seven-node GEM-E activates R2..R6") {
    const auto h = seven_node_example();
    const auto cfg = ModelConfig::gem_e(1, 1);
    const auto m = build_gem_e(h, cfg);
    const auto run = solve_internal(m);
    const auto chain = decode_gem_e(m, run.assignment, h, cfg);
    std::vector<std::string> arcs;
    for (auto a : chain.active_arcs[0]) arcs.push_back(h.arc(a).id());
    CHECK(arcs == std::vector<std::string>{"R2", "R3", "R4", "R5", "R6"});
}

TEST_CASE("decode rejects fractional binaries and a wrong theta") {
    const auto h = two_cycle();
    const auto cfg = ModelConfig::gem_e(2, 2);
    const auto m = build_gem_e(h, cfg);
    auto run = solve_internal(m);
    auto a = run.assignment;
    a["z_r1_1"] = 0.5;
    CHECK_THROWS_AS(decode_gem_e(m, a, h, cfg), DecodeError);
    a = run.assignment;
    a["theta_1"] += 1.0;
    CHECK_THROWS_AS(decode_gem_e(m, a, h, cfg), DecodeError);
    a = run.assignment;
    a.erase("y_A_2");
    CHECK_THROWS_AS(decode_gem_e(m, a, h, cfg), DecodeError);
}

TEST_CASE("solver guard and SOS2 gating") {
    const auto h = seven_node_example();
    const auto m = build_gem_e(h, ModelConfig::gem_e(2, 1));
    InternalOptions o;
    o.guard = 10;
    CHECK_THROWS_AS(solve_internal(m, o), GuardExceeded);
    const auto d = build_gem_d(two_cycle(), ModelConfig::gem_d(1, 1));
    CHECK_THROWS_AS(solve_internal(d, InternalOptions{.guard = 64}), std::invalid_argument);
}

TEST_CASE("GEM-D on the unit two-cycle") {
    const auto h = two_cycle();
    const auto cfg = ModelConfig::gem_d(1, 1);
    const auto m = build_gem_d(h, cfg);
    CHECK(m.kind == "gem-d");
    CHECK(m.count_tag("ctr:9") == h.num_nodes());
    CHECK(!m.sos2_groups().empty());
    const auto run = solve_internal(m, sos_options());
    REQUIRE(run.status == RunStatus::Optimal);
    CHECK(*run.objective == doctest::Approx(2.0));
    const auto chain = decode_gem_d(m, run.assignment, h, cfg);
    CHECK(chain.has_states());
    const auto cert = certify_chain(h, cfg, chain);
    CHECK(cert.pass());
    CHECK(cert.synergy_max_residual().has_value());
}

TEST_CASE("GEM-D decode rejects states contradicting their flags") {
    const auto h = two_cycle();
    const auto cfg = ModelConfig::gem_d(1, 1);
    const auto m = build_gem_d(h, cfg);
    auto a = solve_internal(m, sos_options()).assignment;
    a["rho_A_1"] = 0.0;
    CHECK_THROWS_AS(decode_gem_d(m, a, h, cfg), DecodeError);
}

TEST_CASE("log big-M covers the grid ends") {
    const auto x = make_geometric_grid(0.01, 100, 15);
    const auto f = make_geometric_grid(0.01, 100, 15);
    CHECK(log_big_m(2.0, 2, x, f) == doctest::Approx(std::log(2.0) + 2 * std::log(100.0) + std::log(100.0) + 1));
}

TEST_CASE("reversible GEM-D") {
    const auto h = reversible_pair();
    const auto cfg = ModelConfig::gem_d(1, 1);
    const auto m = build_gem_d_reversible(h, cfg);
    CHECK(m.kind == "gem-d-rev");
    CHECK(!m.find("z_rev_1"));
    CHECK(m.find("frev_fwd_1"));
    CHECK(m.count_tag("appB:realizability") == h.num_nodes());
    const auto plain = build_gem_d_reversible(two_cycle(), cfg);
    CHECK(plain.kind == "gem-d");
    const auto run = solve_internal(m, sos_options());
    REQUIRE(run.status == RunStatus::Optimal);
    CHECK(*run.objective == doctest::Approx(2.0));
    const auto chain = decode_model(m, run.assignment, h, cfg);
    CHECK(certify_chain(h, cfg, chain).pass());
    CHECK_THROWS_AS(build_model(h, cfg, "gem-x"), std::invalid_argument);
}

TEST_CASE("LP and MPS round trips") {
    const auto h = seven_node_example();
    const auto m = build_gem_d(h, ModelConfig::gem_d(1, 1));
    const auto lp = format_lp(m);
    const auto back = parse_lp(lp);
    CHECK(back.variables().size() == m.variables().size());
    CHECK(back.constraints().size() == m.constraints().size());
    CHECK(back.sos2_groups().size() == m.sos2_groups().size());
    CHECK(back.num_binaries() == m.num_binaries());
    for (std::size_t j = 0; j < m.variables().size(); ++j) {
        const auto& v = m.variables()[j];
        const auto& w = back.variable(v.name);
        CHECK(w.lower == v.lower);
        CHECK(w.upper == v.upper);
    }
    for (const auto& line : {std::string_view(lp)}) {
        std::size_t start = 0;
        while (start < line.size()) {
            auto end = line.find('\n', start);
            CHECK(end - start <= 255);
            start = end + 1;
        }
    }
    // MPS lists variables column by column, so compare by name.
    const auto mps = parse_mps(format_mps(m));
    REQUIRE(mps.variables().size() == m.variables().size());
    CHECK(mps.constraints().size() == m.constraints().size());
    CHECK(mps.num_binaries() == m.num_binaries());
    for (const auto& v : m.variables()) {
        const auto& w = mps.variable(v.name);
        CHECK(w.lower == v.lower);
        CHECK(w.upper == v.upper);
        CHECK((w.kind == VarKind::Binary) == (v.kind == VarKind::Binary));
    }
    for (std::size_t i = 0; i < m.constraints().size(); ++i) {
        const auto& c = m.constraints()[i];
        const auto& d = mps.constraints()[i];
        CHECK(c.name == d.name);
        CHECK(c.sense == d.sense);
        CHECK(c.rhs == d.rhs);
        CHECK(c.terms.size() == d.terms.size());
    }

    Variable bad{"1bad", VarKind::Continuous, 0, 1, "", "", 0};
    ModelArtifact broken;
    broken.add_variable(bad);
    CHECK_THROWS_AS(format_lp(broken), std::invalid_argument);
}

TEST_CASE("parsed model solves to the same optimum") {
    const auto h = seven_node_example();
    const auto cfg = ModelConfig::gem_e(1, 1);
    const auto m = build_gem_e(h, cfg);
    auto back = parse_lp(format_lp(m));
    InternalOptions o;
    o.integral_objective = true;
    CHECK(*solve_internal(back, o).objective == doctest::Approx(5.0));
}

TEST_CASE("incremental SOS2 rewrite") {
    const auto h = two_cycle();
    const auto cfg = ModelConfig::gem_d(1, 1);
    const auto m = build_gem_d(h, cfg);
    const auto b = sos2_to_binaries(m);
    CHECK(b.sos2_groups().empty());
    std::size_t extra = 0;
    for (const auto& g : m.sos2_groups()) extra += g.vars.size() - 2;
    CHECK(b.num_binaries() == m.num_binaries() + extra);
    CHECK(b.count_tag("sos2:incremental") == 2 * extra);

    // lambda = (0, .5, .5, 0) fits, (.5, 0, .5, 0) does not.
    ModelArtifact s;
    std::vector<std::size_t> l;
    for (int k = 1; k <= 4; ++k) l.push_back(s.add_variable({"l" + std::to_string(k), VarKind::Sos2Weight, 0, 1, "", "", k}));
    s.add_sos2("g", l, {1, 2, 3, 4});
    s.add_constraint("sum", {{l[0], 1}, {l[1], 1}, {l[2], 1}, {l[3], 1}}, Sense::Equal, 1);
    s.add_constraint("pin0", {{l[0], 1}}, Sense::Equal, 0.5);
    s.add_constraint("pin2", {{l[2], 1}}, Sense::Equal, 0.5);
    s.set_objective({{l[0], 1}});
    CHECK(solve_internal(sos2_to_binaries(s)).status == RunStatus::Infeasible);
    CHECK(solve_internal(s, sos_options()).status == RunStatus::Infeasible);
}

TEST_CASE("solution files") {
    const auto m = build_gem_e(two_cycle(), ModelConfig::gem_e(1, 1));
    CHECK(parse_solution("# status INFEASIBLE\n", m).status == RunStatus::Infeasible);
    CHECK(parse_solution("", m).status == RunStatus::Error);
    auto r = parse_solution("y_A_1 1\nnot_a_var 2\n", m);
    CHECK(r.status == RunStatus::Error);
    CHECK(r.message.find("line 2") != std::string::npos);
    r = parse_solution("y_A_1 1 2\n", m);
    CHECK(r.status == RunStatus::Error);
    r = parse_solution("# status TIMEOUT\ny_A_1 1\n", m);
    CHECK(r.status == RunStatus::Timeout);
    CHECK(r.assignment.at("y_B_1") == 0.0);
    r = parse_solution("u_1 3\n# objective 3\n", m);
    CHECK(r.status == RunStatus::Optimal);
    r = parse_solution("u_1 3\n# objective 4\n", m);
    CHECK(r.status == RunStatus::Error);
    CHECK(to_string(RunStatus::Feasible) == "FEASIBLE");
}

#ifdef GEMKIT_MOCK_SOLVER
TEST_CASE("external solver bridge") {
    const auto dir = std::filesystem::temp_directory_path() / "gemkit_external_test";
    std::filesystem::create_directories(dir);
    const auto h = seven_node_example();
    const auto m = build_gem_e(h, ModelConfig::gem_e(1, 1));
    const auto model = dir / "m.lp";
    emit_lp(m, model);
    const std::string mock = GEMKIT_MOCK_SOLVER;

    auto run = run_external(model, mock + " {model} {solution}", 60, m);
    CHECK(run.status == RunStatus::Optimal);
    CHECK(*run.objective == doctest::Approx(5.0));
    CHECK(run.artifact_digest == sha256_hex(format_lp(m)));

    run = run_external(model, mock + " --mode infeasible {model} {solution}", 60, m);
    CHECK(run.status == RunStatus::Infeasible);
    run = run_external(model, mock + " --mode timeout {model} {solution}", 60, m);
    CHECK(run.status == RunStatus::Timeout);
    run = run_external(model, mock + " --mode garbage {model} {solution}", 60, m);
    CHECK(run.status == RunStatus::Error);
    run = run_external(model, mock + " --mode none {model} {solution}", 60, m);
    CHECK(run.status == RunStatus::Error);
    run = run_external(model, mock + " --mode crash {model} {solution}", 60, m);
    CHECK(run.status == RunStatus::Error);
    CHECK_THROWS_AS(run_external(model, mock + " {model}", 60, m), std::invalid_argument);
    std::filesystem::remove_all(dir);
}
#endif
