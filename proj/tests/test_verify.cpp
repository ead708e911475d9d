#include <cmath>
#include <limits>

#include "doctest.h"
#include "gemkit/verify.hpp"

using namespace gemkit;

namespace {

using Ids = std::vector<std::string>;

Hypergraph two_cycle(const std::string& suffix = "") {
    return Hypergraph({"A" + suffix, "B" + suffix}, {
                                                        {"r1" + suffix, {{"A" + suffix, 1}}, {{"B" + suffix, 2}}, 1.0},
                                                        {"r2" + suffix, {{"B" + suffix, 1}}, {{"A" + suffix, 2}}, 1.0},
                                                    });
}

}  // namespace

TEST_CASE("self-sufficiency on the R/I/F economy") {
    const auto h = rif_example();
    auto ss = check_self_sufficiency(h, arc_indices(h, Ids{"a1", "a2", "a3"}), node_indices(h, Ids{"R", "I"}));
    // a2 has no core output and a3 no core input when F is outside the core.
    CHECK_FALSE(ss.ok());
    CHECK_FALSE(ss.arcs_have_core_output);
    CHECK_FALSE(ss.arcs_have_core_input);
    CHECK(ss.nodes_produced);
    CHECK(ss.nodes_consumed);

    ss = check_self_sufficiency(h, arc_indices(h, Ids{"a1"}), node_indices(h, Ids{"R"}));
    CHECK_FALSE(ss.ok());
    CHECK_FALSE(ss.nodes_produced);

    CHECK(check_self_sufficiency(h, {}, {}).ok());
    CHECK(check_self_sufficiency(h, arc_indices(h, Ids{"a1", "a2", "a3"}), node_indices(h, Ids{"R", "I", "F"})).ok());
    CHECK_THROWS_AS(node_indices(h, Ids{"X"}), std::out_of_range);
}

TEST_CASE("realizability margin") {
    const auto h = rif_example();
    const auto arcs = arc_indices(h, Ids{"a1", "a2", "a3"});
    const std::vector<double> f{2, 1, 5};
    CHECK(check_realizability(h, arcs, node_indices(h, Ids{"R", "I"}), f) == 1.0);
    CHECK(check_realizability(h, arcs, node_indices(h, Ids{"R", "I", "F"}), f) == -3.0);
    CHECK(check_realizability(h, arcs, {}, f) == std::numeric_limits<double>::infinity());

    for (double c : {0.5, 2.0, 10.0}) {
        std::vector<double> g{2 * c, 1 * c, 5 * c};
        CHECK(check_realizability(h, arcs, node_indices(h, Ids{"R", "I"}), g) == doctest::Approx(c));
    }
    const std::vector<double> partial{2, 0, 5};
    CHECK_THROWS_AS(check_realizability(h, arcs, node_indices(h, Ids{"R"}), partial), std::invalid_argument);
    CHECK_THROWS_AS(check_realizability(h, arc_indices(h, Ids{"a1"}), {}, f), std::invalid_argument);
    CHECK_THROWS_AS(check_realizability(h, arcs, {}, std::vector<double>{1, 1}), std::invalid_argument);
}

TEST_CASE("flow search") {
    const auto h = rif_example();
    const std::vector<double> lo(3, 0.01), hi(3, 100.0);
    const auto arcs = arc_indices(h, Ids{"a1", "a2", "a3"});

    auto fs = exists_realizing_flow(h, arcs, node_indices(h, Ids{"R", "I"}), lo, hi, 0.5);
    REQUIRE(fs.verdict == FlowVerdict::Feasible);
    CHECK(check_realizability(h, arcs, node_indices(h, Ids{"R", "I"}), fs.flow) >= 0.5 - 1e-9);

    fs = exists_realizing_flow(h, arcs, node_indices(h, Ids{"R", "I", "F"}), lo, hi, 1e-6);
    CHECK(fs.verdict == FlowVerdict::Infeasible);

    fs = exists_realizing_flow(h, {}, {}, lo, hi, 1.0);
    CHECK(fs.verdict == FlowVerdict::Feasible);
    CHECK(fs.flow == std::vector<double>(3, 0.0));

    fs = exists_realizing_flow(h, {}, node_indices(h, Ids{"R"}), lo, hi, 1.0);
    CHECK(fs.verdict == FlowVerdict::Infeasible);

    const std::vector<double> bad{0.0, 0.01, 0.01};
    CHECK_THROWS_AS(exists_realizing_flow(h, arcs, {}, bad, hi, 1.0), std::invalid_argument);
}

TEST_CASE("synergy law evaluation") {
    const Hypergraph h({"A", "B", "C"}, {{"r", {{"A", 1}, {"B", 2}}, {{"C", 1}}, 2.0}});
    const std::vector<double> x{3.0, 0.5, 7.0};
    CHECK(synergy_rate(h.arc(0), x) == 1.5);
    const std::vector<double> zero{0.0, 0.5, 7.0};
    CHECK(synergy_rate(h.arc(0), zero) == 0.0);

    const std::vector<double> f{1.5};
    const std::vector<ArcIndex> arcs{0};
    auto sc = check_synergy(h, arcs, f, x, 0.0);
    CHECK(sc.ok);
    CHECK(sc.max_residual == 0.0);
    sc = check_synergy(h, arcs, std::vector<double>{2.0}, x, 0.1);
    CHECK_FALSE(sc.ok);
    CHECK(sc.residuals[0] == doctest::Approx(0.5));
}

TEST_CASE("seven-node instance rates follow the printed source matrix") {
    const auto h = seven_node_example();
    std::vector<double> x{2, 3, 5, 7, 11, 13, 17};
    CHECK(synergy_rate(h.arc(h.arc_index("R2")), x) == doctest::Approx(4.4 * 3 * 13));
    CHECK(synergy_rate(h.arc(h.arc_index("R4")), x) == doctest::Approx(4.0 * 5));
    const auto q = build_incidence(h).Q;
    CHECK(q(0, 2) == -1);
    CHECK(q(5, 5) == 1);
}

TEST_CASE("seven-node core is not realizable") {
    const auto h = seven_node_example();
    const auto arcs = arc_indices(h, Ids{"R2", "R3", "R4", "R5", "R6"});
    const auto core = node_indices(h, Ids{"S1", "S2", "S3", "S5", "S6"});
    CHECK(check_self_sufficiency(h, arcs, core).ok());
    const std::vector<double> lo(6, 0.01), hi(6, 100.0);
    CHECK(exists_realizing_flow(h, arcs, core, lo, hi, 1e-6).verdict == FlowVerdict::Infeasible);

    const auto v = check_synergistic_infeasibility_7node();
    CHECK(v.infeasible());
    CHECK(v.farkas_certificate);
    CHECK_FALSE(v.grid_witness);
    CHECK(v.grid_points == 1000000);
    REQUIRE(v.multipliers.size() == 5);
    const auto q = build_incidence(h).Q;
    double total = 0.0;
    for (std::size_t i = 0; i < core.size(); ++i) {
        CHECK(v.multipliers[i] >= -1e-12);
        total += v.multipliers[i];
    }
    CHECK(total == doctest::Approx(1.0));
    for (ArcIndex a : arcs) {
        double weighted = 0.0;
        for (std::size_t i = 0; i < core.size(); ++i) weighted += v.multipliers[i] * static_cast<double>(q(core[i], a));
        CHECK(weighted <= 1e-9);
    }

    // Dropping S1 leaves a realizable core, so no certificate exists.
    const auto smaller = node_indices(h, Ids{"S2", "S3", "S5", "S6"});
    CHECK(exists_realizing_flow(h, arcs, smaller, lo, hi, 1.0).verdict == FlowVerdict::Feasible);
    CHECK_FALSE(check_synergistic_infeasibility(h, arcs, smaller, 4).farkas_certificate);
}

TEST_CASE("exhaustive oracle") {
    auto cfg = ModelConfig::gem_e(1, 1);
    auto r = oracle_gem_e(rif_example(), cfg);
    CHECK(r.objective == 0.0);
    CHECK(r.schedules == 8);
    CHECK(r.chain.active_arcs[0].empty());

    const auto h = seven_node_example();
    r = oracle_gem_e(h, cfg);
    CHECK(r.objective == 5.0);
    CHECK(r.chain.active_arcs[0] == arc_indices(h, Ids{"R2", "R3", "R4", "R5", "R6"}));
    CHECK(r.chain.active_nodes[0] == node_indices(h, Ids{"S2", "S3", "S5", "S6"}));
    CHECK(certify_chain(h, cfg, r.chain).pass());

    const auto c = two_cycle();
    r = oracle_gem_e(c, ModelConfig::gem_e(2, 1));
    CHECK(r.objective == 0.0);
    r = oracle_gem_e(c, ModelConfig::gem_e(2, 2));
    CHECK(r.objective == 2.0);
    CHECK(r.chain.profile.theta == std::vector<std::int64_t>{2, 0});
    CHECK(certify_chain(c, ModelConfig::gem_e(2, 2), r.chain).pass());

    CHECK_THROWS_AS(oracle_gem_e(h, ModelConfig::gem_e(3, 1)), GuardExceeded);
}

TEST_CASE("minimal structures") {
    auto cfg = ModelConfig::gem_e(1, 1);
    CHECK(find_minimal(rif_example(), cfg).empty());

    const auto c = two_cycle();
    auto found = find_minimal(c, cfg);
    REQUIRE(found.size() == 1);
    CHECK(found[0].arcs == std::vector<ArcIndex>{0, 1});
    CHECK(found[0].core == std::vector<NodeIndex>{0, 1});

    const Hypergraph twice({"A", "B", "A2", "B2"}, {
                                                      {"r1", {{"A", 1}}, {{"B", 2}}, 1.0},
                                                      {"r2", {{"B", 1}}, {{"A", 2}}, 1.0},
                                                      {"s1", {{"A2", 1}}, {{"B2", 2}}, 1.0},
                                                      {"s2", {{"B2", 1}}, {{"A2", 2}}, 1.0},
                                                  });
    found = find_minimal(twice, cfg);
    REQUIRE(found.size() == 2);
    CHECK(found[0].arcs == std::vector<ArcIndex>{0, 1});
    CHECK(found[1].arcs == std::vector<ArcIndex>{2, 3});

    const Hypergraph chain({"A", "B", "C"}, {{"r1", {{"A", 1}}, {{"B", 1}}, 1.0}, {"r2", {{"B", 1}}, {{"C", 1}}, 1.0}});
    CHECK(find_minimal(chain, cfg).empty());
}

TEST_CASE("chain certificate catches broken chains") {
    const auto h = two_cycle();
    auto cfg = ModelConfig::gem_e(2, 2);
    auto good = oracle_gem_e(h, cfg).chain;
    REQUIRE(certify_chain(h, cfg, good).pass());

    auto bad = good;
    bad.active_arcs[1].clear();
    bad.flows[1] = {0, 0};
    bad.active_nodes[1].clear();
    auto cert = certify_chain(h, cfg, bad);
    CHECK_FALSE(cert.nesting_ok);
    CHECK_FALSE(cert.pass());

    bad = good;
    bad.flows[0] = {1.0, 1.0};
    cert = certify_chain(h, cfg, bad);
    CHECK(cert.periods[0].margin == doctest::Approx(1.0));
    CHECK(cert.pass());
    bad.flows[0] = {1.0, 0.6};
    cert = certify_chain(h, cfg, bad);
    CHECK_FALSE(cert.pass());

    bad = good;
    bad.profile.theta = {1, 1};
    CHECK_FALSE(certify_chain(h, cfg, bad).theta_ok);
}
