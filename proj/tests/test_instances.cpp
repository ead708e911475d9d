#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <limits>
#include <set>
#include <stdexcept>

#include "gemkit/instances.hpp"
#include "gemkit/io.hpp"

using namespace gemkit;

namespace {

const std::filesystem::path kBea = std::filesystem::path(GEMKIT_DATA_DIR) / "bea21";

IoTables bea_tables() { return read_io_tables(kBea / "use.csv", kBea / "make.csv", kBea / "tables.json"); }

std::size_t side_size(std::span<const Incidence> side) { return side.size(); }

}  // namespace

TEST_CASE("splitmix64 reference values") {
    // first outputs for seed 0 of the reference implementation
    SplitMix64 rng(0);
    CHECK(rng.next() == 0xe220a8397b1dcdafULL);
    CHECK(rng.next() == 0x6e789e6aa1b965f4ULL);
    SplitMix64 r2(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = r2.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r2.below(3) < 3);
    }
}

TEST_CASE("generated instances respect the side-size bounds") {
    for (std::size_t n : {2, 3, 8, 30}) {
        for (std::size_t d : {std::size_t{1}, std::size_t{2}, n}) {
            if (d > n) continue;
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                const auto h = generate({n, d, seed});
                REQUIRE(h.num_nodes() == n);
                REQUIRE(h.num_arcs() == n);
                CHECK(h.node(0) == "S1");
                CHECK(h.arc(n - 1).id() == "R" + std::to_string(n));
                for (const auto& a : h.arcs()) {
                    const auto s_in = side_size(a.source());
                    const auto s_out = side_size(a.target());
                    CHECK(s_in >= 1);
                    CHECK(s_in <= std::min(d, n - 1));
                    CHECK(s_out >= 1);
                    CHECK(s_out <= std::min(d, n - s_in));
                    std::set<NodeIndex> seen;
                    for (const auto& inc : a.source()) {
                        CHECK(inc.multiplicity == 1);
                        seen.insert(inc.node);
                    }
                    for (const auto& inc : a.target()) {
                        CHECK(inc.multiplicity == 1);
                        CHECK(seen.insert(inc.node).second);
                    }
                    CHECK(a.kappa() > 0.0);
                    CHECK(a.kappa() < 1.0);
                }
            }
        }
    }
}

TEST_CASE("generator is deterministic and isolated per seed") {
    const auto a = generate({12, 3, 42});
    const auto b = generate({12, 3, 42});
    CHECK(a == b);
    CHECK(dump(to_json(a)) == dump(to_json(b)));
    (void)generate({12, 3, 41});
    CHECK(generate({12, 3, 42}) == a);
    CHECK_FALSE(generate({12, 3, 43}) == a);
}

TEST_CASE("smallest generated instance") {
    const auto h = generate({2, 1, 9});
    for (const auto& a : h.arcs()) {
        CHECK(a.source().size() == 1);
        CHECK(a.target().size() == 1);
        CHECK(a.source()[0].node != a.target()[0].node);
    }
}

TEST_CASE("generator argument checks") {
    CHECK_THROWS_AS(generate({5, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(generate({5, 6, 1}), std::invalid_argument);
    CHECK_THROWS_AS(generate({1, 1, 1}), std::invalid_argument);
    const auto meta = generation_meta({10, 4, 3});
    CHECK(meta.at("n") == 10);
    CHECK(meta.at("d") == 4);
    CHECK(meta.at("seed") == 3);
}

TEST_CASE("bundled input-output fixture ingests to 21 nodes and 23 arcs") {
    const auto tables = bea_tables();
    CHECK(tables.commodity_names.size() == 23);
    CHECK(tables.industry_names.size() == 21);
    const auto ing = ingest_io(tables);
    CHECK(ing.hypergraph.num_nodes() == 21);
    CHECK(ing.hypergraph.num_arcs() == 23);
    CHECK(ing.warnings.empty());
    CHECK(ing.hypergraph.arc(21).id() == "SCRAP");
    CHECK(ing.hypergraph.arc(22).id() == "ROW");
    for (const auto& a : ing.hypergraph.arcs()) CHECK(a.kappa() == 1.0);
}

TEST_CASE("ingestion conserves above-threshold entries") {
    const auto tables = bea_tables();
    const double thr = 0.05;
    const std::set<std::string> special(tables.special_categories.begin(), tables.special_categories.end());
    const std::size_t nc = tables.commodity_names.size();
    const std::size_t ni = tables.industry_names.size();

    std::size_t expected = 0;
    std::vector<std::size_t> primary(ni);
    for (std::size_t j = 0; j < ni; ++j) {
        double use_sum = 0.0;
        double make_sum = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
            use_sum += tables.use[c][j];
            make_sum += tables.make[j][c];
        }
        double best = -1.0;
        for (std::size_t c = 0; c < nc; ++c) {
            if (special.count(tables.commodity_names[c])) continue;
            if (tables.use[c][j] / use_sum > thr) ++expected;
            if (tables.make[j][c] / make_sum > thr) ++expected;
            if (tables.make[j][c] > best) {
                best = tables.make[j][c];
                primary[j] = c;
            }
        }
    }
    for (const auto& k : tables.special_categories) {
        const auto c = static_cast<std::size_t>(
            std::find(tables.commodity_names.begin(), tables.commodity_names.end(), k) - tables.commodity_names.begin());
        std::set<std::size_t> src;
        std::set<std::size_t> dst;
        for (std::size_t j = 0; j < ni; ++j) {
            double use_sum = 0.0;
            double make_sum = 0.0;
            for (std::size_t r = 0; r < nc; ++r) {
                use_sum += tables.use[r][j];
                make_sum += tables.make[j][r];
            }
            if (tables.make[j][c] / make_sum > thr) src.insert(primary[j]);
            if (tables.use[c][j] / use_sum > thr) dst.insert(primary[j]);
        }
        expected += src.size() + dst.size();
    }

    const auto h = ingest_io(tables, thr).hypergraph;
    std::size_t incidences = 0;
    for (const auto& a : h.arcs()) incidences += a.source().size() + a.target().size();
    CHECK(incidences == expected);
}

TEST_CASE("infinite threshold drops every arc with a warning") {
    const auto ing = ingest_io(bea_tables(), std::numeric_limits<double>::infinity());
    CHECK(ing.hypergraph.num_nodes() == 21);
    CHECK(ing.hypergraph.num_arcs() == 0);
    CHECK(ing.warnings.size() == 23);
    CHECK_THROWS_AS(ingest_io(bea_tables(), -0.1), std::invalid_argument);
}

TEST_CASE("an industry using its own product becomes a self loop") {
    IoTables t;
    t.commodity_names = {"X", "Y"};
    t.industry_names = {"X", "Y"};
    t.use = {{5, 1}, {5, 0}};
    t.make = {{10, 0}, {0, 4}};
    const auto h = ingest_io(t).hypergraph;
    REQUIRE(h.num_arcs() == 2);
    const auto& x = h.arc(h.arc_index("X"));
    CHECK(x.source_multiplicity(h.node_index("X")) == 1);
    CHECK(x.source_multiplicity(h.node_index("Y")) == 1);
    CHECK(x.target_multiplicity(h.node_index("X")) == 1);
    const auto& y = h.arc(h.arc_index("Y"));
    CHECK(y.source().size() == 1);
    CHECK(y.target_multiplicity(h.node_index("Y")) == 1);
}

TEST_CASE("malformed tables are rejected") {
    IoTables t;
    t.commodity_names = {"X", "Y"};
    t.industry_names = {"X"};
    t.use = {{1}, {1}};
    t.make = {{1, 1}};
    CHECK_NOTHROW(t.validate());
    t.special_categories = {"Z"};
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t.special_categories.clear();
    t.use = {{1}, {-1}};
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t.use = {{1}};
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t.use = {{1}, {1}};
    t.commodity_names = {"X", "X"};
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("sector classification") {
    SUBCASE("R/I/F chain") {
        Hypergraph h({"R", "I", "F"}, {{"a1", {{"R", 2}}, {{"I", 1}}, 1.0},
                                        {"a2", {{"I", 1}}, {{"F", 2}}, 1.0},
                                        {"a3", {{"F", 1}}, {{"R", 1}}, 1.0}});
        auto chain = empty_chain(h, 1, 1);
        chain.active_arcs[0] = {0, 1, 2};
        chain.active_nodes[0] = {0, 1};
        chain.flows[0] = {2, 1, 5};
        const auto labels = classify_sectors(h, chain);
        CHECK(labels == std::vector<SectorLabel>{SectorLabel::SelfAmplifying, SectorLabel::SelfAmplifying,
                                                 SectorLabel::NegativeNet});
    }
    SUBCASE("food, waste and unused") {
        Hypergraph h({"A", "B", "C", "D"}, {{"x", {{"A", 1}}, {{"B", 2}}, 1.0}, {"y", {{"B", 1}}, {{"C", 1}}, 1.0}});
        auto chain = empty_chain(h, 2, 1);
        chain.active_arcs[1] = {0, 1};
        chain.active_nodes[1] = {1};
        chain.flows[1] = {1, 1};
        const auto labels = classify_sectors(h, chain);
        CHECK(labels == std::vector<SectorLabel>{SectorLabel::Food, SectorLabel::SelfAmplifying, SectorLabel::Waste,
                                                 SectorLabel::Unused});
        CHECK(to_string(labels[0]) == "FOOD");
        CHECK(to_string(labels[2]) == "WASTE");
    }
    SUBCASE("empty horizon") {
        Hypergraph h({"A"}, {});
        ChainSolution chain;
        CHECK(classify_sectors(h, chain) == std::vector<SectorLabel>{SectorLabel::Unused});
    }
}
