#include <doctest.h>

#include <stdexcept>

#include "gemkit/hypergraph.hpp"

using namespace gemkit;

namespace {

Hypergraph toy() {
    return Hypergraph({"R", "I", "F"}, {{"a1", {{"R", 2}}, {{"I", 1}}, 1.0},
                                        {"a2", {{"I", 1}}, {{"F", 2}}, 1.0},
                                        {"a3", {{"F", 1}}, {{"R", 1}}, 1.0}});
}

std::vector<std::vector<std::int64_t>> dense(const IntMatrix& m) {
    std::vector<std::vector<std::int64_t>> out(m.rows(), std::vector<std::int64_t>(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
    return out;
}

}  // namespace

TEST_CASE("incidence matrices of the R/I/F economy") {
    auto view = build_incidence(toy());
    using M = std::vector<std::vector<std::int64_t>>;
    CHECK(dense(view.S) == M{{2, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    CHECK(dense(view.T) == M{{0, 0, 1}, {1, 0, 0}, {0, 2, 0}});
    CHECK(dense(view.Q) == M{{-2, 0, 1}, {1, -1, 0}, {0, 2, -1}});
}

TEST_CASE("self loop cancels in Q") {
    Hypergraph h({"A"}, {{"x", {{"A", 1}}, {{"A", 1}}, 1.0}});
    auto view = build_incidence(h);
    CHECK(view.S(0, 0) == 1);
    CHECK(view.T(0, 0) == 1);
    CHECK(view.Q(0, 0) == 0);
}

TEST_CASE("net balance") {
    auto h = toy();
    std::vector<double> f{1, 3, 2};
    CHECK(net_balance(h, f) == std::vector<double>{0, -2, 4});
    std::vector<double> g{2, 1, 5};
    CHECK(net_balance(h, g) == std::vector<double>{1, 1, -3});
    std::vector<double> zero(3, 0.0);
    CHECK(net_balance(h, zero) == std::vector<double>(3, 0.0));
    std::vector<double> short_flow{1.0};
    CHECK_THROWS_AS(net_balance(h, short_flow), std::invalid_argument);
}

TEST_CASE("restriction keeps fully contained arcs") {
    auto h = toy();
    std::vector<std::string> ri{"R", "I"};
    auto r = restrict_to(h, ri);
    REQUIRE(r.num_arcs() == 1);
    CHECK(r.arc(0).id() == "a1");
    CHECK(restrict_to(r, ri) == r);
    CHECK(restrict_to(h, h.nodes()) == h);
    CHECK(restrict_to(h, std::vector<std::string>{}).num_arcs() == 0);
    CHECK_THROWS_AS(restrict_to(h, std::vector<std::string>{"Z"}), std::out_of_range);
}

TEST_CASE("construction validation") {
    CHECK_THROWS_AS(Hypergraph({"A", "A"}, {}), std::invalid_argument);
    CHECK_THROWS_AS(Hypergraph({"A"}, {{"x", {}, {{"A", 1}}, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Hypergraph({"A"}, {{"x", {{"B", 1}}, {{"A", 1}}, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Hypergraph({"A"}, {{"x", {{"A", 0}}, {{"A", 1}}, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Hypergraph({"A"}, {{"x", {{"A", 1}}, {{"A", 1}}, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Hypergraph({"A"}, {{"x", {{"A", 1}}, {{"A", 1}}, 1.0}, {"x", {{"A", 1}}, {{"A", 1}}, 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(Hypergraph({"A"}, {{"x", {{"A", kMaxMultiplicity}, {"A", 1}}, {{"A", 1}}, 1.0}}),
                    std::invalid_argument);
}

TEST_CASE("reversible pairing") {
    Hypergraph ab({"A", "B"}, {{"fwd", {{"A", 1}}, {{"B", 1}}, 1.0}, {"bwd", {{"B", 1}}, {{"A", 1}}, 1.0}});
    auto p = detect_reversible(ab);
    REQUIRE(p.pairs.size() == 1);
    // "bwd" < "fwd" lexicographically, so arc 1 is the forward member
    CHECK(p.pairs[0] == std::pair<ArcIndex, ArcIndex>{1, 0});
    CHECK(p.roles[1] == ArcRole::Forward);
    CHECK(p.roles[0] == ArcRole::Reverse);
    CHECK(p.partner[0] == 1);
    CHECK(p.partner[1] == 0);

    CHECK(detect_reversible(toy()).empty());

    Hypergraph mult({"A", "B"}, {{"x", {{"A", 2}}, {{"B", 1}}, 1.0}, {"y", {{"B", 1}}, {{"A", 1}}, 1.0}});
    CHECK(detect_reversible(mult).empty());

    Hypergraph dup({"A", "B"}, {{"p", {{"A", 1}}, {{"B", 1}}, 1.0},
                                {"q", {{"A", 1}}, {{"B", 1}}, 1.0},
                                {"r", {{"B", 1}}, {{"A", 1}}, 1.0}});
    auto pd = detect_reversible(dup);
    REQUIRE(pd.pairs.size() == 1);
    CHECK(pd.pairs[0] == std::pair<ArcIndex, ArcIndex>{0, 2});
    CHECK(pd.roles[1] == ArcRole::Irreversible);
}

TEST_CASE("reversible pairing is stable under arc reordering") {
    Hypergraph h1({"A", "B", "C"}, {{"a", {{"A", 1}}, {{"B", 1}, {"C", 1}}, 1.0},
                                    {"b", {{"C", 1}}, {{"A", 1}}, 1.0},
                                    {"c", {{"B", 1}, {"C", 1}}, {{"A", 1}}, 1.0}});
    Hypergraph h2({"A", "B", "C"}, {{"c", {{"B", 1}, {"C", 1}}, {{"A", 1}}, 1.0},
                                    {"b", {{"C", 1}}, {{"A", 1}}, 1.0},
                                    {"a", {{"A", 1}}, {{"B", 1}, {"C", 1}}, 1.0}});
    auto p1 = detect_reversible(h1);
    auto p2 = detect_reversible(h2);
    REQUIRE(p1.pairs.size() == 1);
    REQUIRE(p2.pairs.size() == 1);
    CHECK(h1.arc(p1.pairs[0].first).id() == "a");
    CHECK(h2.arc(p2.pairs[0].first).id() == "a");
    CHECK(h1.arc(p1.pairs[0].second).id() == "c");
    CHECK(h2.arc(p2.pairs[0].second).id() == "c");
}
