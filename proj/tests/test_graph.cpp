#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cds/error.hpp"
#include "cds/graph.hpp"
#include "cds/graph_io.hpp"
#include "generators.hpp"

using namespace cds;
using cds::testing::Rng;

namespace {

// Unmemoized weight recursion written directly against the dense matrix.
double reference_weight(const Eigen::MatrixXd& a, const std::vector<int>& s, int i) {
    if (s.size() == 1) return 1.0;
    std::vector<int> rest;
    for (int v : s)
        if (v != i) rest.push_back(v);
    double total = 0.0;
    for (int j : rest) {
        double mean = 0.0;
        for (int k : rest) mean += a(j, k);
        mean /= static_cast<double>(rest.size());
        total += (a(j, i) - mean) * reference_weight(a, rest, j);
    }
    return total;
}

bool brute_force_is_maximal_clique(const AffinityMatrix& a, std::uint64_t mask) {
    const VertexSet s = VertexSet::from_mask(mask);
    if (s.empty() || !is_clique(a, s)) return false;
    for (int v = 0; v < a.size(); ++v)
        if (!s.contains(v) && is_clique(a, s.with(v))) return false;
    return true;
}

} // namespace

TEST_CASE("VertexSet sorts and rejects duplicates") {
    const VertexSet s(std::vector<Vertex>{3, 1, 2});
    CHECK(s.members() == std::vector<Vertex>{1, 2, 3});
    CHECK_THROWS_AS(VertexSet(std::vector<Vertex>{1, 1}), InvalidArgument);
    CHECK_THROWS_AS(VertexSet(std::vector<Vertex>{-1}), InvalidArgument);
    CHECK_THROWS_AS(s.check_bounds(3), InvalidArgument);
    CHECK(VertexSet::from_mask(s.mask()) == s);
    CHECK(set_union(VertexSet{1, 2}, VertexSet{2, 5}) == VertexSet{1, 2, 5});
    CHECK(set_difference(VertexSet{1, 2, 5}, VertexSet{2}) == VertexSet{1, 5});
    CHECK(set_intersection(VertexSet{1, 2, 5}, VertexSet{2, 5, 7}) == VertexSet{2, 5});
}

TEST_CASE("AffinityMatrix validation") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
    m(0, 1) = 0.5;
    CHECK_THROWS_AS(AffinityMatrix::from_dense(m), InvalidArgument);
    m(1, 0) = 0.5;
    CHECK_NOTHROW(AffinityMatrix::from_dense(m));
    m(2, 2) = 1.0;
    CHECK_THROWS_AS(AffinityMatrix::from_dense(m), InvalidArgument);
    m(2, 2) = 0.0;
    m(0, 2) = m(2, 0) = -0.1;
    CHECK_THROWS_AS(AffinityMatrix::from_dense(m), InvalidArgument);
}

TEST_CASE("relative similarity examples") {
    AffinityMatrix a(3);
    a.set_edge(0, 1, 0.5);
    CHECK(relative_similarity(a, VertexSet{0}, 0, 1) == 0.5);

    a.set_edge(0, 1, 0.6);
    a.set_edge(0, 2, 0.8);
    CHECK(relative_similarity(a, VertexSet{0, 1}, 0, 2) == doctest::Approx(0.5).epsilon(1e-15));

    // a_ij equal to the mean over S gives zero.
    AffinityMatrix b(3);
    b.set_edge(0, 1, 0.4);
    b.set_edge(0, 2, 0.2);
    CHECK(relative_similarity(b, VertexSet{0, 1}, 0, 2) == doctest::Approx(0.0));

    CHECK_THROWS_AS(relative_similarity(a, VertexSet{0, 1}, 2, 1), InvalidArgument);
    CHECK_THROWS_AS(relative_similarity(a, VertexSet{0, 1}, 0, 1), InvalidArgument);
}

TEST_CASE("relative similarity is affine in the target weight") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        AffinityMatrix a = cds::testing::random_weighted(rng, 7, 0.6);
        const VertexSet s{0, 1, 2};
        const int j = cds::testing::uniform_int(rng, 3, 6);
        const double before = relative_similarity(a, s, 1, j);
        const double delta = 0.25;
        a.set_edge(1, j, a(1, j) + delta);
        CHECK(relative_similarity(a, s, 1, j) - before == doctest::Approx(delta).epsilon(1e-12));
    }
}

TEST_CASE("vertex and total weight examples") {
    AffinityMatrix a(4);
    a.set_edge(0, 1, 0.7);
    a.set_edge(1, 2, 0.3);
    CHECK(vertex_weight(a, VertexSet{2}, 2) == 1.0);
    CHECK(total_weight(a, VertexSet{3}) == 1.0);
    // Two-element sets unroll to the joining weight.
    CHECK(vertex_weight(a, VertexSet{0, 1}, 0) == doctest::Approx(0.7));
    CHECK(vertex_weight(a, VertexSet{1, 2}, 2) == doctest::Approx(0.3));

    const auto tri = AffinityMatrix::from_edges(3, std::vector<std::pair<Vertex, Vertex>>{{0, 1}, {1, 2}, {0, 2}});
    const double w0 = vertex_weight(tri, VertexSet{0, 1, 2}, 0);
    CHECK(w0 > 0.0);
    CHECK(vertex_weight(tri, VertexSet{0, 1, 2}, 1) == doctest::Approx(w0));
    CHECK(vertex_weight(tri, VertexSet{0, 1, 2}, 2) == doctest::Approx(w0));

    const auto edge = AffinityMatrix::from_edges(2, std::vector<std::pair<Vertex, Vertex>>{{0, 1}});
    CHECK(total_weight(edge, VertexSet{0, 1}) == doctest::Approx(2.0));

    // Path 0-1-2: every member weight is exactly 0, returned unclamped.
    const auto path = AffinityMatrix::from_edges(3, std::vector<std::pair<Vertex, Vertex>>{{0, 1}, {1, 2}});
    const double w_path = total_weight(path, VertexSet{0, 1, 2});
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) sum += vertex_weight(path, VertexSet{0, 1, 2}, i);
    CHECK(w_path == doctest::Approx(sum));
    CHECK(w_path == doctest::Approx(0.0));
}

TEST_CASE("memoized weights match the unmemoized recursion") {
    Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = cds::testing::uniform_int(rng, 2, 9);
        const AffinityMatrix a = cds::testing::random_weighted(rng, n, 0.7);
        WeightOracle oracle(a);
        const VertexSet s = cds::testing::random_subset(rng, n, 8);
        for (Vertex i : s) {
            const double expected = reference_weight(a.dense(), s.members(), i);
            CHECK(oracle.vertex_weight(s, i) == doctest::Approx(expected).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("oracle size cap is a loud error") {
    const AffinityMatrix a(20);
    CHECK_THROWS_AS(total_weight(a, VertexSet::range(16)), OracleSizeError);
    CHECK_THROWS_AS(total_weight(a, VertexSet::range(6), 5), OracleSizeError);
    CHECK_NOTHROW(total_weight(a, VertexSet::range(5), 5));
}

TEST_CASE("dominance examples") {
    const auto g = cds::testing::eight_vertex_graph();
    const auto maximal = is_dominant_set(g, VertexSet{4, 5, 6, 7});
    REQUIRE(accepted(maximal));
    const auto& cert = std::get<DominantSetCertificate>(maximal);
    double sum = 0.0;
    for (double w : cert.internal_weights) {
        CHECK(w > 0.0);
        sum += w;
    }
    CHECK(cert.total_weight == doctest::Approx(sum));

    const auto non_maximal = is_dominant_set(g, VertexSet{5, 6, 7});
    REQUIRE_FALSE(accepted(non_maximal));
    const auto& why = std::get<DominanceRejection>(non_maximal);
    CHECK(why.condition == DominanceViolation::kExternalWeight);
    CHECK(why.witness == 4);
    CHECK_FALSE(why.describe().empty());

    CHECK(accepted(is_dominant_set(AffinityMatrix(4), VertexSet{2})));

    // A non-clique fails before the external test.
    CHECK_FALSE(accepted(is_dominant_set(g, VertexSet{0, 2})));
}

TEST_CASE("maximal clique enumeration") {
    const auto tri = AffinityMatrix::from_edges(3, std::vector<std::pair<Vertex, Vertex>>{{0, 1}, {1, 2}, {0, 2}});
    CHECK(enumerate_maximal_cliques(tri) == std::vector<VertexSet>{VertexSet{0, 1, 2}});

    const auto path = AffinityMatrix::from_edges(3, std::vector<std::pair<Vertex, Vertex>>{{0, 1}, {1, 2}});
    CHECK(enumerate_maximal_cliques(path) == std::vector<VertexSet>{VertexSet{0, 1}, VertexSet{1, 2}});

    CHECK(enumerate_maximal_cliques(cds::testing::eight_vertex_graph()) ==
          std::vector<VertexSet>{VertexSet{0, 1}, VertexSet{1, 2}, VertexSet{3, 4}, VertexSet{4, 5, 6, 7}});

    CHECK_THROWS_AS(enumerate_maximal_cliques(AffinityMatrix(10), 8), OracleSizeError);
}

TEST_CASE("clique enumeration agrees with brute force") {
    Rng rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = cds::testing::uniform_int(rng, 1, 11);
        const auto a = cds::testing::random_unweighted(rng, n, 0.5);
        std::vector<VertexSet> expected;
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask)
            if (brute_force_is_maximal_clique(a, mask)) expected.push_back(VertexSet::from_mask(mask));
        std::sort(expected.begin(), expected.end());
        CHECK(enumerate_maximal_cliques(a) == expected);
    }
}

TEST_CASE("dominant sets of 0/1 graphs are maximal cliques") {
    Rng rng(31);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = cds::testing::uniform_int(rng, 3, 8);
        const auto a = cds::testing::random_unweighted(rng, n, 0.5);
        WeightOracle oracle(a);
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
            const bool dominant = accepted(is_dominant_set(oracle, VertexSet::from_mask(mask)));
            CHECK(dominant == brute_force_is_maximal_clique(a, mask));
        }
    }
}

TEST_CASE("strict external condition keeps only strictly maximal cliques") {
    // A clique C is strictly maximal when no outside vertex meets all but one
    // member of C.
    Rng rng(41);
    DominanceOptions strict;
    strict.strict_external = true;
    for (int trial = 0; trial < 8; ++trial) {
        const int n = cds::testing::uniform_int(rng, 3, 8);
        const auto a = cds::testing::random_unweighted(rng, n, 0.5);
        WeightOracle oracle(a);
        for (const auto& c : enumerate_maximal_cliques(a)) {
            bool strictly = true;
            for (int v = 0; v < n; ++v) {
                if (c.contains(v)) continue;
                std::size_t adjacent = 0;
                for (Vertex u : c) adjacent += a(u, v) > 0.0 ? 1 : 0;
                if (adjacent + 1 == c.size()) strictly = false;
            }
            CHECK(accepted(is_dominant_set(oracle, c, strict)) == strictly);
        }
    }
}

TEST_CASE("graph file round trip and rejection") {
    const auto g = load_graph_file(CDS_DATA_DIR "/eight_vertex.graph");
    CHECK(g.dense() == cds::testing::eight_vertex_graph().dense());

    std::stringstream buffer;
    write_graph(buffer, g);
    CHECK(read_graph(buffer).dense() == g.dense());

    const auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_graph(in);
    };
    CHECK(parse("# comment\n3 1\n\n0 2 0.5\n")(0, 2) == 0.5);
    CHECK_THROWS_AS(parse("3 1\n1 1 1\n"), ParseError);
    CHECK_THROWS_AS(parse("3 1\n0 3 1\n"), ParseError);
    CHECK_THROWS_AS(parse("3 1\n0 1 -1\n"), ParseError);
    CHECK_THROWS_AS(parse("3 2\n0 1 1\n"), ParseError);
    CHECK_THROWS_AS(parse("3 2\n0 1 1\n1 0 0.5\n"), ParseError);
    CHECK_THROWS_AS(parse("3 1\n0 1\n"), ParseError);
    CHECK_THROWS_AS(parse("abc"), ParseError);
    CHECK_THROWS_AS(load_graph_file("/nonexistent/file.graph"), ParseError);
}
