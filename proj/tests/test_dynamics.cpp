#include <doctest.h>

#include <algorithm>

#include "cds/dynamics.hpp"
#include "cds/error.hpp"
#include "cds/extraction.hpp"
#include "generators.hpp"

using namespace cds;
using cds::testing::Rng;

namespace {

Eigen::MatrixXd two_by_two() {
    Eigen::MatrixXd m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Eigen::MatrixXd disjoint_edges() {
    return AffinityMatrix::from_edges(4, std::vector<std::pair<Vertex, Vertex>>{{0, 1}, {2, 3}}).dense();
}

Eigen::MatrixXd triangle() {
    return AffinityMatrix::from_edges(3, std::vector<std::pair<Vertex, Vertex>>{{0, 1}, {1, 2}, {0, 2}}).dense();
}

using Solver = SolverOutcome (*)(const Eigen::MatrixXd&, const SimplexVector&, const SolverSettings&,
                                 const StepObserver&);

// Records every iterate and checks simplex membership and ascent.
struct AscentAudit {
    double slack = 1e-12;
    int steps = 0;
    int simplex_violations = 0;
    int ascent_violations = 0;
    double last = -1e300;

    StepObserver observer() {
        return [this](int, const SimplexVector& x, double objective) {
            ++steps;
            const auto& v = x.components();
            if (v.minCoeff() < 0.0 || std::abs(v.sum() - 1.0) > 1e-12) ++simplex_violations;
            if (objective < last - slack) ++ascent_violations;
            last = objective;
        };
    }
};

} // namespace

TEST_CASE("simplex vector construction") {
    CHECK_THROWS_AS(SimplexVector(Eigen::Vector2d(0.7, 0.7)), InvalidArgument);
    CHECK_THROWS_AS(SimplexVector(Eigen::Vector2d(1.5, -0.5)), InvalidArgument);
    CHECK_THROWS_AS(SimplexVector::normalized(Eigen::Vector2d(0, 0)), InvalidArgument);
    CHECK(SimplexVector::normalized(Eigen::Vector2d(1, 3))[1] == doctest::Approx(0.75));
    const auto b = SimplexVector::barycenter(4);
    CHECK(b[2] == 0.25);
    const auto p = SimplexVector::perturbed_barycenter(4);
    CHECK(p[0] < p[1]);
    CHECK(p[1] < p[3]);
    CHECK(p.components().sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(SimplexVector::vertex(3, 1).support(1e-6) == VertexSet{1});
    CHECK(SimplexVector(Eigen::Vector3d(0.5, 1e-9, 0.5)).support(1e-6) == VertexSet{0, 2});
}

TEST_CASE("replicator step examples") {
    const auto m = two_by_two();
    const auto fixed = replicator_step(m, SimplexVector(Eigen::Vector2d(0.5, 0.5)));
    CHECK(fixed[0] == doctest::Approx(0.5));
    const auto moved = replicator_step(m, SimplexVector(Eigen::Vector2d(0.9, 0.1)));
    CHECK(moved[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(moved[1] == doctest::Approx(0.5).epsilon(1e-14));

    // The clique characteristic vector is a full-support fixed point.
    const auto tri = triangle();
    const auto still = replicator_step(tri, SimplexVector::barycenter(3));
    CHECK((still.components() - SimplexVector::barycenter(3).components()).lpNorm<1>() < 1e-15);
}

TEST_CASE("replicator step rejects degenerate states") {
    CHECK_THROWS_AS(replicator_step(Eigen::MatrixXd::Zero(2, 2), SimplexVector::barycenter(2)), DegenerateStateError);
    Eigen::MatrixXd neg(2, 2);
    neg << 0, -1, -1, 0;
    CHECK_THROWS_AS(replicator_step(neg, SimplexVector::barycenter(2)), DegenerateStateError);
    Eigen::MatrixXd mixed(2, 2);
    mixed << 2, -1, -1, 0;
    CHECK_THROWS_AS(replicator_step(mixed, SimplexVector(Eigen::Vector2d(0.5, 0.5))), DegenerateStateError);
    CHECK_THROWS_AS(replicator_step(Eigen::MatrixXd::Zero(3, 3), SimplexVector::barycenter(2)), InvalidArgument);
}

TEST_CASE("both dynamics on small graphs") {
    for (Solver solve : {Solver(&run_replicator), Solver(&run_pairwise_dynamics)}) {
        const auto split = solve(disjoint_edges(), SimplexVector::perturbed_barycenter(4), {}, {});
        CHECK(split.converged);
        CHECK((split.support == VertexSet{0, 1} || split.support == VertexSet{2, 3}));
        CHECK(split.objective == doctest::Approx(0.5).epsilon(1e-8));

        const auto tri = solve(triangle(), SimplexVector::barycenter(3), {}, {});
        CHECK(tri.converged);
        CHECK(tri.support == VertexSet{0, 1, 2});
        CHECK(tri.objective == doctest::Approx(2.0 / 3.0));
        for (int i = 0; i < 3; ++i) CHECK(tri.solution[i] == doctest::Approx(1.0 / 3.0));

        SolverSettings none;
        none.max_iterations = 0;
        const auto start = SimplexVector(Eigen::Vector3d(0.2, 0.3, 0.5));
        const auto idle = solve(disjoint_edges().topLeftCorner(3, 3), start, none, {});
        CHECK_FALSE(idle.converged);
        CHECK(idle.iterations_used == 0);
        CHECK(idle.solution.components() == start.components());
    }
}

TEST_CASE("perturbed start resolves the two-clique saddle identically for both dynamics") {
    const auto start = SimplexVector::perturbed_barycenter(4);
    const auto r = run_replicator(disjoint_edges(), start);
    const auto p = run_pairwise_dynamics(disjoint_edges(), start);
    CHECK(r.support == p.support);
    // The perturbation favours higher indices.
    CHECK(r.support == VertexSet{2, 3});
}

TEST_CASE("solver settings validation") {
    SolverSettings s;
    s.tolerance = 0.0;
    CHECK_THROWS_AS(run_replicator(triangle(), SimplexVector::barycenter(3), s), InvalidArgument);
    s = {};
    s.support_epsilon = -1.0;
    CHECK_THROWS_AS(run_pairwise_dynamics(triangle(), SimplexVector::barycenter(3), s), InvalidArgument);
}

TEST_CASE("replicator iterates stay on the simplex and never lose objective") {
    Rng rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = cds::testing::uniform_int(rng, 2, 20);
        const auto a = cds::testing::random_weighted(rng, n, 0.5);
        const auto s = cds::testing::random_subset(rng, n, n);
        const double alpha = choose_alpha(a, s, 0.1);
        const auto m = build_regularized_matrix(a, s, alpha);
        AscentAudit audit;
        run_replicator(m, SimplexVector::perturbed_barycenter(n), {}, audit.observer());
        CHECK(audit.steps > 0);
        CHECK(audit.simplex_violations == 0);
        CHECK(audit.ascent_violations == 0);
    }
}

TEST_CASE("pairwise iterates stay on the simplex and never lose objective") {
    Rng rng(8);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = cds::testing::uniform_int(rng, 2, 20);
        const auto a = cds::testing::random_weighted(rng, n, 0.5);
        const auto s = cds::testing::random_subset(rng, n, n);
        const auto m = build_regularized_matrix(a, s, choose_alpha(a, s, 0.1));
        AscentAudit audit;
        audit.slack = 1e-10;
        run_pairwise_dynamics(m, SimplexVector::perturbed_barycenter(n), {}, audit.observer());
        CHECK(audit.simplex_violations == 0);
        CHECK(audit.ascent_violations == 0);
    }
}

TEST_CASE("replicator never revives a zero component") {
    Rng rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = cds::testing::uniform_int(rng, 3, 12);
        const auto a = cds::testing::random_weighted(rng, n, 0.6);
        Eigen::VectorXd start = Eigen::VectorXd::Ones(n);
        const int dead = cds::testing::uniform_int(rng, 0, n - 1);
        start(dead) = 0.0;
        bool revived = false;
        run_replicator(a.dense(), SimplexVector::normalized(start), {},
                       [&](int, const SimplexVector& x, double) { revived = revived || x[dead] != 0.0; });
        CHECK_FALSE(revived);
    }
}

TEST_CASE("both dynamics settle on clique maximizers of 0/1 graphs") {
    // Different dynamics may pick different local maxima from the same start.
    // On a 0/1 graph every local maximum has value 1 - 1/k for a maximal
    // k-clique inside its support; non-strict maxima spread mass beyond it.
    Rng rng(10);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = cds::testing::uniform_int(rng, 2, 12);
        const auto a = cds::testing::random_unweighted(rng, n, 0.5);
        if (a.edge_count() == 0) continue;
        const auto cliques = enumerate_maximal_cliques(a);
        for (Dynamics d : {Dynamics::kReplicator, Dynamics::kPairwise}) {
            ExtractionSettings settings;
            settings.dynamics = d;
            const auto out = solve_regularized(a.dense(), settings);
            const bool witnessed = std::any_of(cliques.begin(), cliques.end(), [&](const VertexSet& c) {
                return set_difference(c, out.support).empty() &&
                       std::abs(out.objective - (1.0 - 1.0 / static_cast<double>(c.size()))) < 1e-9;
            });
            CHECK(witnessed);
        }
    }
}

TEST_CASE("both dynamics mostly agree on constrained 0/1 problems") {
    Rng rng(12);
    int agreements = 0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        const int n = cds::testing::uniform_int(rng, 2, 12);
        const auto a = cds::testing::random_unweighted(rng, n, 0.5);
        const ConstraintSet s(cds::testing::random_subset(rng, n, 4));
        ExtractionSettings settings;
        const auto r = extract_constrained_clusters(a, s, settings);
        settings.dynamics = Dynamics::kPairwise;
        const auto p = extract_constrained_clusters(a, s, settings);
        agreements += r.union_of_supports == p.union_of_supports ? 1 : 0;
    }
    MESSAGE("dynamics agreement " << agreements << "/" << trials);
    CHECK(agreements >= trials * 95 / 100);
}

TEST_CASE("kkt residual examples") {
    const auto tri = AffinityMatrix::from_edges(5, std::vector<std::pair<Vertex, Vertex>>{{0, 1}, {1, 2}, {0, 2}});
    Eigen::VectorXd v = Eigen::VectorXd::Zero(5);
    v.head(3).setConstant(1.0 / 3.0);
    const SimplexVector clique(v);
    for (double alpha : {0.1, 1.0, 7.0}) CHECK(kkt_residual(tri, clique, VertexSet{0, 1, 2}, alpha) == doctest::Approx(0.0));

    const auto path = AffinityMatrix::from_edges(3, std::vector<std::pair<Vertex, Vertex>>{{0, 1}, {1, 2}});
    CHECK(kkt_residual(path, SimplexVector::barycenter(3), VertexSet{0, 1, 2}, 0.5) > 0.1);

    CHECK_THROWS_AS(kkt_residual(path, SimplexVector::barycenter(4), VertexSet{0}, 0.5), InvalidArgument);
    CHECK_THROWS_AS(kkt_residual(path, SimplexVector::barycenter(3), VertexSet{5}, 0.5), InvalidArgument);
}
