#include "cds/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cds {

std::string_view to_string(Dynamics d) {
    switch (d) {
    case Dynamics::kReplicator:
        return "replicator";
    case Dynamics::kPairwise:
        return "pairwise";
    }
    return "unknown";
}

Dynamics parse_dynamics(std::string_view name) {
    if (name == "replicator") return Dynamics::kReplicator;
    if (name == "pairwise") return Dynamics::kPairwise;
    throw InvalidArgument("unknown dynamics '" + std::string(name) + "' (expected replicator or pairwise)");
}

ConstraintSet::ConstraintSet(VertexSet members) : members_(std::move(members)) {
    if (members_.empty()) throw InvalidArgument("constraint set must be nonempty");
}

// Spectral bound -------------------------------------------------------------

namespace {

std::vector<Vertex> complement(const VertexSet& s, int n) {
    std::vector<Vertex> out;
    for (Vertex v = 0; v < n; ++v)
        if (!s.contains(v)) out.push_back(v);
    return out;
}

SpectralBound power_iteration(const Eigen::MatrixXd& b, const PowerIterationSettings& settings) {
    const Eigen::Index k = b.rows();
    // Shift by half the largest row sum so that -lambda_max (bipartite parts)
    // cannot compete with lambda_max. The shift keeps the iterate positive.
    const double shift = 0.5 * b.rowwise().sum().maxCoeff();
    const Eigen::MatrixXd shifted = b + shift * Eigen::MatrixXd::Identity(k, k);

    Eigen::VectorXd v = Eigen::VectorXd::Ones(k) / std::sqrt(static_cast<double>(k));
    SpectralBound out;
    out.dense = false;
    out.converged = false;
    double upper = b.rowwise().sum().maxCoeff();
    double lower = 0.0;
    for (int it = 1; it <= settings.max_iterations; ++it) {
        const Eigen::VectorXd w = shifted * v;
        lower = std::max(lower, v.dot(w) / v.squaredNorm() - shift);
        double cw = 0.0;
        for (Eigen::Index i = 0; i < k; ++i)
            if (v(i) > 1e-300) cw = std::max(cw, w(i) / v(i));
        upper = std::min(upper, cw - shift);
        out.iterations = it;
        v = w / w.norm();
        if (upper - lower <= settings.relative_tolerance * std::max(upper, 1e-300)) {
            out.converged = true;
            break;
        }
    }
    out.value = std::max(upper, lower);
    out.lower = lower;
    return out;
}

} // namespace

SpectralBound spectral_bound(const AffinityMatrix& a, const VertexSet& s, const PowerIterationSettings& settings) {
    s.check_bounds(a.size());
    const std::vector<Vertex> rest = complement(s, a.size());
    SpectralBound out;
    if (rest.empty()) return out;
    const Eigen::MatrixXd sub = a.principal_submatrix(std::span<const Vertex>(rest)).dense();
    if (sub.maxCoeff() <= 0.0) return out;
    if (static_cast<int>(rest.size()) <= settings.dense_cutoff) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sub, Eigen::EigenvaluesOnly);
        out.value = solver.eigenvalues().maxCoeff();
        out.lower = out.value;
        return out;
    }
    return power_iteration(sub, settings);
}

double alpha_from_bound(double bound, double margin) {
    if (!(margin > 0.0)) throw InvalidArgument("alpha margin must be > 0 (alpha has to exceed the bound strictly)");
    if (bound <= 0.0) return margin;
    return (1.0 + margin) * bound;
}

double choose_alpha(const AffinityMatrix& a, const VertexSet& s, double margin, const PowerIterationSettings& settings) {
    if (!(margin > 0.0)) throw InvalidArgument("alpha margin must be > 0 (alpha has to exceed the bound strictly)");
    return alpha_from_bound(spectral_bound(a, s, settings).value, margin);
}

Eigen::MatrixXd build_regularized_matrix(const AffinityMatrix& a, const VertexSet& s, double alpha) {
    if (!(alpha > 0.0)) throw InvalidArgument("alpha must be > 0");
    if (s.empty()) throw InvalidArgument("constraint set must be nonempty; use A itself for the unconstrained program");
    s.check_bounds(a.size());
    Eigen::MatrixXd m = a.dense();
    for (Vertex v = 0; v < a.size(); ++v)
        if (!s.contains(v)) m(v, v) = -alpha;
    return m;
}

double regularized_objective(const AffinityMatrix& a, const VertexSet& s, double alpha, const SimplexVector& x) {
    const Eigen::VectorXd& v = x.components();
    double outside = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!s.contains(static_cast<Vertex>(i))) outside += v(i) * v(i);
    return v.dot(a.dense() * v) - alpha * outside;
}

RegularizedProblem RegularizedProblem::with_auto_alpha(AffinityMatrix a, ConstraintSet s, double margin,
                                                       const PowerIterationSettings& settings) {
    const SpectralBound bound = spectral_bound(a, s.members(), settings);
    const double alpha = alpha_from_bound(bound.value, margin);
    return RegularizedProblem{std::move(a), std::move(s), alpha, margin, bound};
}

// Peel-off -------------------------------------------------------------------

SolverOutcome solve_regularized(const Eigen::MatrixXd& m, const ExtractionSettings& settings, int* refinement_iterations) {
    const SimplexVector start = SimplexVector::perturbed_barycenter(static_cast<int>(m.rows()));
    if (refinement_iterations != nullptr) *refinement_iterations = 0;
    if (settings.dynamics == Dynamics::kPairwise) {
        return run_pairwise_dynamics(m, start, settings.solver, settings.observer);
    }
    SolverOutcome outcome = run_replicator(m, start, settings.solver, settings.observer);
    if (!settings.refine_replicator) return outcome;
    SolverOutcome refined = run_pairwise_dynamics(m, outcome.solution, settings.solver, settings.observer);
    if (refinement_iterations != nullptr) *refinement_iterations = refined.iterations_used;
    refined.iterations_used = outcome.iterations_used;
    return refined;
}

ExtractionResult extract_constrained_clusters(const AffinityMatrix& a, const ConstraintSet& s,
                                              const ExtractionSettings& settings) {
    settings.solver.validate();
    if (!(settings.margin > 0.0)) throw InvalidArgument("alpha margin must be > 0");
    const int n = a.size();
    s.members().check_bounds(n);

    ExtractionResult result;
    VertexSet active = VertexSet::range(n);
    VertexSet remaining = s.members();

    while (!remaining.empty()) {
        const std::vector<Vertex>& index = active.members();
        const AffinityMatrix sub = a.principal_submatrix(std::span<const Vertex>(index));
        std::vector<Vertex> local_s;
        for (std::size_t k = 0; k < index.size(); ++k)
            if (remaining.contains(index[k])) local_s.push_back(static_cast<Vertex>(k));
        const VertexSet local(std::move(local_s));

        ExtractedCluster cluster;
        cluster.bound = spectral_bound(sub, local, settings.power);
        cluster.alpha = alpha_from_bound(cluster.bound.value, settings.margin);
        cluster.active_constraints = remaining;
        const Eigen::MatrixXd m = build_regularized_matrix(sub, local, cluster.alpha);

        const SolverOutcome outcome = solve_regularized(m, settings, &cluster.refinement_iterations);
        cluster.iterations = outcome.iterations_used;
        cluster.converged = outcome.converged;
        cluster.objective = outcome.objective;
        cluster.kkt_residual =
            kkt_residual(sub, outcome.solution, local, cluster.alpha, settings.solver.support_epsilon);

        std::vector<Vertex> global_support;
        Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
        for (Vertex k : outcome.support) global_support.push_back(index[static_cast<std::size_t>(k)]);
        for (std::size_t k = 0; k < index.size(); ++k) full(index[k]) = outcome.solution[static_cast<int>(k)];
        cluster.support = VertexSet(std::move(global_support));
        cluster.vector = SimplexVector::normalized(std::move(full));

        if (set_intersection(cluster.support, remaining).empty()) {
            std::ostringstream os;
            os << "extraction step " << result.clusters.size() + 1 << ": support " << cluster.support.to_string()
               << " misses the active constraint set " << remaining.to_string() << " (alpha=" << cluster.alpha
               << ", bound=" << cluster.bound.value << ", converged=" << cluster.converged
               << ", kkt=" << cluster.kkt_residual << ")";
            result.leftover_constraints = remaining;
            result.clusters.push_back(std::move(cluster));
            throw ExtractionAborted(os.str(), std::move(result));
        }

        active = set_difference(active, cluster.support);
        remaining = set_difference(remaining, cluster.support);
        result.union_of_supports = set_union(result.union_of_supports, cluster.support);
        result.clusters.push_back(std::move(cluster));
    }
    result.leftover_constraints = remaining;
    return result;
}

// Oracle ---------------------------------------------------------------------

VertexSet clique_union_oracle(const AffinityMatrix& a, const VertexSet& s, int max_vertices) {
    if (s.empty()) throw InvalidArgument("clique_union_oracle: S must be nonempty");
    s.check_bounds(a.size());
    const AffinityMatrix binary = a.binarized();
    const std::vector<VertexSet> all = enumerate_maximal_cliques(binary, max_vertices);

    std::vector<VertexSet> parts;
    for (const VertexSet& local : enumerate_maximal_cliques(binary.principal_submatrix(s), max_vertices)) {
        std::vector<Vertex> global;
        for (Vertex k : local) global.push_back(s[static_cast<std::size_t>(k)]);
        parts.emplace_back(std::move(global));
    }

    VertexSet out;
    for (const VertexSet& clique : all) {
        const bool hit = std::any_of(parts.begin(), parts.end(), [&](const VertexSet& c) {
            return std::includes(clique.begin(), clique.end(), c.begin(), c.end());
        });
        if (hit) out = set_union(out, clique);
    }
    return out;
}

} // namespace cds
