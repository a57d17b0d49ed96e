#pragma once

// Constrained dominant sets: maximize x'(A - alpha I_hat_S)x over the simplex,
// where I_hat_S is the identity restricted to vertices outside S. Once alpha
// exceeds the largest eigenvalue of A restricted to V \ S, every local
// maximizer has a support that meets S. Clusters are peeled off one at a time
// until every vertex of S has been captured.

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cds/dynamics.hpp"
#include "cds/error.hpp"
#include "cds/graph.hpp"

namespace cds {

enum class Dynamics { kReplicator, kPairwise };

std::string_view to_string(Dynamics d);
/// Accepts "replicator" or "pairwise".
Dynamics parse_dynamics(std::string_view name);

/// Nonempty set of user-selected vertices.
class ConstraintSet {
public:
    explicit ConstraintSet(VertexSet members);
    [[nodiscard]] const VertexSet& members() const { return members_; }

private:
    VertexSet members_;
};

struct PowerIterationSettings {
    double relative_tolerance = 1e-9;
    int max_iterations = 5000;
    /// Submatrices up to this size go straight to a dense eigensolver.
    int dense_cutoff = 32;
};

struct SpectralBound {
    /// Largest eigenvalue of A on V \ S. Power-iteration results are a
    /// Collatz-Wielandt upper estimate, so the value never undershoots.
    double value = 0.0;
    /// Rayleigh-quotient lower estimate (equal to value for dense solves).
    double lower = 0.0;
    bool converged = true;
    bool dense = true;
    int iterations = 0;
};

/// lambda_max(A_{V\S}); 0 when V \ S is empty or has no edges.
SpectralBound spectral_bound(const AffinityMatrix& a, const VertexSet& s, const PowerIterationSettings& settings = {});

/// (1 + margin) * bound, or margin when the bound is 0. Requires margin > 0.
double choose_alpha(const AffinityMatrix& a, const VertexSet& s, double margin,
                    const PowerIterationSettings& settings = {});
double alpha_from_bound(double bound, double margin);

/// A with -alpha written on the diagonal of every vertex outside S. S must be
/// nonempty and alpha positive.
Eigen::MatrixXd build_regularized_matrix(const AffinityMatrix& a, const VertexSet& s, double alpha);

/// x'Ax - alpha * sum_{i not in S} x_i^2.
double regularized_objective(const AffinityMatrix& a, const VertexSet& s, double alpha, const SimplexVector& x);

struct RegularizedProblem {
    AffinityMatrix base;
    ConstraintSet constraint;
    double alpha = 0.0;
    double margin = 0.0;
    SpectralBound bound;

    /// alpha chosen from the spectral bound with the given relative margin.
    static RegularizedProblem with_auto_alpha(AffinityMatrix a, ConstraintSet s, double margin,
                                              const PowerIterationSettings& settings = {});
    [[nodiscard]] Eigen::MatrixXd matrix() const { return build_regularized_matrix(base, constraint.members(), alpha); }
};

struct ExtractionSettings {
    Dynamics dynamics = Dynamics::kReplicator;
    double margin = 0.1;
    SolverSettings solver;
    /// After the replicator stops, finish with pairwise steps so that
    /// components the replicator only drives to zero asymptotically are
    /// removed exactly. No effect for Dynamics::kPairwise.
    bool refine_replicator = true;
    PowerIterationSettings power;
    /// Receives every iterate of every dynamics run (indices local to the
    /// active subgraph of that step).
    StepObserver observer;
};

struct ExtractedCluster {
    VertexSet support;          // global vertex indices
    SimplexVector vector;       // over all n vertices, zero off the active subgraph
    double objective = 0.0;     // x'(A - alpha I_hat_S)x on the active subgraph
    double kkt_residual = 0.0;
    double alpha = 0.0;
    SpectralBound bound;
    VertexSet active_constraints; // S at the time of this extraction
    int iterations = 0;
    int refinement_iterations = 0;
    bool converged = false;
};

struct ExtractionResult {
    std::vector<ExtractedCluster> clusters;
    VertexSet union_of_supports;
    VertexSet leftover_constraints;
};

/// Raised when a support misses the active constraint set, which the theory
/// rules out; indicates a numerical failure.
class ExtractionAborted : public Error {
public:
    ExtractionAborted(const std::string& what, ExtractionResult partial)
        : Error(what), partial_(std::move(partial)) {}
    [[nodiscard]] const ExtractionResult& partial() const { return partial_; }

private:
    ExtractionResult partial_;
};

/// Peel-off loop: choose alpha on the active subgraph, run the dynamics from
/// the (perturbed) barycenter, record the support, delete it from the graph
/// and from S, and repeat while S is nonempty.
ExtractionResult extract_constrained_clusters(const AffinityMatrix& a, const ConstraintSet& s,
                                              const ExtractionSettings& settings = {});

/// Runs the configured dynamics (and refinement) on one regularized matrix.
SolverOutcome solve_regularized(const Eigen::MatrixXd& m, const ExtractionSettings& settings, int* refinement_iterations = nullptr);

/// Ground truth for unweighted graphs: split S into cliques C_1..C_k that are
/// maximal within the subgraph induced by S, then return the union of every
/// maximal clique of G containing some C_i.
VertexSet clique_union_oracle(const AffinityMatrix& a, const VertexSet& s, int max_vertices = kDefaultCliqueCap);

} // namespace cds
