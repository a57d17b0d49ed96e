#pragma once

// Evolutionary dynamics for maximizing x'Mx over the standard simplex:
// discrete replicator dynamics and the pairwise infection/immunization
// dynamics (linear cost per step given a cached payoff vector).

#include <functional>

#include <Eigen/Dense>

#include "cds/graph.hpp"

namespace cds {

/// Nonnegative vector whose components sum to one.
class SimplexVector {
public:
    SimplexVector() = default;
    /// Requires nonnegative finite components summing to 1 within 1e-8;
    /// the stored vector is renormalized.
    explicit SimplexVector(Eigen::VectorXd components);

    /// Scales any nonnegative vector with positive sum onto the simplex.
    static SimplexVector normalized(Eigen::VectorXd components);
    static SimplexVector barycenter(int n);
    /// Barycenter plus epsilon * i on component i, renormalized. Breaks the
    /// symmetry of saddle points such as two identical disjoint cliques.
    static SimplexVector perturbed_barycenter(int n, double epsilon = 1e-9);
    static SimplexVector vertex(int n, int i);

    [[nodiscard]] int size() const { return static_cast<int>(x_.size()); }
    [[nodiscard]] double operator[](int i) const { return x_(i); }
    [[nodiscard]] const Eigen::VectorXd& components() const { return x_; }

    /// { i : x_i > relative_epsilon * max_k x_k }.
    [[nodiscard]] VertexSet support(double relative_epsilon) const;

private:
    Eigen::VectorXd x_;
};

struct SolverSettings {
    int max_iterations = 10000;
    /// Replicator: stop when the L1 distance of successive iterates falls
    /// below this. Pairwise: stop when no strategy gains more than this.
    double tolerance = 1e-10;
    /// Components at or below this fraction of the largest one are read as 0.
    double support_epsilon = 1e-6;

    void validate() const;
};

struct SolverOutcome {
    SimplexVector solution;
    double objective = 0.0; // x'Mx for the matrix passed in
    int iterations_used = 0;
    bool converged = false;
    VertexSet support;
};

/// Called once for the start point (iteration 0) and after every update.
using StepObserver = std::function<void(int iteration, const SimplexVector& x, double objective)>;

/// One replicator update x_i <- x_i (Mx)_i / x'Mx, renormalized.
/// Throws DegenerateStateError if x'Mx <= 0 or a supported payoff is negative.
SimplexVector replicator_step(const Eigen::MatrixXd& m, const SimplexVector& x);

/// Iterates the replicator update from x0. Matrices with negative entries are
/// shifted by a constant first, which leaves the maximizers on the simplex and
/// the ascent property intact.
SolverOutcome run_replicator(const Eigen::MatrixXd& m, const SimplexVector& x0, const SolverSettings& settings = {},
                             const StepObserver& observer = {});

/// Infection/immunization dynamics. Each step moves toward the pure strategy
/// with the largest payoff surplus (infection) or away from the supported one
/// with the largest deficit (immunization), with an exact line search; ties go
/// to the lowest index.
SolverOutcome run_pairwise_dynamics(const Eigen::MatrixXd& m, const SimplexVector& x0,
                                    const SolverSettings& settings = {}, const StepObserver& observer = {});

/// Largest violation of the first-order conditions of
///   max x'(A - alpha I_hat_S)x  over the simplex,
/// where I_hat_S is the identity on vertices outside S. With
/// lambda = x'Ax - alpha * sum_{i not in S} x_i^2 the checked cases are
/// |(Ax)_i - alpha x_i - lambda| for supported i outside S, |(Ax)_i - lambda|
/// for supported i in S, and max(0, (Ax)_i - lambda) for unsupported i.
/// Support is read with the relative threshold `support_epsilon`.
double kkt_residual(const AffinityMatrix& a, const SimplexVector& x, const VertexSet& s, double alpha,
                    double support_epsilon = 1e-6);

} // namespace cds
