#include "cds/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cds/error.hpp"

namespace cds {

// SimplexVector --------------------------------------------------------------

namespace {

void check_nonnegative(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v(i)) || v(i) < 0.0) {
            throw InvalidArgument("simplex component " + std::to_string(i) + " is negative or not finite");
        }
    }
}

} // namespace

SimplexVector::SimplexVector(Eigen::VectorXd components) {
    if (components.size() == 0) throw InvalidArgument("simplex vector must be nonempty");
    check_nonnegative(components);
    const double sum = components.sum();
    if (std::abs(sum - 1.0) > 1e-8) throw InvalidArgument("simplex components must sum to 1");
    x_ = std::move(components) / sum;
}

SimplexVector SimplexVector::normalized(Eigen::VectorXd components) {
    if (components.size() == 0) throw InvalidArgument("simplex vector must be nonempty");
    check_nonnegative(components);
    const double sum = components.sum();
    if (!(sum > 0.0)) throw InvalidArgument("cannot normalize a zero vector onto the simplex");
    SimplexVector out;
    out.x_ = std::move(components) / sum;
    return out;
}

SimplexVector SimplexVector::barycenter(int n) {
    if (n <= 0) throw InvalidArgument("barycenter of an empty simplex");
    SimplexVector out;
    out.x_ = Eigen::VectorXd::Constant(n, 1.0 / n);
    return out;
}

SimplexVector SimplexVector::perturbed_barycenter(int n, double epsilon) {
    if (n <= 0) throw InvalidArgument("barycenter of an empty simplex");
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = 1.0 / n + epsilon * i;
    return normalized(std::move(v));
}

SimplexVector SimplexVector::vertex(int n, int i) {
    if (i < 0 || i >= n) throw InvalidArgument("simplex vertex index out of range");
    SimplexVector out;
    out.x_ = Eigen::VectorXd::Zero(n);
    out.x_(i) = 1.0;
    return out;
}

VertexSet SimplexVector::support(double relative_epsilon) const {
    const double cut = relative_epsilon * x_.maxCoeff();
    std::vector<Vertex> members;
    for (Eigen::Index i = 0; i < x_.size(); ++i)
        if (x_(i) > cut) members.push_back(static_cast<Vertex>(i));
    return VertexSet(std::move(members));
}

// Settings ---------------------------------------------------------------------

void SolverSettings::validate() const {
    if (max_iterations < 0) throw InvalidArgument("max_iterations must be >= 0");
    if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be > 0");
    if (!(support_epsilon > 0.0)) throw InvalidArgument("support_epsilon must be > 0");
}

namespace {

void check_problem(const Eigen::MatrixXd& m, const SimplexVector& x) {
    if (m.rows() != m.cols()) throw InvalidArgument("payoff matrix must be square");
    if (m.rows() != x.size()) throw InvalidArgument("payoff matrix and start vector differ in size");
}

SolverOutcome finish(const Eigen::MatrixXd& m, SimplexVector x, int iterations, bool converged,
                     const SolverSettings& settings) {
    SolverOutcome out;
    out.objective = x.components().dot(m * x.components());
    out.support = x.support(settings.support_epsilon);
    out.solution = std::move(x);
    out.iterations_used = iterations;
    out.converged = converged;
    return out;
}

} // namespace

// Replicator -------------------------------------------------------------------

SimplexVector replicator_step(const Eigen::MatrixXd& m, const SimplexVector& x) {
    check_problem(m, x);
    const Eigen::VectorXd payoff = m * x.components();
    const double mean = x.components().dot(payoff);
    if (!(mean > 0.0)) throw DegenerateStateError("replicator step: x'Mx = " + std::to_string(mean) + " is not positive");
    Eigen::VectorXd next = x.components().cwiseProduct(payoff) / mean;
    for (Eigen::Index i = 0; i < next.size(); ++i) {
        if (next(i) < 0.0) {
            throw DegenerateStateError("replicator step: negative payoff on supported component " + std::to_string(i));
        }
    }
    return SimplexVector::normalized(std::move(next));
}

SolverOutcome run_replicator(const Eigen::MatrixXd& m, const SimplexVector& x0, const SolverSettings& settings,
                             const StepObserver& observer) {
    settings.validate();
    check_problem(m, x0);

    // x'(M + cJ)x = x'Mx + c on the simplex, so the shift changes nothing but
    // the sign of the payoffs.
    double shift = std::max(0.0, -m.minCoeff());
    if (m.maxCoeff() + shift <= 0.0) shift = 1.0;
    const Eigen::MatrixXd shifted = (m.array() + shift).matrix();

    SimplexVector x = x0;
    if (observer) observer(0, x, x.components().dot(m * x.components()));
    for (int t = 1; t <= settings.max_iterations; ++t) {
        SimplexVector next = replicator_step(shifted, x);
        const double moved = (next.components() - x.components()).lpNorm<1>();
        x = std::move(next);
        if (observer) observer(t, x, x.components().dot(m * x.components()));
        if (moved < settings.tolerance) return finish(m, std::move(x), t, true, settings);
    }
    return finish(m, std::move(x), settings.max_iterations, false, settings);
}

// Infection / immunization -------------------------------------------------------

SolverOutcome run_pairwise_dynamics(const Eigen::MatrixXd& m, const SimplexVector& x0, const SolverSettings& settings,
                                    const StepObserver& observer) {
    settings.validate();
    check_problem(m, x0);
    const Eigen::Index n = m.rows();

    Eigen::VectorXd x = x0.components();
    Eigen::VectorXd g = m * x;
    constexpr int kRefreshPeriod = 64;

    auto emit = [&](int t) {
        if (!observer) return;
        const SimplexVector snapshot = SimplexVector::normalized(x);
        observer(t, snapshot, snapshot.components().dot(m * snapshot.components()));
    };
    emit(0);

    bool payoffs_exact = true;
    int t = 0;
    while (true) {
        const double pi = x.dot(g);
        Eigen::Index best_in = 0;
        Eigen::Index worst_out = -1;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (g(k) > g(best_in)) best_in = k;
            if (x(k) > 0.0 && (worst_out < 0 || g(k) < g(worst_out))) worst_out = k;
        }
        const double infection_gain = g(best_in) - pi;
        const double immunization_gain = pi - g(worst_out);
        if (std::max(infection_gain, immunization_gain) <= settings.tolerance) {
            if (payoffs_exact) return finish(m, SimplexVector::normalized(x), t, true, settings);
            // Confirm against exact payoffs before declaring a fixed point.
            g = m * x;
            payoffs_exact = true;
            continue;
        }
        if (t == settings.max_iterations) break;
        ++t;

        Eigen::VectorXd direction;
        Eigen::VectorXd payoff_change;
        double slope = 0.0;
        double curvature = 0.0;
        bool immunize = false;
        if (infection_gain >= immunization_gain) {
            direction = -x;
            direction(best_in) += 1.0;
            payoff_change = m.col(best_in) - g;
            slope = infection_gain;
            curvature = m(best_in, best_in) - 2.0 * g(best_in) + pi;
        } else {
            const double xj = x(worst_out);
            if (xj >= 1.0) break; // a pure strategy cannot be immunized against itself
            const double mu = xj / (1.0 - xj);
            direction = mu * x;
            direction(worst_out) -= mu;
            payoff_change = mu * (g - m.col(worst_out));
            slope = mu * immunization_gain;
            curvature = mu * mu * (pi - 2.0 * g(worst_out) + m(worst_out, worst_out));
            immunize = true;
        }
        double step = 1.0;
        if (curvature < 0.0) step = std::min(1.0, -slope / curvature);

        x += step * direction;
        if (immunize && step == 1.0) x(worst_out) = 0.0;
        x = x.cwiseMax(0.0);
        const double sum = x.sum();
        x /= sum;
        if (t % kRefreshPeriod == 0) {
            g = m * x;
            payoffs_exact = true;
        } else {
            g = (g + step * payoff_change) / sum;
            payoffs_exact = false;
        }
        emit(t);
    }
    return finish(m, SimplexVector::normalized(x), settings.max_iterations, false, settings);
}

// KKT ------------------------------------------------------------------------

double kkt_residual(const AffinityMatrix& a, const SimplexVector& x, const VertexSet& s, double alpha,
                    double support_epsilon) {
    if (x.size() != a.size()) throw InvalidArgument("kkt_residual: vector and matrix differ in size");
    s.check_bounds(a.size());
    const Eigen::VectorXd& v = x.components();
    const Eigen::VectorXd ax = a.dense() * v;
    double outside_sq = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!s.contains(static_cast<Vertex>(i))) outside_sq += v(i) * v(i);
    const double lambda = v.dot(ax) - alpha * outside_sq;
    const double cut = support_epsilon * v.maxCoeff();

    double residual = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const bool in_s = s.contains(static_cast<Vertex>(i));
        if (v(i) > cut) {
            const double payoff = in_s ? ax(i) : ax(i) - alpha * v(i);
            residual = std::max(residual, std::abs(payoff - lambda));
        } else {
            residual = std::max(residual, ax(i) - lambda);
        }
    }
    return residual;
}

} // namespace cds
