#include "cds/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <sstream>

#include "cds/error.hpp"

namespace cds {

// VertexSet ------------------------------------------------------------------

VertexSet::VertexSet(std::initializer_list<Vertex> members) : VertexSet(std::vector<Vertex>(members)) {}

VertexSet::VertexSet(std::vector<Vertex> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    if (!members_.empty() && members_.front() < 0) {
        throw InvalidArgument("vertex index must be nonnegative, got " + std::to_string(members_.front()));
    }
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
        throw InvalidArgument("vertex set contains duplicates");
    }
}

VertexSet VertexSet::range(int n) {
    std::vector<Vertex> v(static_cast<std::size_t>(std::max(n, 0)));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
    return VertexSet(std::move(v));
}

bool VertexSet::contains(Vertex v) const { return std::binary_search(members_.begin(), members_.end(), v); }

void VertexSet::check_bounds(int n) const {
    if (!members_.empty() && members_.back() >= n) {
        throw InvalidArgument("vertex " + std::to_string(members_.back()) + " out of range for graph of size " +
                              std::to_string(n));
    }
}

VertexSet VertexSet::with(Vertex v) const {
    if (contains(v)) return *this;
    auto copy = members_;
    copy.push_back(v);
    return VertexSet(std::move(copy));
}

VertexSet VertexSet::without(Vertex v) const {
    auto copy = members_;
    copy.erase(std::remove(copy.begin(), copy.end(), v), copy.end());
    VertexSet out;
    out.members_ = std::move(copy);
    return out;
}

std::uint64_t VertexSet::mask() const {
    std::uint64_t m = 0;
    for (Vertex v : members_) {
        if (v >= 64) throw OracleSizeError("bitmask representation needs vertices < 64");
        m |= std::uint64_t{1} << v;
    }
    return m;
}

VertexSet VertexSet::from_mask(std::uint64_t mask) {
    std::vector<Vertex> v;
    while (mask != 0) {
        v.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    VertexSet out;
    out.members_ = std::move(v);
    return out;
}

std::string VertexSet::to_string(int offset) const {
    std::ostringstream os;
    os << '{';
    for (std::size_t k = 0; k < members_.size(); ++k) {
        if (k != 0) os << ", ";
        os << members_[k] + offset;
    }
    os << '}';
    return os.str();
}

VertexSet set_union(const VertexSet& a, const VertexSet& b) {
    std::vector<Vertex> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return VertexSet(std::move(out));
}

VertexSet set_difference(const VertexSet& a, const VertexSet& b) {
    std::vector<Vertex> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return VertexSet(std::move(out));
}

VertexSet set_intersection(const VertexSet& a, const VertexSet& b) {
    std::vector<Vertex> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return VertexSet(std::move(out));
}

// AffinityMatrix -------------------------------------------------------------

AffinityMatrix::AffinityMatrix(int n) {
    if (n < 0) throw InvalidArgument("negative vertex count");
    w_ = Eigen::MatrixXd::Zero(n, n);
}

AffinityMatrix AffinityMatrix::from_dense(Eigen::MatrixXd weights, double symmetry_tolerance) {
    if (weights.rows() != weights.cols()) throw InvalidArgument("affinity matrix must be square");
    const Eigen::Index n = weights.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (weights(i, i) != 0.0) throw InvalidArgument("affinity matrix must have a zero diagonal");
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double wij = weights(i, j);
            const double wji = weights(j, i);
            if (!std::isfinite(wij) || !std::isfinite(wji)) throw InvalidArgument("affinity entries must be finite");
            if (wij < 0.0 || wji < 0.0) throw InvalidArgument("affinity entries must be nonnegative");
            if (std::abs(wij - wji) > symmetry_tolerance) {
                throw InvalidArgument("affinity matrix is not symmetric at (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ")");
            }
            const double mean = 0.5 * (wij + wji);
            weights(i, j) = mean;
            weights(j, i) = mean;
        }
    }
    AffinityMatrix a;
    a.w_ = std::move(weights);
    return a;
}

AffinityMatrix AffinityMatrix::from_edges(int n, std::span<const std::pair<Vertex, Vertex>> edges, double weight) {
    AffinityMatrix a(n);
    for (const auto& [i, j] : edges) a.set_edge(i, j, weight);
    return a;
}

void AffinityMatrix::set_edge(Vertex i, Vertex j, double weight) {
    if (i < 0 || j < 0 || i >= size() || j >= size()) throw InvalidArgument("edge endpoint out of range");
    if (i == j) throw InvalidArgument("self-loops are not allowed");
    if (!(weight >= 0.0) || !std::isfinite(weight)) throw InvalidArgument("edge weight must be finite and >= 0");
    w_(i, j) = weight;
    w_(j, i) = weight;
}

AffinityMatrix AffinityMatrix::principal_submatrix(std::span<const Vertex> vertices) const {
    const auto k = static_cast<Eigen::Index>(vertices.size());
    AffinityMatrix sub;
    sub.w_.resize(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
        for (Eigen::Index c = 0; c < k; ++c) {
            sub.w_(r, c) = w_(vertices[static_cast<std::size_t>(r)], vertices[static_cast<std::size_t>(c)]);
        }
    }
    return sub;
}

AffinityMatrix AffinityMatrix::binarized() const {
    AffinityMatrix b;
    b.w_ = (w_.array() > 0.0).cast<double>().matrix();
    return b;
}

std::size_t AffinityMatrix::edge_count() const {
    std::size_t m = 0;
    for (Eigen::Index i = 0; i < w_.rows(); ++i)
        for (Eigen::Index j = i + 1; j < w_.cols(); ++j)
            if (w_(i, j) > 0.0) ++m;
    return m;
}

// Weight recursion -----------------------------------------------------------

namespace {

void require_member(const VertexSet& s, Vertex i, const char* what) {
    if (!s.contains(i)) throw InvalidArgument(std::string(what) + ": vertex " + std::to_string(i) + " not in S");
}

} // namespace

double relative_similarity(const AffinityMatrix& a, const VertexSet& s, Vertex i, Vertex j) {
    if (s.empty()) throw InvalidArgument("relative_similarity: S must be nonempty");
    s.check_bounds(a.size());
    if (j < 0 || j >= a.size()) throw InvalidArgument("relative_similarity: vertex out of range");
    require_member(s, i, "relative_similarity");
    if (s.contains(j)) throw InvalidArgument("relative_similarity: j must lie outside S");
    double row = 0.0;
    for (Vertex k : s) row += a(i, k);
    return a(i, j) - row / static_cast<double>(s.size());
}

WeightOracle::WeightOracle(const AffinityMatrix& a, std::size_t max_set_size) : a_(&a), cap_(max_set_size) {
    if (a.size() > 64) throw OracleSizeError("weight oracle supports graphs with at most 64 vertices");
}

void WeightOracle::check_size(std::size_t set_size) const {
    if (set_size > cap_) {
        throw OracleSizeError("weight recursion on a set of size " + std::to_string(set_size) +
                              " exceeds the oracle cap of " + std::to_string(cap_));
    }
}

const std::vector<double>& WeightOracle::weights(std::uint64_t mask) {
    if (auto it = memo_.find(mask); it != memo_.end()) return it->second;
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size == 0) throw InvalidArgument("weight of an empty set");
    check_size(size);

    const auto n = static_cast<std::size_t>(a_->size());
    std::vector<double> w(n, 0.0);
    if (size == 1) {
        w[static_cast<std::size_t>(std::countr_zero(mask))] = 1.0;
    } else {
        const VertexSet members = VertexSet::from_mask(mask);
        for (Vertex i : members) {
            const std::uint64_t rest = mask & ~(std::uint64_t{1} << i);
            // Copy: the recursive call may insert into memo_.
            const std::vector<double> w_rest = weights(rest);
            const double inv = 1.0 / static_cast<double>(size - 1);
            double acc = 0.0;
            for (Vertex j : members) {
                if (j == i) continue;
                double row = 0.0;
                for (Vertex k : members)
                    if (k != i) row += (*a_)(j, k);
                const double phi = (*a_)(j, i) - row * inv;
                acc += phi * w_rest[static_cast<std::size_t>(j)];
            }
            w[static_cast<std::size_t>(i)] = acc;
        }
    }
    return memo_.emplace(mask, std::move(w)).first->second;
}

double WeightOracle::vertex_weight(const VertexSet& s, Vertex i) {
    s.check_bounds(a_->size());
    require_member(s, i, "vertex_weight");
    check_size(s.size());
    return weights(s.mask())[static_cast<std::size_t>(i)];
}

double WeightOracle::total_weight(const VertexSet& s) {
    if (s.empty()) throw InvalidArgument("total_weight: S must be nonempty");
    s.check_bounds(a_->size());
    check_size(s.size());
    const auto& w = weights(s.mask());
    double total = 0.0;
    for (Vertex i : s) total += w[static_cast<std::size_t>(i)];
    return total;
}

double vertex_weight(const AffinityMatrix& a, const VertexSet& s, Vertex i, std::size_t max_set_size) {
    WeightOracle oracle(a, max_set_size);
    return oracle.vertex_weight(s, i);
}

double total_weight(const AffinityMatrix& a, const VertexSet& s, std::size_t max_set_size) {
    WeightOracle oracle(a, max_set_size);
    return oracle.total_weight(s);
}

// Dominant-set test ------------------------------------------------------------

std::string DominanceRejection::describe() const {
    std::ostringstream os;
    switch (condition) {
    case DominanceViolation::kSubsetWeight:
        os << "subset " << witness_set.to_string() << " has nonpositive total weight " << value;
        break;
    case DominanceViolation::kInternalWeight:
        os << "member " << witness << " has nonpositive weight " << value;
        break;
    case DominanceViolation::kExternalWeight:
        os << "outside vertex " << witness << " would join with weight " << value;
        break;
    }
    return os.str();
}

DominanceVerdict is_dominant_set(const AffinityMatrix& a, const VertexSet& s, const DominanceOptions& options) {
    WeightOracle oracle(a, options.max_set_size);
    return is_dominant_set(oracle, s, options);
}

DominanceVerdict is_dominant_set(WeightOracle& oracle, const VertexSet& s, const DominanceOptions& options) {
    const AffinityMatrix& a = oracle.graph();
    if (s.empty()) throw InvalidArgument("is_dominant_set: S must be nonempty");
    s.check_bounds(a.size());
    const bool has_outside = static_cast<int>(s.size()) < a.size();
    const std::size_t needed = s.size() + (has_outside ? 1 : 0);
    if (needed > oracle.max_set_size()) {
        throw OracleSizeError("dominant-set test needs sets of size " + std::to_string(needed) +
                              ", above the oracle cap of " + std::to_string(oracle.max_set_size()));
    }
    const double tol = options.zero_tolerance;
    const std::uint64_t full = s.mask();

    // W(T) > 0 for every nonempty T within S.
    for (std::uint64_t t = full; t != 0; t = (t - 1) & full) {
        const auto& w = oracle.weights(t);
        double total = 0.0;
        for (std::uint64_t bits = t; bits != 0; bits &= bits - 1) total += w[static_cast<std::size_t>(std::countr_zero(bits))];
        if (!(total > tol)) {
            return DominanceRejection{DominanceViolation::kSubsetWeight, VertexSet::from_mask(t), -1, total};
        }
    }

    DominantSetCertificate cert;
    cert.set = s;
    const auto& ws = oracle.weights(full);
    for (Vertex i : s) {
        const double wi = ws[static_cast<std::size_t>(i)];
        if (!(wi > tol)) return DominanceRejection{DominanceViolation::kInternalWeight, {}, i, wi};
        cert.internal_weights.push_back(wi);
        cert.total_weight += wi;
    }

    for (Vertex i = 0; i < a.size(); ++i) {
        if (s.contains(i)) continue;
        const double wi = oracle.weights(full | (std::uint64_t{1} << i))[static_cast<std::size_t>(i)];
        const bool ok = options.strict_external ? wi < -tol : wi <= tol;
        if (!ok) return DominanceRejection{DominanceViolation::kExternalWeight, {}, i, wi};
    }
    return cert;
}

// Cliques --------------------------------------------------------------------

bool is_clique(const AffinityMatrix& a, const VertexSet& s) {
    for (std::size_t x = 0; x < s.size(); ++x)
        for (std::size_t y = x + 1; y < s.size(); ++y)
            if (!(a(s[x], s[y]) > 0.0)) return false;
    return true;
}

std::vector<VertexSet> enumerate_maximal_cliques(const AffinityMatrix& a, int max_vertices) {
    const int n = a.size();
    if (n > max_vertices || n > 64) {
        throw OracleSizeError("clique enumeration capped at " + std::to_string(std::min(max_vertices, 64)) +
                              " vertices, graph has " + std::to_string(n));
    }
    std::vector<std::uint64_t> nbr(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && a(i, j) > 0.0) nbr[static_cast<std::size_t>(i)] |= std::uint64_t{1} << j;

    std::vector<VertexSet> cliques;
    std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)> expand =
        [&](std::uint64_t r, std::uint64_t p, std::uint64_t x) {
            if (p == 0) {
                if (x == 0) cliques.push_back(VertexSet::from_mask(r));
                return;
            }
            // Pivot maximizing |P ∩ N(u)| over P ∪ X.
            int pivot = -1;
            int best = -1;
            for (std::uint64_t ux = p | x; ux != 0; ux &= ux - 1) {
                const int u = std::countr_zero(ux);
                const int c = std::popcount(p & nbr[static_cast<std::size_t>(u)]);
                if (c > best) {
                    best = c;
                    pivot = u;
                }
            }
            for (std::uint64_t cand = p & ~nbr[static_cast<std::size_t>(pivot)]; cand != 0; cand &= cand - 1) {
                const int v = std::countr_zero(cand);
                const std::uint64_t bit = std::uint64_t{1} << v;
                const std::uint64_t nv = nbr[static_cast<std::size_t>(v)];
                expand(r | bit, p & nv, x & nv);
                p &= ~bit;
                x |= bit;
            }
        };
    const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    if (n > 0) expand(0, all, 0);
    std::sort(cliques.begin(), cliques.end());
    return cliques;
}

} // namespace cds
