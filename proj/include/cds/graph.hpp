#pragma once

// Weighted graphs, vertex sets and the exponential oracles of dominant-set
// theory (vertex weights, the dominant-set test, maximal cliques). The oracles
// are meant for small instances used to validate the continuous solvers.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace cds {

using Vertex = int;

/// Sorted set of vertex indices without duplicates.
class VertexSet {
public:
    VertexSet() = default;
    VertexSet(std::initializer_list<Vertex> members);
    /// Sorts `members`; throws InvalidArgument on duplicates or negatives.
    explicit VertexSet(std::vector<Vertex> members);

    static VertexSet range(int n);

    [[nodiscard]] bool contains(Vertex v) const;
    [[nodiscard]] std::size_t size() const { return members_.size(); }
    [[nodiscard]] bool empty() const { return members_.empty(); }
    [[nodiscard]] Vertex operator[](std::size_t k) const { return members_[k]; }
    [[nodiscard]] auto begin() const { return members_.begin(); }
    [[nodiscard]] auto end() const { return members_.end(); }
    [[nodiscard]] const std::vector<Vertex>& members() const { return members_; }

    /// Throws InvalidArgument unless every member is < n.
    void check_bounds(int n) const;

    [[nodiscard]] VertexSet with(Vertex v) const;
    [[nodiscard]] VertexSet without(Vertex v) const;

    /// Bit i set for each member i; members must be < 64.
    [[nodiscard]] std::uint64_t mask() const;
    static VertexSet from_mask(std::uint64_t mask);

    [[nodiscard]] std::string to_string(int offset = 0) const;

    friend bool operator==(const VertexSet&, const VertexSet&) = default;
    friend auto operator<=>(const VertexSet& a, const VertexSet& b) { return a.members_ <=> b.members_; }

private:
    std::vector<Vertex> members_;
};

VertexSet set_union(const VertexSet& a, const VertexSet& b);
VertexSet set_difference(const VertexSet& a, const VertexSet& b);
VertexSet set_intersection(const VertexSet& a, const VertexSet& b);

/// Symmetric nonnegative similarity matrix with zero diagonal.
class AffinityMatrix {
public:
    AffinityMatrix() = default;
    /// Edgeless graph on n vertices.
    explicit AffinityMatrix(int n);

    /// Validates symmetry, zero diagonal and nonnegativity. Entries that are
    /// asymmetric by at most `symmetry_tolerance` are averaged.
    static AffinityMatrix from_dense(Eigen::MatrixXd weights, double symmetry_tolerance = 0.0);
    static AffinityMatrix from_edges(int n, std::span<const std::pair<Vertex, Vertex>> edges, double weight = 1.0);

    [[nodiscard]] int size() const { return static_cast<int>(w_.rows()); }
    [[nodiscard]] double operator()(Vertex i, Vertex j) const { return w_(i, j); }
    [[nodiscard]] const Eigen::MatrixXd& dense() const { return w_; }

    /// Sets w(i,j) = w(j,i) = weight.
    void set_edge(Vertex i, Vertex j, double weight);

    /// Principal submatrix on `vertices`, in their order.
    [[nodiscard]] AffinityMatrix principal_submatrix(std::span<const Vertex> vertices) const;
    [[nodiscard]] AffinityMatrix principal_submatrix(const VertexSet& vertices) const {
        return principal_submatrix(std::span<const Vertex>(vertices.members()));
    }

    /// 0/1 adjacency with an edge wherever the weight is > 0.
    [[nodiscard]] AffinityMatrix binarized() const;
    [[nodiscard]] std::size_t edge_count() const;

private:
    Eigen::MatrixXd w_;
};

inline constexpr std::size_t kDefaultOracleCap = 15;
inline constexpr int kDefaultCliqueCap = 64;

/// phi_S(i, j) = a_ij - (1/|S|) sum_{k in S} a_ik, for i in S and j outside S.
double relative_similarity(const AffinityMatrix& a, const VertexSet& s, Vertex i, Vertex j);

/// Memoized evaluation of the recursive vertex weights w_S(i).
///
/// Subsets are keyed by bitmask, so the graph may have at most 64 vertices and
/// no evaluated set may exceed `max_set_size` members. One oracle can be
/// reused across many queries on the same graph.
class WeightOracle {
public:
    explicit WeightOracle(const AffinityMatrix& a, std::size_t max_set_size = kDefaultOracleCap);

    [[nodiscard]] double vertex_weight(const VertexSet& s, Vertex i);
    [[nodiscard]] double total_weight(const VertexSet& s);
    [[nodiscard]] std::size_t max_set_size() const { return cap_; }
    [[nodiscard]] const AffinityMatrix& graph() const { return *a_; }

    /// Weights of every member of `mask`, indexed by vertex (size n).
    const std::vector<double>& weights(std::uint64_t mask);

private:
    void check_size(std::size_t set_size) const;

    const AffinityMatrix* a_;
    std::size_t cap_;
    std::unordered_map<std::uint64_t, std::vector<double>> memo_;
};

double vertex_weight(const AffinityMatrix& a, const VertexSet& s, Vertex i,
                     std::size_t max_set_size = kDefaultOracleCap);
double total_weight(const AffinityMatrix& a, const VertexSet& s,
                    std::size_t max_set_size = kDefaultOracleCap);

struct DominanceOptions {
    std::size_t max_set_size = kDefaultOracleCap;
    /// |w| at or below this is treated as an exact zero.
    double zero_tolerance = 1e-12;
    /// External condition as w_{S+i}(i) < 0 (strict) or <= 0 (ties admitted).
    /// With ties admitted, dominant sets of a 0/1 graph are exactly its maximal
    /// cliques; the strict form yields only the strictly maximal ones.
    bool strict_external = false;
};

struct DominantSetCertificate {
    VertexSet set;
    std::vector<double> internal_weights; // aligned with set members
    double total_weight = 0.0;
};

enum class DominanceViolation {
    kSubsetWeight,   // W(T) <= 0 for some nonempty T within S
    kInternalWeight, // w_S(i) <= 0 for a member i
    kExternalWeight, // w_{S+i}(i) too large for an outside vertex i
};

struct DominanceRejection {
    DominanceViolation condition;
    VertexSet witness_set; // the offending T for kSubsetWeight
    Vertex witness = -1;   // offending vertex for the other two conditions
    double value = 0.0;

    [[nodiscard]] std::string describe() const;
};

using DominanceVerdict = std::variant<DominantSetCertificate, DominanceRejection>;

DominanceVerdict is_dominant_set(const AffinityMatrix& a, const VertexSet& s, const DominanceOptions& options = {});
/// Same test, sharing the memo of `oracle` across calls.
DominanceVerdict is_dominant_set(WeightOracle& oracle, const VertexSet& s, const DominanceOptions& options = {});

inline bool accepted(const DominanceVerdict& v) { return std::holds_alternative<DominantSetCertificate>(v); }

/// All maximal cliques of the graph thresholded at weight > 0, sorted
/// lexicographically. Bron-Kerbosch with pivoting over 64-bit masks.
std::vector<VertexSet> enumerate_maximal_cliques(const AffinityMatrix& a, int max_vertices = kDefaultCliqueCap);

/// True when every pair of members is joined by a positive weight.
bool is_clique(const AffinityMatrix& a, const VertexSet& s);

} // namespace cds
