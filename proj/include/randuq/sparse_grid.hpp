#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace randuq {

/// Admissibility families for the multi-index set. SM and TP use the doubling
/// point growth 1, 3, 5, 9, ...; TD and HC grow linearly.
enum class GridFamily { SM, TD, HC, TP };

GridFamily grid_family_from_string(const std::string& name);
const char* grid_family_name(GridFamily family);

/// Points per level: m(1) = 1 and m(i) = 2^{i-1} + 1 for the doubling rule.
int growth_points(GridFamily family, int level);

/// Chebyshev-extrema abscissas for an m-point rule on [-1,1], ascending, with
/// the endpoints and center exact and the set exactly symmetric.
std::vector<double> chebyshev_extrema(int point_count);

/// Interpolatory weights (integral of each Lagrange basis polynomial) for the
/// uniform density 1/2 on [-1,1]; they sum to one.
std::vector<double> chebyshev_weights(int point_count);

/// Doubling-rule nodes and weights by level.
std::vector<double> cc_nodes_1d(int level);
std::vector<double> cc_weights_1d(int level);

using MultiIndex = std::vector<int>;

/// All multi-indices admissible at the given level, sorted lexicographically.
std::vector<MultiIndex> admissible_indices(int dim, int level, GridFamily family);

/// Telescoping coefficients c_i = sum_{e in {0,1}^d, i+e in set} (-1)^{|e|}.
/// The set must be downward closed.
std::vector<int> combination_coefficients(const std::vector<MultiIndex>& index_set);

/// Per-dimension node identity: the reduced fraction p/q of y = -cos(pi p/q),
/// packed as (q << 32) | p. Nodes are equal iff their keys are equal; no
/// floating-point comparison is involved.
std::uint64_t fraction_key(int position, int point_count);
double key_coordinate(std::uint64_t key);

using NodeKey = std::vector<std::uint64_t>;

/// Canonical text form "p/q;p/q;..." with trailing center entries stripped;
/// the all-center key prints as ".".
std::string key_to_string(const NodeKey& key);

/// Orders keys by coordinate without touching floating point: per dimension
/// the fractions p/q are compared exactly, lexicographically across dimensions.
struct NodeKeyLess {
    bool operator()(const NodeKey& a, const NodeKey& b) const;
};

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    double clamp_magnitude = 0.0; ///< |negative variance| removed by clamping
    bool clamped = false;
};

/// Isotropic sparse quadrature/interpolation rule on [-1,1]^d built by the
/// combination technique over a downward-closed index set. Nodes are stored
/// in canonical key order, which fixes every reduction order downstream.
class SparseGridRule {
public:
    static SparseGridRule build(int dim, int level, GridFamily family = GridFamily::SM);

    int dimension() const { return dim_; }
    int level() const { return level_; }
    GridFamily family() const { return family_; }
    std::size_t size() const { return nodes_.size(); }

    const std::vector<NodeKey>& node_keys() const { return keys_; }
    const std::vector<std::vector<double>>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<std::pair<MultiIndex, int>>& combination() const { return combination_; }

    int node_index(const NodeKey& key) const;

    /// Combination-technique interpolant at an arbitrary point of the cube.
    double interpolate(std::span<const double> values, std::span<const double> point) const;

    /// Integral of the interpolant under the uniform product density.
    double quadrature(std::span<const double> values) const;

    /// Mean and variance estimators; an optional positive per-node density
    /// ratio reweights toward a non-uniform target density.
    Moments moments(std::span<const double> values,
                    std::span<const double> density_ratio = {}) const;

    /// Plain-text table "node_key, y_1..y_d, weight".
    void dump(std::ostream& out) const;

private:
    int dim_ = 0;
    int level_ = 0;
    GridFamily family_ = GridFamily::SM;
    std::vector<std::pair<MultiIndex, int>> combination_;
    std::vector<NodeKey> keys_;
    std::vector<std::vector<double>> nodes_;
    std::vector<double> weights_;
    std::map<NodeKey, int, NodeKeyLess> index_of_;
};

} // namespace randuq
