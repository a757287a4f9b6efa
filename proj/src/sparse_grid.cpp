#include "randuq/sparse_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace randuq {

GridFamily grid_family_from_string(const std::string& name) {
    if (name == "SM") return GridFamily::SM;
    if (name == "TD") return GridFamily::TD;
    if (name == "HC") return GridFamily::HC;
    if (name == "TP") return GridFamily::TP;
    throw std::invalid_argument("unknown grid family: " + name);
}

const char* grid_family_name(GridFamily family) {
    switch (family) {
        case GridFamily::SM: return "SM";
        case GridFamily::TD: return "TD";
        case GridFamily::HC: return "HC";
        case GridFamily::TP: return "TP";
    }
    return "?";
}

int growth_points(GridFamily family, int level) {
    if (level < 1) throw std::invalid_argument("level must be at least 1");
    if (family == GridFamily::SM || family == GridFamily::TP)
        return level == 1 ? 1 : (1 << (level - 1)) + 1;
    return level;
}

std::vector<double> chebyshev_extrema(int point_count) {
    if (point_count < 1) throw std::invalid_argument("point count must be positive");
    if (point_count == 1) return {0.0};
    const int n = point_count - 1;
    std::vector<double> x(static_cast<std::size_t>(point_count));
    for (int j = 0; j <= n / 2; ++j) {
        const double v = j == 0 ? -1.0 : -std::cos(std::numbers::pi * j / n);
        x[static_cast<std::size_t>(j)] = v;
        x[static_cast<std::size_t>(n - j)] = -v;
    }
    if (n % 2 == 0) x[static_cast<std::size_t>(n / 2)] = 0.0;
    return x;
}

std::vector<double> chebyshev_weights(int point_count) {
    if (point_count < 1) throw std::invalid_argument("point count must be positive");
    if (point_count == 1) return {1.0};
    const int n = point_count - 1;
    std::vector<double> w(static_cast<std::size_t>(point_count));
    for (int j = 0; j <= n / 2; ++j) {
        const double theta = std::numbers::pi * j / n;
        double sum = 1.0;
        for (int k = 1; k <= n / 2; ++k) {
            const double b = (2 * k == n) ? 1.0 : 2.0;
            sum -= b * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
        }
        const double c = (j == 0 || j == n) ? 1.0 : 2.0;
        // density 1/2 halves the classical weight
        const double v = 0.5 * c * sum / n;
        w[static_cast<std::size_t>(j)] = v;
        w[static_cast<std::size_t>(n - j)] = v;
    }
    return w;
}

std::vector<double> cc_nodes_1d(int level) {
    return chebyshev_extrema(growth_points(GridFamily::SM, level));
}

std::vector<double> cc_weights_1d(int level) {
    return chebyshev_weights(growth_points(GridFamily::SM, level));
}

namespace {

bool family_admits(GridFamily family, const MultiIndex& idx, int level) {
    switch (family) {
        case GridFamily::SM:
        case GridFamily::TD: {
            long s = 0;
            for (int i : idx) s += i - 1;
            return s <= level;
        }
        case GridFamily::TP: {
            int m = 0;
            for (int i : idx) m = std::max(m, i - 1);
            return m <= level;
        }
        case GridFamily::HC: {
            long p = 1;
            for (int i : idx) {
                p *= i;
                if (p > level + 1) return false;
            }
            return p <= level + 1;
        }
    }
    return false;
}

void enumerate(int dim, int level, GridFamily family, MultiIndex& current,
               std::vector<MultiIndex>& out) {
    if (static_cast<int>(current.size()) == dim) {
        out.push_back(current);
        return;
    }
    for (int i = 1; i <= level + 1; ++i) {
        current.push_back(i);
        if (family_admits(family, current, level))
            enumerate(dim, level, family, current, out);
        current.pop_back();
    }
}

} // namespace

std::vector<MultiIndex> admissible_indices(int dim, int level, GridFamily family) {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    if (level < 0) throw std::invalid_argument("level must be nonnegative");
    std::vector<MultiIndex> out;
    MultiIndex current;
    enumerate(dim, level, family, current, out);
    return out;
}

std::vector<int> combination_coefficients(const std::vector<MultiIndex>& index_set) {
    if (index_set.empty()) return {};
    const int dim = static_cast<int>(index_set.front().size());
    std::vector<MultiIndex> sorted = index_set;
    std::sort(sorted.begin(), sorted.end());

    const auto contains = [&sorted](const MultiIndex& idx) {
        return std::binary_search(sorted.begin(), sorted.end(), idx);
    };

    for (const MultiIndex& idx : index_set) {
        MultiIndex lower = idx;
        for (int d = 0; d < dim; ++d) {
            if (idx[static_cast<std::size_t>(d)] <= 1) continue;
            lower[static_cast<std::size_t>(d)] -= 1;
            if (!contains(lower))
                throw std::invalid_argument("index set is not downward closed");
            lower[static_cast<std::size_t>(d)] += 1;
        }
    }

    std::vector<int> coeffs(index_set.size(), 0);
    for (std::size_t k = 0; k < index_set.size(); ++k) {
        MultiIndex probe = index_set[k];
        int c = 0;
        for (unsigned mask = 0; mask < (1u << dim); ++mask) {
            int sign = 1;
            for (int d = 0; d < dim; ++d) {
                if (mask & (1u << d)) {
                    probe[static_cast<std::size_t>(d)] += 1;
                    sign = -sign;
                }
            }
            if (contains(probe)) c += sign;
            for (int d = 0; d < dim; ++d)
                if (mask & (1u << d)) probe[static_cast<std::size_t>(d)] -= 1;
        }
        coeffs[k] = c;
    }
    return coeffs;
}

std::uint64_t fraction_key(int position, int point_count) {
    if (point_count < 1 || position < 0 || position >= point_count)
        throw std::invalid_argument("node position out of range");
    std::uint64_t num, den;
    if (point_count == 1) {
        num = 1;
        den = 2;
    } else {
        num = static_cast<std::uint64_t>(position);
        den = static_cast<std::uint64_t>(point_count - 1);
        const std::uint64_t g = std::gcd(num == 0 ? den : num, den);
        num /= g;
        den /= g;
    }
    return (den << 32) | num;
}

double key_coordinate(std::uint64_t key) {
    const std::uint64_t num = key & 0xffffffffu;
    const std::uint64_t den = key >> 32;
    if (num == 0) return -1.0;
    if (num == den) return 1.0;
    if (2 * num == den) return 0.0;
    if (2 * num < den)
        return -std::cos(std::numbers::pi * static_cast<double>(num) / static_cast<double>(den));
    return std::cos(std::numbers::pi * static_cast<double>(den - num) / static_cast<double>(den));
}

bool NodeKeyLess::operator()(const NodeKey& a, const NodeKey& b) const {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t pa = a[i] & 0xffffffffu, qa = a[i] >> 32;
        const std::uint64_t pb = b[i] & 0xffffffffu, qb = b[i] >> 32;
        const std::uint64_t lhs = pa * qb, rhs = pb * qa;
        if (lhs != rhs) return lhs < rhs;
    }
    return a.size() < b.size();
}

std::string key_to_string(const NodeKey& key) {
    std::size_t len = key.size();
    const std::uint64_t center = fraction_key(0, 1);
    while (len > 0 && key[len - 1] == center) --len;
    if (len == 0) return ".";
    std::string out;
    for (std::size_t i = 0; i < len; ++i) {
        if (i) out += ';';
        out += std::to_string(key[i] & 0xffffffffu);
        out += '/';
        out += std::to_string(key[i] >> 32);
    }
    return out;
}

SparseGridRule SparseGridRule::build(int dim, int level, GridFamily family) {
    SparseGridRule rule;
    rule.dim_ = dim;
    rule.level_ = level;
    rule.family_ = family;

    const std::vector<MultiIndex> indices = admissible_indices(dim, level, family);
    const std::vector<int> coeffs = combination_coefficients(indices);

    std::map<NodeKey, double, NodeKeyLess> weight_of;
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (coeffs[k] == 0) continue;
        rule.combination_.emplace_back(indices[k], coeffs[k]);

        std::vector<std::vector<std::uint64_t>> dim_keys(static_cast<std::size_t>(dim));
        std::vector<std::vector<double>> dim_weights(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d) {
            const int m = growth_points(family, indices[k][static_cast<std::size_t>(d)]);
            dim_weights[static_cast<std::size_t>(d)] = chebyshev_weights(m);
            dim_keys[static_cast<std::size_t>(d)].resize(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j)
                dim_keys[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)] = fraction_key(j, m);
        }

        std::vector<int> pos(static_cast<std::size_t>(dim), 0);
        NodeKey key(static_cast<std::size_t>(dim));
        while (true) {
            double w = static_cast<double>(coeffs[k]);
            for (int d = 0; d < dim; ++d) {
                key[static_cast<std::size_t>(d)] =
                    dim_keys[static_cast<std::size_t>(d)][static_cast<std::size_t>(pos[static_cast<std::size_t>(d)])];
                w *= dim_weights[static_cast<std::size_t>(d)][static_cast<std::size_t>(pos[static_cast<std::size_t>(d)])];
            }
            weight_of[key] += w;

            int d = 0;
            while (d < dim) {
                if (++pos[static_cast<std::size_t>(d)] <
                    static_cast<int>(dim_keys[static_cast<std::size_t>(d)].size()))
                    break;
                pos[static_cast<std::size_t>(d)] = 0;
                ++d;
            }
            if (d == dim) break;
        }
    }

    rule.keys_.reserve(weight_of.size());
    rule.nodes_.reserve(weight_of.size());
    rule.weights_.reserve(weight_of.size());
    for (const auto& [key, w] : weight_of) {
        rule.index_of_.emplace(key, static_cast<int>(rule.keys_.size()));
        rule.keys_.push_back(key);
        std::vector<double> coords(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d)
            coords[static_cast<std::size_t>(d)] = key_coordinate(key[static_cast<std::size_t>(d)]);
        rule.nodes_.push_back(std::move(coords));
        rule.weights_.push_back(w);
    }
    return rule;
}

int SparseGridRule::node_index(const NodeKey& key) const {
    const auto it = index_of_.find(key);
    if (it == index_of_.end()) throw std::out_of_range("node key is not part of the rule");
    return it->second;
}

double SparseGridRule::interpolate(std::span<const double> values,
                                   std::span<const double> point) const {
    if (values.size() != nodes_.size())
        throw std::invalid_argument("one value per grid node is required");
    if (static_cast<int>(point.size()) != dim_)
        throw std::invalid_argument("evaluation point dimension mismatch");

    double total = 0.0;
    for (const auto& [idx, coeff] : combination_) {
        std::vector<std::vector<double>> basis(static_cast<std::size_t>(dim_));
        std::vector<std::vector<std::uint64_t>> dim_keys(static_cast<std::size_t>(dim_));
        for (int d = 0; d < dim_; ++d) {
            const int m = growth_points(family_, idx[static_cast<std::size_t>(d)]);
            const std::vector<double> x = chebyshev_extrema(m);
            std::vector<double> l(static_cast<std::size_t>(m));
            for (int k = 0; k < m; ++k) {
                double prod = 1.0;
                for (int j = 0; j < m; ++j) {
                    if (j == k) continue;
                    prod *= (point[static_cast<std::size_t>(d)] - x[static_cast<std::size_t>(j)]) /
                            (x[static_cast<std::size_t>(k)] - x[static_cast<std::size_t>(j)]);
                }
                l[static_cast<std::size_t>(k)] = prod;
            }
            basis[static_cast<std::size_t>(d)] = std::move(l);
            dim_keys[static_cast<std::size_t>(d)].resize(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j)
                dim_keys[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)] = fraction_key(j, m);
        }

        double tensor = 0.0;
        std::vector<int> pos(static_cast<std::size_t>(dim_), 0);
        NodeKey key(static_cast<std::size_t>(dim_));
        while (true) {
            double prod = 1.0;
            for (int d = 0; d < dim_; ++d) {
                prod *= basis[static_cast<std::size_t>(d)][static_cast<std::size_t>(pos[static_cast<std::size_t>(d)])];
                key[static_cast<std::size_t>(d)] =
                    dim_keys[static_cast<std::size_t>(d)][static_cast<std::size_t>(pos[static_cast<std::size_t>(d)])];
            }
            tensor += prod * values[static_cast<std::size_t>(node_index(key))];

            int d = 0;
            while (d < dim_) {
                if (++pos[static_cast<std::size_t>(d)] <
                    static_cast<int>(basis[static_cast<std::size_t>(d)].size()))
                    break;
                pos[static_cast<std::size_t>(d)] = 0;
                ++d;
            }
            if (d == dim_) break;
        }
        total += coeff * tensor;
    }
    return total;
}

double SparseGridRule::quadrature(std::span<const double> values) const {
    if (values.size() != nodes_.size())
        throw std::invalid_argument("one value per grid node is required");
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += weights_[i] * values[i];
    return s;
}

Moments SparseGridRule::moments(std::span<const double> values,
                                std::span<const double> density_ratio) const {
    if (values.size() != nodes_.size())
        throw std::invalid_argument("one value per grid node is required");
    if (!density_ratio.empty() && density_ratio.size() != nodes_.size())
        throw std::invalid_argument("one density ratio per grid node is required");

    double mean = 0.0;
    double second = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double r = 1.0;
        if (!density_ratio.empty()) {
            r = density_ratio[i];
            if (!(r > 0.0)) throw std::invalid_argument("density ratio must be positive");
        }
        mean += weights_[i] * r * values[i];
        second += weights_[i] * r * values[i] * values[i];
    }

    Moments m;
    m.mean = mean;
    m.variance = second - mean * mean;
    if (m.variance < 0.0) {
        m.clamp_magnitude = -m.variance;
        m.clamped = m.clamp_magnitude > 1e-10;
        m.variance = 0.0;
    }
    return m;
}

void SparseGridRule::dump(std::ostream& out) const {
    char buf[32];
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        out << key_to_string(keys_[i]);
        for (double c : nodes_[i]) {
            std::snprintf(buf, sizeof buf, "%.16e", c);
            out << ", " << buf;
        }
        std::snprintf(buf, sizeof buf, "%.16e", weights_[i]);
        out << ", " << buf << '\n';
    }
}

} // namespace randuq
