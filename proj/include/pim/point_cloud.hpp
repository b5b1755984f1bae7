#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace pim {

/// Point samples of a k-manifold embedded in R^d, with optional quadrature
/// weights. Immutable by convention once the weights are filled in.
struct PointCloud {
    Eigen::MatrixXd coords;           // n x d
    int intrinsic_dim = 2;            // k
    std::vector<char> boundary_flag;  // n entries, nonzero = boundary sample
    Eigen::VectorXd volume_weight;    // V_i, size 0 until computed
    Eigen::VectorXd boundary_weight;  // S_i, size 0 until computed; meaningful where flagged

    int size() const { return static_cast<int>(coords.rows()); }
    int ambient_dim() const { return static_cast<int>(coords.cols()); }
    bool has_volume_weights() const { return volume_weight.size() == size(); }
    bool has_boundary_weights() const { return boundary_weight.size() == size(); }
    bool is_boundary(int i) const { return boundary_flag[static_cast<size_t>(i)] != 0; }

    int boundary_count() const;

    /// Throws ParameterError on NaN/Inf coordinates, bad dimensions or
    /// negative weights.
    void validate() const;
};

enum class CloudFormat { xyzb, csv };

/// Fill distance h (max nearest-distinct-neighbor distance) and minimal
/// point spacing.
struct SamplingStats {
    double fill_distance = 0.0;
    double min_spacing = 0.0;
};

PointCloud load_cloud(const std::string& path, CloudFormat format);
void save_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format);

/// Deterministic quasi-uniform sampling of the closed unit disk (k = d = 2).
/// Interior points on a jittered equal-area polar grid, boundary circle
/// sampled at matching spacing and flagged. Total count lands within 5% of
/// n_target. Requires n_target >= 16.
PointCloud sample_unit_disk(int n_target, std::uint64_t seed);

class NeighborIndex;

/// Requires n >= 2 and at least two distinct points.
SamplingStats estimate_fill_distance(const PointCloud& cloud, const NeighborIndex& index);

} // namespace pim
