#pragma once

#include <Eigen/Dense>

#include "pim/neighbor_index.hpp"
#include "pim/point_cloud.hpp"

namespace pim {

/// Orthonormal basis of the estimated tangent space at one sample.
struct TangentFrame {
    int origin = -1;
    Eigen::MatrixXd basis;  // k x d, rows orthonormal
};

/// Top-k principal directions of the centered m_neighbors nearest neighbors.
/// Throws GeometryError when the neighborhood is rank-deficient.
TangentFrame estimate_tangent_frame(const PointCloud& cloud, const NeighborIndex& index,
                                    int i, int m_neighbors);

/// Per-point volume weights V_i: each point's Voronoi cell in its local
/// tangent plane, clipped to the neighborhood bounding circle, and for
/// boundary points additionally by the tangent line of the boundary.
/// Supports k = 2 (cells are polygon areas) and k = 1 (segment midpoints).
/// All resulting weights are strictly positive.
void voronoi_volume_weights(PointCloud& cloud, const NeighborIndex& index,
                            int m_neighbors = 16);

/// Boundary measure weights S_i: half the summed chord lengths to the two
/// neighbors along the closed boundary curve ordering (k = 2). Requires at
/// least 2 boundary-flagged points.
void boundary_measure_weights(PointCloud& cloud);

} // namespace pim
