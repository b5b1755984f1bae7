#include "pim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pim/errors.hpp"

namespace pim {

namespace {

// Sutherland-Hodgman clip of a convex polygon by the half-plane
// { x : x . normal <= offset }.
std::vector<Eigen::Vector2d> clip_halfplane(const std::vector<Eigen::Vector2d>& poly,
                                            const Eigen::Vector2d& normal, double offset) {
    std::vector<Eigen::Vector2d> out;
    const size_t m = poly.size();
    out.reserve(m + 2);
    for (size_t a = 0; a < m; ++a) {
        const Eigen::Vector2d& p0 = poly[a];
        const Eigen::Vector2d& p1 = poly[(a + 1) % m];
        const double d0 = p0.dot(normal) - offset;
        const double d1 = p1.dot(normal) - offset;
        if (d0 <= 0.0) out.push_back(p0);
        if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) {
            out.push_back(p0 + (p1 - p0) * (d0 / (d0 - d1)));
        }
    }
    return out;
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
    if (poly.size() < 3) return 0.0;
    double acc = 0.0;
    for (size_t a = 0; a < poly.size(); ++a) {
        const Eigen::Vector2d& p = poly[a];
        const Eigen::Vector2d& q = poly[(a + 1) % poly.size()];
        acc += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * std::abs(acc);
}

// Area of the origin's Voronoi cell among {0} + neighbors, clipped to the
// neighborhood bounding circle (as a 32-gon) and optionally by the
// half-plane through the origin with the given outward normal.
double origin_cell_area(const std::vector<Eigen::Vector2d>& neighbors,
                        const Eigen::Vector2d* outward) {
    double rclip = 0.0;
    Eigen::Vector2d anchor = Eigen::Vector2d::UnitX();
    for (const auto& q : neighbors) {
        if (q.norm() > rclip) {
            rclip = q.norm();
            anchor = q;
        }
    }
    if (rclip <= 0.0) return 0.0;
    // anchor the polygon to the farthest neighbor so the clip region follows
    // rigid motions of the cloud instead of the arbitrary frame orientation
    constexpr int kSides = 32;
    const double phase = std::atan2(anchor.y(), anchor.x());
    std::vector<Eigen::Vector2d> poly;
    poly.reserve(kSides);
    for (int i = 0; i < kSides; ++i) {
        const double th = phase + 2.0 * std::numbers::pi * i / kSides;
        poly.emplace_back(rclip * std::cos(th), rclip * std::sin(th));
    }
    for (const auto& q : neighbors) {
        const double len = q.norm();
        if (len <= 0.0) continue;  // coincident projection, no bisector
        poly = clip_halfplane(poly, q / len, 0.5 * len);
        if (poly.size() < 3) return 0.0;
    }
    if (outward != nullptr) {
        poly = clip_halfplane(poly, *outward, 0.0);
    }
    return polygon_area(poly);
}

} // namespace

TangentFrame estimate_tangent_frame(const PointCloud& cloud, const NeighborIndex& index,
                                    int i, int m_neighbors) {
    const int n = cloud.size();
    const int k = cloud.intrinsic_dim;
    const int d = cloud.ambient_dim();
    if (i < 0 || i >= n) throw ParameterError("estimate_tangent_frame: bad index");
    if (m_neighbors < k + 1 || m_neighbors > n - 1) {
        throw ParameterError("estimate_tangent_frame: need k+1 <= m_neighbors <= n-1");
    }
    const auto ids = index.nearest(cloud.coords.row(i).transpose(), m_neighbors + 1);
    Eigen::MatrixXd nb(static_cast<int>(ids.size()), d);
    for (size_t a = 0; a < ids.size(); ++a) {
        nb.row(static_cast<int>(a)) = cloud.coords.row(ids[a]);
    }
    const Eigen::RowVectorXd mean = nb.colwise().mean();
    nb.rowwise() -= mean;
    const Eigen::MatrixXd cov = nb.transpose() * nb;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) {
        throw GeometryError("estimate_tangent_frame: eigen decomposition failed");
    }
    // eigenvalues ascending; tangent directions are the k largest
    const Eigen::VectorXd evals = es.eigenvalues();
    const double lead = evals[d - 1];
    if (!(lead > 0.0) || evals[d - k] < 1e-10 * lead) {
        throw GeometryError("estimate_tangent_frame: rank-deficient neighborhood");
    }
    TangentFrame frame;
    frame.origin = i;
    frame.basis.resize(k, d);
    for (int a = 0; a < k; ++a) {
        frame.basis.row(a) = es.eigenvectors().col(d - 1 - a).transpose();
    }
    return frame;
}

void voronoi_volume_weights(PointCloud& cloud, const NeighborIndex& index, int m_neighbors) {
    cloud.validate();
    const int n = cloud.size();
    const int k = cloud.intrinsic_dim;
    if (k != 1 && k != 2) {
        throw ParameterError("voronoi_volume_weights: only k = 1 or 2 supported");
    }
    if (k == 2 && n < 4) {
        throw ParameterError("voronoi_volume_weights: need at least 4 points");
    }
    m_neighbors = std::min(m_neighbors, n - 1);
    Eigen::VectorXd weights(n);
    for (int i = 0; i < n; ++i) {
        const TangentFrame frame = estimate_tangent_frame(cloud, index, i, m_neighbors);
        const Eigen::VectorXd origin = cloud.coords.row(i).transpose();
        // expand the k-nearest set to a radius ball with a tiny margin so
        // exactly equidistant neighbors are all included; keeps the cells
        // rigid-motion invariant on symmetric clouds
        const auto knn = index.nearest(origin, m_neighbors + 1);
        double rmax = 0.0;
        for (int id : knn) {
            rmax = std::max(rmax, (cloud.coords.row(id).transpose() - origin).norm());
        }
        const auto ids = index.radius_query(origin, rmax * (1.0 + 1e-9));
        if (k == 2) {
            std::vector<Eigen::Vector2d> proj;
            Eigen::Vector2d inward = Eigen::Vector2d::Zero();
            proj.reserve(ids.size());
            for (int id : ids) {
                if (id == i) continue;
                const Eigen::Vector2d q =
                    frame.basis * (cloud.coords.row(id).transpose() - origin);
                proj.push_back(q);
                inward += q;
            }
            const Eigen::Vector2d* outward_ptr = nullptr;
            Eigen::Vector2d outward;
            if (cloud.is_boundary(i) && inward.norm() > 0.0) {
                outward = -inward.normalized();
                outward_ptr = &outward;
            }
            const double area = origin_cell_area(proj, outward_ptr);
            if (!(area > 0.0)) {
                throw GeometryError("voronoi_volume_weights: empty cell at point " +
                                    std::to_string(i));
            }
            weights[i] = area;
        } else {
            // k = 1: half-gaps to the nearest projected neighbor on each side
            double left = std::numeric_limits<double>::infinity();
            double right = std::numeric_limits<double>::infinity();
            for (int id : ids) {
                if (id == i) continue;
                const double s =
                    (frame.basis * (cloud.coords.row(id).transpose() - origin))(0);
                if (s < 0.0) left = std::min(left, -s);
                if (s > 0.0) right = std::min(right, s);
            }
            double w = 0.0;
            if (std::isfinite(left)) w += 0.5 * left;
            if (std::isfinite(right)) w += 0.5 * right;
            if (!(w > 0.0)) {
                throw GeometryError("voronoi_volume_weights: degenerate 1D cell at point " +
                                    std::to_string(i));
            }
            weights[i] = w;
        }
    }
    cloud.volume_weight = std::move(weights);
}

void boundary_measure_weights(PointCloud& cloud) {
    cloud.validate();
    std::vector<int> bids;
    for (int i = 0; i < cloud.size(); ++i) {
        if (cloud.is_boundary(i)) bids.push_back(i);
    }
    const int nb = static_cast<int>(bids.size());
    if (nb < 2) {
        throw GeometryError("boundary_measure_weights: need at least 2 boundary points");
    }
    // order along the closed curve by nearest-neighbor chaining
    std::vector<int> order;
    std::vector<char> used(static_cast<size_t>(nb), 0);
    order.reserve(static_cast<size_t>(nb));
    order.push_back(0);
    used[0] = 1;
    for (int step = 1; step < nb; ++step) {
        const int cur = order.back();
        const Eigen::VectorXd p = cloud.coords.row(bids[static_cast<size_t>(cur)]).transpose();
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int a = 0; a < nb; ++a) {
            if (used[static_cast<size_t>(a)]) continue;
            const double d2 =
                (cloud.coords.row(bids[static_cast<size_t>(a)]).transpose() - p).squaredNorm();
            if (d2 < best_d) {
                best_d = d2;
                best = a;
            }
        }
        order.push_back(best);
        used[static_cast<size_t>(best)] = 1;
    }
    Eigen::VectorXd sw = Eigen::VectorXd::Zero(cloud.size());
    for (int a = 0; a < nb; ++a) {
        const int i = bids[static_cast<size_t>(order[static_cast<size_t>(a)])];
        const int prev = bids[static_cast<size_t>(order[static_cast<size_t>((a + nb - 1) % nb)])];
        const int next = bids[static_cast<size_t>(order[static_cast<size_t>((a + 1) % nb)])];
        const double chord_prev = (cloud.coords.row(i) - cloud.coords.row(prev)).norm();
        const double chord_next = (cloud.coords.row(i) - cloud.coords.row(next)).norm();
        sw[i] = 0.5 * (chord_prev + chord_next);
    }
    cloud.boundary_weight = std::move(sw);
}

} // namespace pim
