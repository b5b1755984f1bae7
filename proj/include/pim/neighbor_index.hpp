#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pim {

/// kd-tree over a fixed point set. Supports exact fixed-radius queries and
/// k-nearest-neighbor queries. Immutable after construction, safe to share
/// across threads.
class NeighborIndex {
public:
    explicit NeighborIndex(const Eigen::MatrixXd& points);

    /// Indices of all points with |p_i - x| <= radius, ascending.
    std::vector<int> radius_query(const Eigen::Ref<const Eigen::VectorXd>& x,
                                  double radius) const;

    /// Indices of the k points closest to x, ordered by distance
    /// (ties broken by index). k is clamped to the point count.
    std::vector<int> nearest(const Eigen::Ref<const Eigen::VectorXd>& x, int k) const;

    /// Distance from x to the nearest point, optionally skipping one index.
    double nearest_distance(const Eigen::Ref<const Eigen::VectorXd>& x,
                            int skip = -1) const;

    int size() const { return static_cast<int>(pts_.rows()); }
    const Eigen::MatrixXd& points() const { return pts_; }

private:
    struct Node {
        int axis = -1;       // -1 marks a leaf
        double split = 0.0;
        int begin = 0, end = 0;
        int left = -1, right = -1;
    };

    int build(int begin, int end);

    Eigen::MatrixXd pts_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;

    static constexpr int kLeafSize = 16;
};

} // namespace pim
