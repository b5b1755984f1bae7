#include "pim/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "pim/errors.hpp"

namespace pim {

NeighborIndex::NeighborIndex(const Eigen::MatrixXd& points) : pts_(points) {
    if (pts_.rows() == 0) {
        throw ParameterError("NeighborIndex: empty point set");
    }
    order_.resize(static_cast<size_t>(pts_.rows()));
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(static_cast<size_t>(2 * pts_.rows() / kLeafSize + 8));
    root_ = build(0, static_cast<int>(pts_.rows()));
}

int NeighborIndex::build(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= kLeafSize) {
        return id;
    }
    // split along the axis of maximal spread
    const int d = static_cast<int>(pts_.cols());
    int axis = 0;
    double best_spread = -1.0;
    for (int a = 0; a < d; ++a) {
        double lo = pts_(order_[begin], a), hi = lo;
        for (int i = begin + 1; i < end; ++i) {
            const double v = pts_(order_[i], a);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            axis = a;
        }
    }
    if (best_spread <= 0.0) {
        return id;  // all points coincide, keep as a (large) leaf
    }
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return pts_(a, axis) < pts_(b, axis); });
    nodes_[id].axis = axis;
    nodes_[id].split = pts_(order_[mid], axis);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

std::vector<int> NeighborIndex::radius_query(const Eigen::Ref<const Eigen::VectorXd>& x,
                                             double radius) const {
    if (radius < 0.0) {
        throw ParameterError("radius_query: negative radius");
    }
    const double r2 = radius * radius;
    std::vector<int> out;
    std::vector<int> stack = {root_};
    while (!stack.empty()) {
        const Node& nd = nodes_[static_cast<size_t>(stack.back())];
        stack.pop_back();
        if (nd.axis < 0) {
            for (int i = nd.begin; i < nd.end; ++i) {
                const int idx = order_[static_cast<size_t>(i)];
                if ((pts_.row(idx).transpose() - x).squaredNorm() <= r2) {
                    out.push_back(idx);
                }
            }
            continue;
        }
        const double dx = x[nd.axis] - nd.split;
        if (dx - radius <= 0.0) stack.push_back(nd.left);
        if (dx + radius >= 0.0) stack.push_back(nd.right);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> NeighborIndex::nearest(const Eigen::Ref<const Eigen::VectorXd>& x,
                                        int k) const {
    k = std::min(k, size());
    if (k <= 0) return {};
    using Entry = std::pair<double, int>;  // (dist^2, index)
    std::priority_queue<Entry> heap;       // max-heap on distance

    struct Frame { int node; double dist; };
    std::vector<Frame> stack = {{root_, 0.0}};
    while (!stack.empty()) {
        const Frame fr = stack.back();
        stack.pop_back();
        if (static_cast<int>(heap.size()) == k && fr.dist * fr.dist > heap.top().first) {
            continue;
        }
        const Node& nd = nodes_[static_cast<size_t>(fr.node)];
        if (nd.axis < 0) {
            for (int i = nd.begin; i < nd.end; ++i) {
                const int idx = order_[static_cast<size_t>(i)];
                const double d2 = (pts_.row(idx).transpose() - x).squaredNorm();
                if (static_cast<int>(heap.size()) < k) {
                    heap.emplace(d2, idx);
                } else if (d2 < heap.top().first ||
                           (d2 == heap.top().first && idx < heap.top().second)) {
                    heap.pop();
                    heap.emplace(d2, idx);
                }
            }
            continue;
        }
        const double dx = x[nd.axis] - nd.split;
        const int near = dx <= 0.0 ? nd.left : nd.right;
        const int far = dx <= 0.0 ? nd.right : nd.left;
        stack.push_back({far, std::abs(dx)});
        stack.push_back({near, 0.0});
    }
    std::vector<Entry> entries;
    entries.reserve(heap.size());
    while (!heap.empty()) {
        entries.push_back(heap.top());
        heap.pop();
    }
    std::sort(entries.begin(), entries.end());
    std::vector<int> out;
    out.reserve(entries.size());
    for (const auto& [d2, idx] : entries) out.push_back(idx);
    return out;
}

double NeighborIndex::nearest_distance(const Eigen::Ref<const Eigen::VectorXd>& x,
                                       int skip) const {
    double best = std::numeric_limits<double>::infinity();
    struct Frame { int node; double dist; };
    std::vector<Frame> stack = {{root_, 0.0}};
    while (!stack.empty()) {
        const Frame fr = stack.back();
        stack.pop_back();
        if (fr.dist * fr.dist >= best) continue;
        const Node& nd = nodes_[static_cast<size_t>(fr.node)];
        if (nd.axis < 0) {
            for (int i = nd.begin; i < nd.end; ++i) {
                const int idx = order_[static_cast<size_t>(i)];
                if (idx == skip) continue;
                best = std::min(best, (pts_.row(idx).transpose() - x).squaredNorm());
            }
            continue;
        }
        const double dx = x[nd.axis] - nd.split;
        const int near = dx <= 0.0 ? nd.left : nd.right;
        const int far = dx <= 0.0 ? nd.right : nd.left;
        stack.push_back({far, std::abs(dx)});
        stack.push_back({near, 0.0});
    }
    return std::sqrt(best);
}

} // namespace pim
