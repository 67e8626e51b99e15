#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

namespace oogplan {

// Static 3-d tree over a point set. Nodes are stored implicitly: the index
// range [lo, hi) is split at its median along the widest axis, the median
// point acts as the node. Queries are exact.
class KdTree3 {
public:
    using Vec3 = Eigen::Vector3d;

    explicit KdTree3(const std::vector<Vec3>& points) : pts_(points) {
        idx_.resize(pts_.size());
        for (int i = 0; i < static_cast<int>(idx_.size()); ++i) idx_[i] = i;
        axis_.assign(pts_.size(), 0);
        if (!pts_.empty()) build(0, static_cast<int>(pts_.size()));
    }

    std::size_t size() const { return pts_.size(); }

    // Index of the nearest point to q; squared distance in dist2 if given.
    int nearest(const Vec3& q, double* dist2 = nullptr) const {
        int best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        nearest_rec(0, static_cast<int>(pts_.size()), q, best, best_d2);
        if (dist2) *dist2 = best_d2;
        return best;
    }

    // k nearest neighbors, ascending by distance. Ties break toward the
    // lower point index so results do not depend on traversal order.
    std::vector<int> knn(const Vec3& q, int k) const {
        std::vector<std::pair<double, int>> heap; // max-heap on (d2, idx)
        heap.reserve(static_cast<std::size_t>(k) + 1);
        knn_rec(0, static_cast<int>(pts_.size()), q, k, heap);
        std::sort(heap.begin(), heap.end());
        std::vector<int> out(heap.size());
        for (std::size_t i = 0; i < heap.size(); ++i) out[i] = heap[i].second;
        return out;
    }

    std::vector<int> radius(const Vec3& q, double r) const {
        std::vector<int> out;
        radius_rec(0, static_cast<int>(pts_.size()), q, r * r, out);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    void build(int lo, int hi) {
        if (hi - lo <= 1) return;
        Vec3 mn = pts_[idx_[lo]], mx = mn;
        for (int i = lo + 1; i < hi; ++i) {
            mn = mn.cwiseMin(pts_[idx_[i]]);
            mx = mx.cwiseMax(pts_[idx_[i]]);
        }
        int axis = 0;
        (mx - mn).maxCoeff(&axis);
        const int mid = lo + (hi - lo) / 2;
        std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                         [&](int a, int b) {
                             const double pa = pts_[a][axis], pb = pts_[b][axis];
                             return pa < pb || (pa == pb && a < b);
                         });
        axis_[mid] = static_cast<char>(axis);
        build(lo, mid);
        build(mid + 1, hi);
    }

    void nearest_rec(int lo, int hi, const Vec3& q, int& best, double& best_d2) const {
        if (lo >= hi) return;
        const int mid = lo + (hi - lo) / 2;
        const int p = idx_[mid];
        const double d2 = (pts_[p] - q).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && p < best)) {
            best_d2 = d2;
            best = p;
        }
        if (hi - lo == 1) return;
        const int axis = axis_[mid];
        const double delta = q[axis] - pts_[p][axis];
        const bool left_first = delta < 0.0;
        if (left_first) {
            nearest_rec(lo, mid, q, best, best_d2);
            if (delta * delta <= best_d2) nearest_rec(mid + 1, hi, q, best, best_d2);
        } else {
            nearest_rec(mid + 1, hi, q, best, best_d2);
            if (delta * delta <= best_d2) nearest_rec(lo, mid, q, best, best_d2);
        }
    }

    void knn_rec(int lo, int hi, const Vec3& q, int k,
                 std::vector<std::pair<double, int>>& heap) const {
        if (lo >= hi) return;
        const int mid = lo + (hi - lo) / 2;
        const int p = idx_[mid];
        const double d2 = (pts_[p] - q).squaredNorm();
        const std::pair<double, int> cand{d2, p};
        if (static_cast<int>(heap.size()) < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end());
        }
        if (hi - lo == 1) return;
        const int axis = axis_[mid];
        const double delta = q[axis] - pts_[p][axis];
        const auto worst = [&] {
            return static_cast<int>(heap.size()) < k ? std::numeric_limits<double>::infinity()
                                                     : heap.front().first;
        };
        if (delta < 0.0) {
            knn_rec(lo, mid, q, k, heap);
            if (delta * delta <= worst()) knn_rec(mid + 1, hi, q, k, heap);
        } else {
            knn_rec(mid + 1, hi, q, k, heap);
            if (delta * delta <= worst()) knn_rec(lo, mid, q, k, heap);
        }
    }

    void radius_rec(int lo, int hi, const Vec3& q, double r2, std::vector<int>& out) const {
        if (lo >= hi) return;
        const int mid = lo + (hi - lo) / 2;
        const int p = idx_[mid];
        if ((pts_[p] - q).squaredNorm() <= r2) out.push_back(p);
        if (hi - lo == 1) return;
        const int axis = axis_[mid];
        const double delta = q[axis] - pts_[p][axis];
        if (delta < 0.0) {
            radius_rec(lo, mid, q, r2, out);
            if (delta * delta <= r2) radius_rec(mid + 1, hi, q, r2, out);
        } else {
            radius_rec(mid + 1, hi, q, r2, out);
            if (delta * delta <= r2) radius_rec(lo, mid, q, r2, out);
        }
    }

    std::vector<Vec3> pts_;
    std::vector<int> idx_;
    std::vector<char> axis_;
};

} // namespace oogplan
