#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "facecast/common.hpp"

namespace facecast {

/// 3-D point / vector, millimeters.
struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Point3() = default;
    Point3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Point3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Point3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Point3& operator+=(const Point3& o) {
        x += o.x; y += o.y; z += o.z;
        return *this;
    }
    Point3& operator-=(const Point3& o) {
        x -= o.x; y -= o.y; z -= o.z;
        return *this;
    }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    double dot(const Point3& o) const { return x * o.x + y * o.y + z * o.z; }
    Point3 cross(const Point3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Point3 operator*(double s, const Point3& p) { return p * s; }

/// Displacements share the representation of points; the alias marks intent.
using Vec3 = Point3;

inline double squared_distance(const Point3& a, const Point3& b) {
    return (a - b).squared_norm();
}
inline double distance(const Point3& a, const Point3& b) {
    return std::sqrt(squared_distance(a, b));
}

/// Ordered, index-addressable point list. Indices are the correspondence key
/// across the whole toolkit.
struct PointCloud {
    std::vector<Point3> points;

    PointCloud() = default;
    explicit PointCloud(std::vector<Point3> pts) : points(std::move(pts)) {}

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    Point3& operator[](std::size_t i) { return points[i]; }
    const Point3& operator[](std::size_t i) const { return points[i]; }

    bool all_finite() const {
        for (const auto& p : points)
            if (!p.finite()) return false;
        return true;
    }
};

/// Anatomical origin of a point. Stored as an enum; one_hot() gives the
/// 3-vector form used as a network input channel.
enum class SourceLabel : int { BonePre = 0, BonePost = 1, Face = 2 };

inline std::array<double, 3> one_hot(SourceLabel l) {
    std::array<double, 3> v{0.0, 0.0, 0.0};
    v[static_cast<int>(l)] = 1.0;
    return v;
}

/// Point cloud with a per-point source label.
struct LabeledCloud {
    PointCloud cloud;
    std::vector<SourceLabel> labels;

    LabeledCloud() = default;
    LabeledCloud(PointCloud c, SourceLabel uniform)
        : cloud(std::move(c)), labels(cloud.size(), uniform) {}
    LabeledCloud(PointCloud c, std::vector<SourceLabel> l)
        : cloud(std::move(c)), labels(std::move(l)) {
        if (labels.size() != cloud.size())
            throw InvalidParameter("LabeledCloud: label count != point count");
    }

    std::size_t size() const { return cloud.size(); }
};

/// Per-point displacement vectors in millimeters, aligned to an owner cloud
/// (or an explicit index list for sparse fields).
struct DisplacementField {
    std::vector<Vec3> v;

    DisplacementField() = default;
    explicit DisplacementField(std::size_t n) : v(n) {}
    explicit DisplacementField(std::vector<Vec3> d) : v(std::move(d)) {}

    std::size_t size() const { return v.size(); }
    Vec3& operator[](std::size_t i) { return v[i]; }
    const Vec3& operator[](std::size_t i) const { return v[i]; }

    double max_norm() const {
        double m = 0.0;
        for (const auto& d : v) m = std::max(m, d.norm());
        return m;
    }
};

/// Triangle mesh. Construction validates indices and rejects degenerate
/// (zero-area) triangles.
struct TriMesh {
    PointCloud vertices;
    std::vector<std::array<int, 3>> triangles;

    TriMesh() = default;
    TriMesh(PointCloud verts, std::vector<std::array<int, 3>> tris, double min_area = 1e-12)
        : vertices(std::move(verts)), triangles(std::move(tris)) {
        const int n = static_cast<int>(vertices.size());
        for (std::size_t t = 0; t < triangles.size(); ++t) {
            const auto& tri = triangles[t];
            for (int c = 0; c < 3; ++c)
                if (tri[c] < 0 || tri[c] >= n)
                    throw InvalidParameter("TriMesh: triangle " + std::to_string(t) +
                                           " references vertex " + std::to_string(tri[c]));
            if (triangle_area(t) <= min_area)
                throw InvalidParameter("TriMesh: degenerate triangle " + std::to_string(t));
        }
    }

    double triangle_area(std::size_t t) const {
        const auto& tri = triangles[t];
        Point3 e1 = vertices[tri[1]] - vertices[tri[0]];
        Point3 e2 = vertices[tri[2]] - vertices[tri[0]];
        return 0.5 * e1.cross(e2).norm();
    }

    /// Unit normal; orientation follows the vertex winding.
    Point3 triangle_normal(std::size_t t) const {
        const auto& tri = triangles[t];
        Point3 e1 = vertices[tri[1]] - vertices[tri[0]];
        Point3 e2 = vertices[tri[2]] - vertices[tri[0]];
        Point3 n = e1.cross(e2);
        return n / n.norm();
    }
};

/// Fixed-k neighbor lists. Each list holds exactly k distinct indices, never
/// the owner, sorted by ascending distance with ties broken by ascending index.
struct NeighborIndex {
    int k = 0;
    std::vector<int> flat;  // row-major, stride k

    NeighborIndex() = default;
    NeighborIndex(int k_, std::size_t count) : k(k_), flat(count * static_cast<std::size_t>(k_)) {}

    std::size_t count() const { return k == 0 ? 0 : flat.size() / static_cast<std::size_t>(k); }
    std::span<const int> row(std::size_t i) const {
        return {flat.data() + i * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
    }
    std::span<int> row(std::size_t i) {
        return {flat.data() + i * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
    }
};

// ---------------------------------------------------------------------------
// Exact spatial search
// ---------------------------------------------------------------------------

/// kd-tree over a point cloud. Queries are exact: results always equal the
/// brute-force scan under the (distance, index) ordering.
class KdTree {
public:
    explicit KdTree(const PointCloud& cloud) : pts_(&cloud) {
        const std::size_t n = cloud.size();
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), 0);
        nodes_.reserve(2 * n + 1);
        root_ = n ? build(0, n) : -1;
    }

    /// k nearest neighbors of q, excluding index `exclude` (pass -1 to keep all).
    /// Output sorted by (distance, index). Requires k >= 1 and enough candidates.
    void knn(const Point3& q, int k, int exclude, std::vector<std::pair<double, int>>& out) const {
        out.clear();
        heap_.clear();
        if (root_ >= 0) search(root_, q, k, exclude);
        out.assign(heap_.begin(), heap_.end());
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first < b.first : a.second < b.second;
        });
    }

    /// Index of the nearest point (ties to the lowest index).
    int nearest(const Point3& q, int exclude = -1) const {
        std::vector<std::pair<double, int>> out;
        knn(q, 1, exclude, out);
        return out.empty() ? -1 : out.front().second;
    }

    double nearest_squared_distance(const Point3& q, int exclude = -1) const {
        std::vector<std::pair<double, int>> out;
        knn(q, 1, exclude, out);
        return out.empty() ? std::numeric_limits<double>::infinity() : out.front().first;
    }

private:
    struct Node {
        int left = -1, right = -1;
        int begin = 0, end = 0;  // leaf range into order_
        int axis = 0;
        double split = 0.0;
    };

    static constexpr int kLeafSize = 12;

    int build(std::size_t begin, std::size_t end) {
        Node node;
        if (end - begin <= kLeafSize) {
            node.begin = static_cast<int>(begin);
            node.end = static_cast<int>(end);
            nodes_.push_back(node);
            return static_cast<int>(nodes_.size() - 1);
        }
        Point3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
                  std::numeric_limits<double>::max()};
        Point3 hi{-std::numeric_limits<double>::max(), -std::numeric_limits<double>::max(),
                  -std::numeric_limits<double>::max()};
        for (std::size_t i = begin; i < end; ++i) {
            const Point3& p = (*pts_)[order_[i]];
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        }
        Point3 extent = hi - lo;
        int axis = 0;
        if (extent.y > extent[axis]) axis = 1;
        if (extent.z > extent[axis]) axis = 2;
        std::size_t mid = (begin + end) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) { return (*pts_)[a][axis] < (*pts_)[b][axis]; });
        node.axis = axis;
        node.split = (*pts_)[order_[mid]][axis];
        int self = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        int left = build(begin, mid);
        int right = build(mid, end);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return self;
    }

    // Worst element ordering: larger distance is worse; equal distance with a
    // larger index is worse. This realizes the "ties to lower index" rule.
    static bool better(const std::pair<double, int>& a, const std::pair<double, int>& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
    }

    void offer(const Point3& q, int idx, int k, int exclude) const {
        if (idx == exclude) return;
        double d2 = squared_distance(q, (*pts_)[idx]);
        std::pair<double, int> cand{d2, idx};
        if (static_cast<int>(heap_.size()) < k) {
            heap_.push_back(cand);
            std::push_heap(heap_.begin(), heap_.end(), better);
        } else if (better(cand, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), better);
            heap_.back() = cand;
            std::push_heap(heap_.begin(), heap_.end(), better);
        }
    }

    void search(int ni, const Point3& q, int k, int exclude) const {
        const Node& node = nodes_[ni];
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) offer(q, order_[i], k, exclude);
            return;
        }
        double delta = q[node.axis] - node.split;
        int near = delta < 0.0 ? node.left : node.right;
        int far = delta < 0.0 ? node.right : node.left;
        search(near, q, k, exclude);
        // descend on equality too: a tied point beyond the plane may win on index
        if (static_cast<int>(heap_.size()) < k || delta * delta <= heap_.front().first)
            search(far, q, k, exclude);
    }

    const PointCloud* pts_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
    mutable std::vector<std::pair<double, int>> heap_;
};

// ---------------------------------------------------------------------------
// Neighborhoods and sampling
// ---------------------------------------------------------------------------

/// Exact k-nearest-neighbor lists for every point, self excluded.
/// Ties resolve to the lower index. Requires k < N.
inline NeighborIndex knn_query(const PointCloud& cloud, int k) {
    const std::size_t n = cloud.size();
    if (k <= 0) throw InvalidParameter("knn_query: k must be positive");
    if (static_cast<std::size_t>(k) >= n)
        throw InvalidParameter("knn_query: k=" + std::to_string(k) + " must be < N=" +
                               std::to_string(n));
    if (!cloud.all_finite()) throw InvalidParameter("knn_query: non-finite coordinates");

    KdTree tree(cloud);
    NeighborIndex nbrs(k, n);
    std::vector<std::pair<double, int>> found;
    for (std::size_t i = 0; i < n; ++i) {
        tree.knn(cloud[i], k, static_cast<int>(i), found);
        auto row = nbrs.row(i);
        for (int j = 0; j < k; ++j) row[j] = found[j].second;
    }
    return nbrs;
}

/// Greedy maximin (farthest point) subsampling. The first index is the seed;
/// each following pick maximizes the minimum distance to the selected set,
/// ties to the lowest index.
inline std::vector<int> farthest_point_sample(const PointCloud& cloud, int m, int seed_index) {
    const int n = static_cast<int>(cloud.size());
    if (m < 1 || m > n)
        throw InvalidParameter("farthest_point_sample: need 1 <= m <= N, got m=" +
                               std::to_string(m) + " N=" + std::to_string(n));
    if (seed_index < 0 || seed_index >= n)
        throw InvalidParameter("farthest_point_sample: seed index out of range");

    std::vector<int> picked;
    picked.reserve(m);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    int current = seed_index;
    picked.push_back(current);
    for (int step = 1; step < m; ++step) {
        const Point3& c = cloud[current];
        int best = -1;
        double best_d2 = -1.0;
        for (int i = 0; i < n; ++i) {
            double d2 = std::min(min_d2[i], squared_distance(cloud[i], c));
            min_d2[i] = d2;
            if (d2 > best_d2 && d2 > 0.0) {
                // strict '>' keeps the lowest index on ties
                best_d2 = d2;
                best = i;
            }
        }
        if (best < 0) {
            // all remaining points coincide with the selected set; fall back to
            // the lowest unselected index to keep the output distinct
            std::vector<char> in(n, 0);
            for (int p : picked) in[p] = 1;
            for (int i = 0; i < n; ++i)
                if (!in[i]) {
                    best = i;
                    break;
                }
        }
        picked.push_back(best);
        current = best;
        min_d2[best] = 0.0;
    }
    return picked;
}

// ---------------------------------------------------------------------------
// Point-set metrics
// ---------------------------------------------------------------------------

/// Symmetric Hausdorff distance in mm.
inline double hausdorff_distance(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) throw InvalidParameter("hausdorff_distance: empty input");
    KdTree ta(a), tb(b);
    double worst = 0.0;
    for (const auto& p : a.points) worst = std::max(worst, tb.nearest_squared_distance(p));
    for (const auto& p : b.points) worst = std::max(worst, ta.nearest_squared_distance(p));
    return std::sqrt(worst);
}

/// Chamfer distance in mm^2: (1/|a|) * (sum of squared nearest distances in
/// both directions). The single 1/|a| prefactor spans both sums.
inline double chamfer_distance(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) throw InvalidParameter("chamfer_distance: empty input");
    KdTree ta(a), tb(b);
    double sum = 0.0;
    for (const auto& p : a.points) sum += tb.nearest_squared_distance(p);
    for (const auto& p : b.points) sum += ta.nearest_squared_distance(p);
    return sum / static_cast<double>(a.size());
}

namespace detail {

/// Closest point on triangle (a, b, c) to p. Ericson, Real-Time Collision
/// Detection, 5.1.5.
inline Point3 closest_point_on_triangle(const Point3& p, const Point3& a, const Point3& b,
                                        const Point3& c) {
    Point3 ab = b - a, ac = c - a, ap = p - a;
    double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    Point3 bp = p - b;
    double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

    Point3 cp = p - c;
    double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

    double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));

    double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

}  // namespace detail

/// Signed distance from p to the mesh surface, positive on the outward side
/// of the nearest triangle (outward = winding normal direction).
inline double point_to_mesh_deviation(const Point3& p, const TriMesh& mesh) {
    if (mesh.triangles.empty()) throw InvalidParameter("point_to_mesh_deviation: empty mesh");
    double best_d2 = std::numeric_limits<double>::infinity();
    Point3 best_q;
    std::size_t best_t = 0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        Point3 q = detail::closest_point_on_triangle(p, mesh.vertices[tri[0]],
                                                     mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
        double d2 = squared_distance(p, q);
        if (d2 < best_d2) {
            best_d2 = d2;
            best_q = q;
            best_t = t;
        }
    }
    double d = std::sqrt(best_d2);
    double side = (p - best_q).dot(mesh.triangle_normal(best_t));
    return side < 0.0 ? -d : d;
}

}  // namespace facecast
