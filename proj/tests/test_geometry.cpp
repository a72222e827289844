#include "facecast/geometry.hpp"

#include <gtest/gtest.h>

#include "facecast/common.hpp"

using namespace facecast;

namespace {

PointCloud random_cloud(Rng& rng, int n, double scale = 100.0) {
    PointCloud c;
    c.points.reserve(n);
    for (int i = 0; i < n; ++i)
        c.points.push_back({rng.uniform(-scale, scale), rng.uniform(-scale, scale),
                            rng.uniform(-scale, scale)});
    return c;
}

// Exhaustive O(N^2) neighbor oracle with the same (distance, index) tie rule.
std::vector<int> brute_knn(const PointCloud& c, int i, int k) {
    std::vector<std::pair<double, int>> all;
    for (int j = 0; j < static_cast<int>(c.size()); ++j) {
        if (j == i) continue;
        all.push_back({squared_distance(c[i], c[j]), j});
    }
    std::sort(all.begin(), all.end());
    std::vector<int> out;
    for (int j = 0; j < k; ++j) out.push_back(all[j].second);
    return out;
}

// Greedy maximin oracle: enumerate every candidate at every step.
std::vector<int> brute_fps(const PointCloud& c, int m, int seed) {
    const int n = static_cast<int>(c.size());
    std::vector<int> picked{seed};
    std::vector<char> in(n, 0);
    in[seed] = 1;
    while (static_cast<int>(picked.size()) < m) {
        int best = -1;
        double best_d2 = -1.0;
        for (int i = 0; i < n; ++i) {
            if (in[i]) continue;
            double d2 = std::numeric_limits<double>::infinity();
            for (int p : picked) d2 = std::min(d2, squared_distance(c[i], c[p]));
            if (d2 > best_d2 && d2 > 0.0) {
                best_d2 = d2;
                best = i;
            }
        }
        if (best < 0)
            for (int i = 0; i < n; ++i)
                if (!in[i]) {
                    best = i;
                    break;
                }
        picked.push_back(best);
        in[best] = 1;
    }
    return picked;
}

double brute_nn_d2(const Point3& p, const PointCloud& c) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& q : c.points) d = std::min(d, squared_distance(p, q));
    return d;
}

double brute_hausdorff(const PointCloud& a, const PointCloud& b) {
    double m = 0.0;
    for (const auto& p : a.points) m = std::max(m, brute_nn_d2(p, b));
    for (const auto& p : b.points) m = std::max(m, brute_nn_d2(p, a));
    return std::sqrt(m);
}

double brute_chamfer(const PointCloud& a, const PointCloud& b) {
    double s = 0.0;
    for (const auto& p : a.points) s += brute_nn_d2(p, b);
    for (const auto& p : b.points) s += brute_nn_d2(p, a);
    return s / static_cast<double>(a.size());
}

}  // namespace

TEST(KnnQuery, CollinearTieRule) {
    PointCloud c{{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}};
    NeighborIndex nbrs = knn_query(c, 1);
    EXPECT_EQ(nbrs.row(0)[0], 1);
    EXPECT_EQ(nbrs.row(1)[0], 0);  // tie between 0 and 2 resolves to 0
    EXPECT_EQ(nbrs.row(2)[0], 1);
}

TEST(KnnQuery, FullNeighborhood) {
    Rng rng(7);
    PointCloud c = random_cloud(rng, 9);
    NeighborIndex nbrs = knn_query(c, 8);
    for (int i = 0; i < 9; ++i) {
        std::vector<int> got(nbrs.row(i).begin(), nbrs.row(i).end());
        std::vector<int> sorted = got;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> want;
        for (int j = 0; j < 9; ++j)
            if (j != i) want.push_back(j);
        EXPECT_EQ(sorted, want);
    }
}

TEST(KnnQuery, MatchesBruteForceOracle) {
    Rng rng(11);
    for (int trial = 0; trial < 12; ++trial) {
        int n = 20 + static_cast<int>(rng.uniform_index(181));  // up to 200
        int k = 1 + static_cast<int>(rng.uniform_index(std::min(n - 1, 12)));
        PointCloud c = random_cloud(rng, n);
        NeighborIndex nbrs = knn_query(c, k);
        for (int i = 0; i < n; ++i) {
            std::vector<int> got(nbrs.row(i).begin(), nbrs.row(i).end());
            EXPECT_EQ(got, brute_knn(c, i, k)) << "n=" << n << " k=" << k << " i=" << i;
        }
    }
}

TEST(KnnQuery, FiftyPointsKFive) {
    Rng rng(5);
    PointCloud c = random_cloud(rng, 50);
    NeighborIndex nbrs = knn_query(c, 5);
    for (int i = 0; i < 50; ++i) {
        std::vector<int> got(nbrs.row(i).begin(), nbrs.row(i).end());
        EXPECT_EQ(got, brute_knn(c, i, 5));
    }
}

TEST(KnnQuery, RejectsTooLargeK) {
    Rng rng(1);
    PointCloud c = random_cloud(rng, 5);
    EXPECT_THROW(knn_query(c, 5), InvalidParameter);
    EXPECT_THROW(knn_query(c, 6), InvalidParameter);
    EXPECT_NO_THROW(knn_query(c, 4));
}

TEST(FarthestPointSample, AxisLineEndpoints) {
    PointCloud c;
    for (int i = 0; i < 10; ++i) c.points.push_back({static_cast<double>(i), 0, 0});
    EXPECT_EQ(farthest_point_sample(c, 2, 0), (std::vector<int>{0, 9}));
}

TEST(FarthestPointSample, SingleAndFull) {
    Rng rng(3);
    PointCloud c = random_cloud(rng, 8);
    EXPECT_EQ(farthest_point_sample(c, 1, 3), (std::vector<int>{3}));
    auto all = farthest_point_sample(c, 8, 2);
    std::vector<int> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7}));
    EXPECT_EQ(all, brute_fps(c, 8, 2));
}

TEST(FarthestPointSample, MatchesGreedyOracleSmall) {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 4 + static_cast<int>(rng.uniform_index(9));  // up to 12
        PointCloud c = random_cloud(rng, n, 10.0);
        int m = 1 + static_cast<int>(rng.uniform_index(n));
        int seed = static_cast<int>(rng.uniform_index(n));
        auto got = brute_fps(c, m, seed);
        EXPECT_EQ(farthest_point_sample(c, m, seed), got);
        std::sort(got.begin(), got.end());
        EXPECT_EQ(std::unique(got.begin(), got.end()), got.end()) << "duplicate index";
    }
}

TEST(FarthestPointSample, RejectsBadM) {
    Rng rng(2);
    PointCloud c = random_cloud(rng, 5);
    EXPECT_THROW(farthest_point_sample(c, 6, 0), InvalidParameter);
    EXPECT_THROW(farthest_point_sample(c, 0, 0), InvalidParameter);
}

TEST(Hausdorff, HandExamples) {
    PointCloud a{{{0, 0, 0}}};
    PointCloud b{{{3, 4, 0}}};
    EXPECT_DOUBLE_EQ(hausdorff_distance(a, b), 5.0);

    PointCloud c{{{0, 0, 0}, {2, 0, 0}}};
    PointCloud d{{{0, 0, 0}}};
    EXPECT_DOUBLE_EQ(hausdorff_distance(c, d), 2.0);
    EXPECT_DOUBLE_EQ(hausdorff_distance(d, c), 2.0);

    EXPECT_DOUBLE_EQ(hausdorff_distance(a, a), 0.0);
}

TEST(Chamfer, HandExamples) {
    PointCloud a{{{0, 0, 0}}};
    PointCloud b{{{1, 0, 0}}};
    EXPECT_DOUBLE_EQ(chamfer_distance(a, b), 2.0);
    EXPECT_DOUBLE_EQ(chamfer_distance(a, a), 0.0);
}

TEST(Metrics, MatchExhaustiveOracles) {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        int na = 5 + static_cast<int>(rng.uniform_index(196));
        int nb = 5 + static_cast<int>(rng.uniform_index(196));
        PointCloud a = random_cloud(rng, na);
        PointCloud b = random_cloud(rng, nb);
        EXPECT_NEAR(hausdorff_distance(a, b), brute_hausdorff(a, b), 1e-9);
        EXPECT_NEAR(chamfer_distance(a, b), brute_chamfer(a, b), 1e-9);
        EXPECT_DOUBLE_EQ(hausdorff_distance(a, b), hausdorff_distance(b, a));
    }
}

TEST(Metrics, ThirtyPointChamferOracle) {
    Rng rng(31);
    PointCloud a = random_cloud(rng, 30);
    PointCloud b = random_cloud(rng, 30);
    EXPECT_NEAR(chamfer_distance(a, b), brute_chamfer(a, b), 1e-9);
}

TEST(Metrics, TranslationInvariance) {
    Rng rng(29);
    PointCloud a = random_cloud(rng, 40);
    PointCloud b = random_cloud(rng, 35);
    Point3 t{12.5, -3.25, 7.75};
    PointCloud at = a, bt = b;
    for (auto& p : at.points) p += t;
    for (auto& p : bt.points) p += t;
    double h0 = hausdorff_distance(a, b), h1 = hausdorff_distance(at, bt);
    double c0 = chamfer_distance(a, b), c1 = chamfer_distance(at, bt);
    EXPECT_NEAR(h1, h0, 1e-9 * std::max(1.0, h0));
    EXPECT_NEAR(c1, c0, 1e-9 * std::max(1.0, c0));
}

TEST(Metrics, RejectEmpty) {
    PointCloud a{{{0, 0, 0}}};
    PointCloud empty;
    EXPECT_THROW(hausdorff_distance(a, empty), InvalidParameter);
    EXPECT_THROW(chamfer_distance(empty, a), InvalidParameter);
}

TEST(PointToMesh, SignedDeviation) {
    // upward-facing unit triangle in the z=0 plane
    PointCloud verts{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}};
    TriMesh mesh(verts, {{{0, 1, 2}}});

    Point3 centroid{1.0 / 3.0, 1.0 / 3.0, 0.0};
    EXPECT_NEAR(point_to_mesh_deviation(centroid, mesh), 0.0, 1e-15);

    double h = 0.37;
    EXPECT_NEAR(point_to_mesh_deviation({centroid.x, centroid.y, h}, mesh), h, 1e-12);
    EXPECT_NEAR(point_to_mesh_deviation({centroid.x, centroid.y, -h}, mesh), -h, 1e-12);
}

TEST(PointToMesh, MagnitudeMatchesAnalytic) {
    PointCloud verts{{{0, 0, 0}, {2, 0, 0}, {0, 2, 0}}};
    TriMesh mesh(verts, {{{0, 1, 2}}});
    // beyond the edge x in [0,2], y<0: closest point is on the edge
    Point3 p{1.0, -3.0, 4.0};
    double expect = std::sqrt(3.0 * 3.0 + 4.0 * 4.0);
    EXPECT_NEAR(std::abs(point_to_mesh_deviation(p, mesh)), expect, 1e-9);
    // beyond a vertex
    Point3 q{-1.0, -1.0, 1.0};
    EXPECT_NEAR(std::abs(point_to_mesh_deviation(q, mesh)), std::sqrt(3.0), 1e-9);
}

TEST(TriMesh, RejectsDegenerate) {
    PointCloud verts{{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}};
    EXPECT_THROW(TriMesh(verts, {{{0, 1, 2}}}), InvalidParameter);
    EXPECT_THROW(TriMesh(verts, {{{0, 1, 5}}}), InvalidParameter);
}
