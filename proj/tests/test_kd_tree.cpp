#include <random>

#include <gtest/gtest.h>

#include "manyrrt/kd_tree.hpp"
#include "oracles.hpp"

using manyrrt::KdTree;

namespace {

std::vector<Eigen::VectorXd> random_points(int dim, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p(dim);
    for (int d = 0; d < dim; ++d) p[d] = u(rng);
    pts.push_back(p);
  }
  return pts;
}

std::span<const double> span_of(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

TEST(KdTree, NearestMatchesLinearScan) {
  std::mt19937_64 rng(1);
  for (int dim : {2, 3, 6}) {
    const auto pts = random_points(dim, 5000, rng);
    KdTree tree(dim);
    for (const auto& p : pts) tree.insert(span_of(p));
    const auto probes = random_points(dim, 50, rng);
    for (const auto& q : probes) {
      const std::size_t got = tree.nearest(span_of(q));
      const std::size_t want = oracle::linear_nearest(pts, q);
      EXPECT_DOUBLE_EQ((pts[got] - q).squaredNorm(), (pts[want] - q).squaredNorm());
    }
  }
}

TEST(KdTree, KNearestMatchesLinearScanOrder) {
  std::mt19937_64 rng(2);
  const auto pts = random_points(3, 2000, rng);
  KdTree tree(3);
  for (const auto& p : pts) tree.insert(span_of(p));
  for (const auto& q : random_points(3, 50, rng)) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return (pts[a] - q).squaredNorm() < (pts[b] - q).squaredNorm(); });
    order.resize(10);
    EXPECT_EQ(tree.k_nearest(span_of(q), 10), order);
  }
}

TEST(KdTree, WithinRadiusMatchesLinearScan) {
  std::mt19937_64 rng(3);
  const auto pts = random_points(6, 3000, rng);
  KdTree tree(6);
  for (const auto& p : pts) tree.insert(span_of(p));
  for (const auto& q : random_points(6, 50, rng)) {
    EXPECT_EQ(tree.within_radius(span_of(q), 0.7), oracle::linear_within(pts, q, 0.7));
  }
}

TEST(KdTree, TiesBreakTowardLowerId) {
  KdTree tree(2);
  const Eigen::Vector2d a(1, 0), b(-1, 0), c(1, 0);
  tree.insert(span_of(a));
  tree.insert(span_of(b));
  tree.insert(span_of(c));
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(2);
  EXPECT_EQ(tree.nearest(span_of(origin)), 0u);
  EXPECT_EQ(tree.k_nearest(span_of(origin), 3), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(KdTree, KLargerThanSizeReturnsAll) {
  KdTree tree(1);
  for (double x : {3.0, 1.0, 2.0}) tree.insert(std::span<const double>(&x, 1));
  const double q = 0.0;
  EXPECT_EQ(tree.k_nearest(std::span<const double>(&q, 1), 10), (std::vector<std::size_t>{1, 2, 0}));
}
