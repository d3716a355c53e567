#include "manyrrt/kd_tree.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>

namespace manyrrt {

namespace {

struct Pending {
  std::int32_t node;
  double bound;  // squared distance from the query to the node's region, lower bound
};

}  // namespace

KdTree::KdTree(int dim) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("KdTree dimension must be positive");
}

double KdTree::squared_distance(std::size_t id, std::span<const double> q) const {
  const double* p = coords_.data() + id * static_cast<std::size_t>(dim_);
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double d = p[i] - q[static_cast<std::size_t>(i)];
    s += d * d;
  }
  return s;
}

std::size_t KdTree::insert(std::span<const double> point) {
  if (point.size() != static_cast<std::size_t>(dim_)) {
    throw std::invalid_argument("KdTree::insert: dimension mismatch");
  }
  const std::size_t id = nodes_.size();
  coords_.insert(coords_.end(), point.begin(), point.end());
  nodes_.push_back(Node{});
  if (id == 0) return id;

  std::int32_t cur = 0;
  int depth = 0;
  for (;;) {
    Node& n = nodes_[static_cast<std::size_t>(cur)];
    const bool go_left = point[static_cast<std::size_t>(n.axis)] < coord(static_cast<std::size_t>(cur), n.axis);
    std::int32_t& child = go_left ? n.left : n.right;
    ++depth;
    if (child < 0) {
      child = static_cast<std::int32_t>(id);
      nodes_[id].axis = depth % dim_;
      return id;
    }
    cur = child;
  }
}

std::size_t KdTree::nearest(std::span<const double> query) const {
  if (empty()) throw std::logic_error("KdTree::nearest on empty tree");
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_id = 0;
  std::vector<Pending> stack{{0, 0.0}};
  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    if (p.bound > best) continue;
    const auto id = static_cast<std::size_t>(p.node);
    const double d = squared_distance(id, query);
    if (d < best || (d == best && id < best_id)) {
      best = d;
      best_id = id;
    }
    const Node& n = nodes_[id];
    const double diff = query[static_cast<std::size_t>(n.axis)] - coord(id, n.axis);
    const std::int32_t near_child = diff < 0 ? n.left : n.right;
    const std::int32_t far_child = diff < 0 ? n.right : n.left;
    // Far side first so the near side is popped next.
    if (far_child >= 0) stack.push_back({far_child, std::max(p.bound, diff * diff)});
    if (near_child >= 0) stack.push_back({near_child, p.bound});
  }
  return best_id;
}

std::vector<std::size_t> KdTree::k_nearest(std::span<const double> query, std::size_t k) const {
  if (k == 0 || empty()) return {};
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> heap;  // max-heap on (distance, id)
  auto worst = [&] {
    return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().first;
  };
  std::vector<Pending> stack{{0, 0.0}};
  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    if (p.bound > worst()) continue;
    const auto id = static_cast<std::size_t>(p.node);
    const Entry e{squared_distance(id, query), id};
    if (heap.size() < k) {
      heap.push(e);
    } else if (e < heap.top()) {
      heap.pop();
      heap.push(e);
    }
    const Node& n = nodes_[id];
    const double diff = query[static_cast<std::size_t>(n.axis)] - coord(id, n.axis);
    const std::int32_t near_child = diff < 0 ? n.left : n.right;
    const std::int32_t far_child = diff < 0 ? n.right : n.left;
    if (far_child >= 0) stack.push_back({far_child, std::max(p.bound, diff * diff)});
    if (near_child >= 0) stack.push_back({near_child, p.bound});
  }
  std::vector<std::size_t> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

std::vector<std::size_t> KdTree::within_radius(std::span<const double> query, double radius) const {
  std::vector<std::size_t> out;
  if (empty() || radius < 0) return out;
  const double r2 = radius * radius;
  std::vector<Pending> stack{{0, 0.0}};
  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    if (p.bound > r2) continue;
    const auto id = static_cast<std::size_t>(p.node);
    if (squared_distance(id, query) <= r2) out.push_back(id);
    const Node& n = nodes_[id];
    const double diff = query[static_cast<std::size_t>(n.axis)] - coord(id, n.axis);
    const std::int32_t near_child = diff < 0 ? n.left : n.right;
    const std::int32_t far_child = diff < 0 ? n.right : n.left;
    if (far_child >= 0) stack.push_back({far_child, std::max(p.bound, diff * diff)});
    if (near_child >= 0) stack.push_back({near_child, p.bound});
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace manyrrt
