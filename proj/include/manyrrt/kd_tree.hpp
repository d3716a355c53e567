#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace manyrrt {

/// Insert-only KD-tree over points of a fixed dimension.
///
/// Points are identified by insertion order. Every query breaks distance ties
/// toward the lower id, so results are deterministic.
class KdTree {
 public:
  explicit KdTree(int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  std::size_t insert(std::span<const double> point);

  std::span<const double> point(std::size_t id) const {
    return {coords_.data() + id * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }

  /// Precondition: non-empty.
  std::size_t nearest(std::span<const double> query) const;

  /// Up to k ids ordered by (distance, id).
  std::vector<std::size_t> k_nearest(std::span<const double> query, std::size_t k) const;

  /// All ids with distance <= radius, ascending by id.
  std::vector<std::size_t> within_radius(std::span<const double> query, double radius) const;

 private:
  struct Node {
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t axis = 0;
  };

  double squared_distance(std::size_t id, std::span<const double> q) const;
  double coord(std::size_t id, int axis) const {
    return coords_[id * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(axis)];
  }

  int dim_;
  std::vector<double> coords_;
  std::vector<Node> nodes_;
};

}  // namespace manyrrt
