#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include "manyrrt/collision.hpp"
#include "manyrrt/kd_tree.hpp"
#include "manyrrt/kinematics.hpp"

namespace manyrrt {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct PlannerConfig {
  double extend_step = 0.15;  // radians
  long max_iterations = 3000;
  double max_runtime_ms = 3000.0;
  long nodes_max = 3000;
  double goal_bias = 0.05;
  /// Scale of the shrinking rewire ball; see rewire_radius().
  double rewire_radius_scale = 1.0;
  double edge_resolution = 0.05;  // radians
  std::uint64_t seed = 1;

  /// Step of 0.1 rad for chains with fewer than six joints, 0.15 otherwise, and
  /// the rewire scale from optimal_rewire_scale().
  static PlannerConfig defaults_for(const SerialChain& chain);
  void validate() const;
};

/// Lower bound on the rewire-ball constant for asymptotic optimality,
///   2 (1 + 1/m)^(1/m) (vol(box) / unit_ball_volume(m))^(1/m),
/// using the joint box as the free-space volume.
double optimal_rewire_scale(const SerialChain& chain);

/// min(scale * (log n / n)^(1/m), 4 * extend_step), zero for n <= 1.
double rewire_radius(const PlannerConfig& config, int dof, std::size_t n);

/// Uniform sample from the joint-limit box.
JointConfig uniform_config(const SerialChain& chain, std::mt19937_64& rng);

/// Independent seed for stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Joint-space Euclidean arc length.
double path_cost(const std::vector<JointConfig>& waypoints);

struct Path {
  std::vector<JointConfig> waypoints;
  double cost = 0.0;

  bool empty() const { return waypoints.empty(); }
};

/// Rooted tree with cost-to-root bookkeeping and an incremental spatial index.
///
/// A tree has one owner that mutates it. Other threads may read through the
/// *_shared accessors; node storage only grows, and mutation takes an
/// exclusive lock so those readers see consistent parents and costs.
class Tree {
 public:
  struct Node {
    JointConfig config;
    std::int32_t parent = -1;
    double cost = 0.0;
    std::vector<std::int32_t> children;
  };

  explicit Tree(JointConfig root);
  Tree(Tree&&) noexcept;
  Tree& operator=(Tree&&) noexcept;
  ~Tree();

  std::size_t size() const { return nodes_.size(); }
  int dof() const { return static_cast<int>(nodes_.front().config.size()); }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const JointConfig& config(std::size_t i) const { return nodes_[i].config; }
  double cost(std::size_t i) const { return nodes_[i].cost; }

  std::size_t add(const JointConfig& q, std::size_t parent);
  /// Moves `child` under `new_parent` and refreshes the costs of its subtree.
  /// Throws std::logic_error if that would create a cycle.
  void reparent(std::size_t child, std::size_t new_parent);

  bool is_ancestor(std::size_t ancestor, std::size_t node) const;

  /// Lowest-index node among those nearest to q.
  std::size_t nearest(const JointConfig& q) const;
  /// All nodes within radius of q, ascending by index.
  std::vector<std::size_t> near(const JointConfig& q, double radius) const;

  /// Configurations from the root to node i.
  std::vector<JointConfig> path_from_root(std::size_t i) const;
  double total_cost() const;

  /// Verifies the rooted-tree and cost invariants; fills `why` on failure.
  bool check_invariants(std::string* why = nullptr) const;

  // Reads for threads other than the owner.
  std::size_t published_size() const { return published_.load(std::memory_order_acquire); }
  double cost_shared(std::size_t i) const;
  std::vector<JointConfig> path_from_root_shared(std::size_t i) const;
  void configs_since_shared(std::size_t from, std::vector<JointConfig>& out) const;

 private:
  void refresh_subtree_costs(std::size_t root);

  std::vector<Node> nodes_;
  KdTree index_;
  std::unique_ptr<std::shared_mutex> mutex_;
  std::atomic<std::size_t> published_{0};
};

enum class ExtendStatus { kAdvanced, kReached, kTrapped };

struct ExtendResult {
  ExtendStatus status = ExtendStatus::kTrapped;
  std::size_t index = 0;  // the new (or coincident) node; meaningless when trapped
  bool added = false;     // false when the target coincided with an existing node
  std::vector<std::size_t> neighbors;  // rewire candidates around the new node
};

/// Steps from the nearest node toward `target` by at most extend_step and,
/// if the segment is free, inserts the new node under the cheapest
/// collision-free parent among its neighbours.
ExtendResult extend(Tree& tree, const JointConfig& target, const CollisionContext& ctx,
                    const PlannerConfig& config);

/// Re-parents neighbours of `index` through it when that lowers their cost
/// and the connecting edge is free. Uses `neighbors` when given, otherwise
/// queries the rewire ball. Returns the number of re-parented nodes.
std::size_t rewire(Tree& tree, std::size_t index, const CollisionContext& ctx,
                   const PlannerConfig& config, const std::vector<std::size_t>* neighbors = nullptr);

}  // namespace manyrrt
