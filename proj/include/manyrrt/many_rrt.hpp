#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "manyrrt/ik.hpp"
#include "manyrrt/planners.hpp"
#include "manyrrt/tree.hpp"

namespace manyrrt {

struct ManyConfig {
  PlannerConfig base;
  std::size_t k = 10;            // IK seeds
  double gamma0 = 0.2;           // exploit iff gamma <= gamma0
  double goal_tree_bias = 0.02;  // goal trees' bias toward the start
  double connect_tolerance = 0.0;  // <= 0 means base.extend_step
  bool parallel = false;  // one thread per tree; otherwise deterministic round-robin
  /// When the sampler exploits the goal pool, keep extending toward the
  /// drawn vertex until it is reached or the tree is trapped, as the connect
  /// step of RRT*-Connect does. Otherwise take a single step.
  bool greedy_exploit = true;
  /// Also bridge goal-tree nodes that arrive through the frontier to nearby
  /// start-tree nodes, not only new start-tree nodes to goal trees.
  bool bridge_fresh = true;
  IkSettings ik;
  double dedup_eps = 1e-4;

  static ManyConfig defaults_for(const SerialChain& chain);
  double tolerance() const { return connect_tolerance > 0.0 ? connect_tolerance : base.extend_step; }
  void validate() const;
};

/// Best path assembled so far. Its cost only ever decreases.
struct SolutionRecord {
  Path path;
  double cost = kInfinity;
  int goal_tree = -1;
  long first_iteration = -1;
  double first_ms = kInfinity;
  long latest_iteration = -1;
  double latest_ms = kInfinity;

  bool has_solution() const { return goal_tree >= 0; }
};

/// What the start tree may exploit when sampling.
struct GoalPool {
  std::span<const JointConfig> goal_configs;
  std::span<const JointConfig> fresh_nodes;  // added to goal trees since the last start iteration
  std::span<const JointConfig> all_nodes;    // every goal-tree node seen so far
};

/// Mixed sampler for the start tree. Draws gamma ~ U[0,1]; if gamma > gamma0
/// the sample is uniform over the joint box, otherwise uniform over the goal
/// configurations together with the fresh goal-tree nodes (falling back to
/// all goal-tree nodes when nothing is fresh).
JointConfig sample_vertex(const GoalPool& pool, std::mt19937_64& rng, double gamma0,
                          const SerialChain& chain, bool* exploited = nullptr);

/// floor(sum_k 2 * nodes_k / (N + 1)) over the N + 1 goal trees and the start
/// tree.
long iteration_count(std::span<const std::size_t> node_counts, std::size_t n);

/// nodes_max / 2 * (N + 1).
std::size_t node_budget(std::size_t nodes_max, std::size_t n);

/// The start tree's view of all goal trees: every node seen so far, indexed
/// for proximity queries, plus the batch added since the previous poll.
class GoalFrontier {
 public:
  struct Ref {
    int tree;
    std::size_t node;
  };

  explicit GoalFrontier(int dof, std::size_t tree_count);

  /// Pulls nodes appended to each goal tree since the previous poll. Safe to
  /// call while the goal trees are being grown by other threads.
  void poll(const std::vector<Tree>& goal_trees);

  std::span<const JointConfig> fresh() const;
  std::size_t fresh_begin() const { return fresh_begin_; }
  std::span<const JointConfig> all() const { return all_; }
  const Ref& ref(std::size_t i) const { return refs_[i]; }
  std::vector<std::size_t> within(const JointConfig& q, double radius) const;

 private:
  KdTree index_;
  std::vector<JointConfig> all_;
  std::vector<Ref> refs_;
  std::vector<std::size_t> seen_;
  std::size_t fresh_begin_ = 0;
};

/// A verified connection between a start-tree node and a goal-tree node.
struct Bridge {
  std::size_t start_node;
  int goal_tree;
  std::size_t goal_node;
  double length;
};

/// Tries to join `start_node` to every goal-tree node within `tolerance`.
/// Each bridge is collision-checked; verified bridges are appended to
/// `bridges` and the record is replaced iff a candidate is strictly cheaper.
/// Returns true iff the record changed.
bool conn_tree(const Tree& start, std::size_t start_node, const std::vector<Tree>& goal_trees,
               const GoalFrontier& frontier, const CollisionContext& ctx, double tolerance,
               SolutionRecord& record, std::vector<Bridge>* bridges, long iteration, double ms);

/// The mirror image of conn_tree: bridges each goal-tree node that arrived
/// in the latest frontier poll to the start-tree nodes within `tolerance`.
bool conn_fresh(const Tree& start, const std::vector<Tree>& goal_trees, const GoalFrontier& frontier,
                const CollisionContext& ctx, double tolerance, SolutionRecord& record,
                std::vector<Bridge>* bridges, long iteration, double ms);

/// Re-prices known bridges after rewiring and adopts any that now beat the
/// record. Returns true iff the record changed.
bool refresh_bridges(const Tree& start, const std::vector<Tree>& goal_trees,
                     const std::vector<Bridge>& bridges, SolutionRecord& record, long iteration,
                     double ms);

struct ManyResult {
  PlanResult plan;
  SolutionRecord record;
  GoalSet goals;
  Tree start_tree;
  std::vector<Tree> goal_trees;
};

/// Grows one RRT* tree from each goal configuration plus a start tree that
/// samples with sample_vertex() and connects through conn_tree(). Stops on
/// max_iterations (per iteration_count), the node budget, or the timeout.
ManyResult plan_many(const CollisionContext& ctx, const JointConfig& start, const GoalSet& goals,
                     const ManyConfig& config);

/// As above, sampling the goal set from the seed database first. Goal
/// sampling is timed separately (PlanResult::ik_ms). Throws
/// PlanningError(kNoReachableGoal) when IK yields nothing usable.
ManyResult plan_many(const CollisionContext& ctx, const JointConfig& start, const Pose& target,
                     const SeedDatabase& db, const ManyConfig& config);

}  // namespace manyrrt
