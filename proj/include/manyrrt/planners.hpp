#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "manyrrt/collision.hpp"
#include "manyrrt/tree.hpp"

namespace manyrrt {

using Clock = std::chrono::steady_clock;

struct TracePoint {
  long iteration = 0;
  double wall_ms = 0.0;
  double best_cost = kInfinity;  // infinite until the first solution
};

/// Instrumentation hooks. The measured span runs from the start of tree
/// growth to the end of path extraction; initialisation (tree allocation,
/// goal sampling) happens before search_begin.
struct PlanTiming {
  Clock::time_point init_begin;
  Clock::time_point init_end;
  Clock::time_point search_begin;
  Clock::time_point search_end;

  double search_ms() const;
  double init_ms() const;
};

struct PlanResult {
  bool success = false;
  Path path;
  std::vector<TracePoint> trace;
  long iterations = 0;
  long first_iteration = -1;
  double first_ms = kInfinity;  // since search_begin
  double first_cost = kInfinity;
  long final_iteration = -1;  // iteration of the last improvement
  double final_ms = kInfinity;
  std::size_t nodes = 0;
  std::size_t goal_count = 1;
  int goal_index = -1;  // which goal configuration the path ends at
  double ik_ms = 0.0;
  PlanTiming timing;
  std::string stop_reason;
};

/// Incumbent bookkeeping shared by the planners: best cost, first/last
/// improvement and a per-iteration trace that is non-increasing by
/// construction.
class AnytimeLog {
 public:
  explicit AnytimeLog(Clock::time_point search_begin) : begin_(search_begin) {}

  double elapsed_ms() const;
  double best() const { return best_; }

  /// Returns true iff `cost` strictly improves the incumbent.
  bool improve(double cost, long iteration);
  /// Appends trace entries for every iteration index up to `iteration`.
  void advance(long iteration);

  void finish(PlanResult& result) const;

 private:
  Clock::time_point begin_;
  double best_ = kInfinity;
  long first_iteration_ = -1;
  double first_ms_ = kInfinity;
  double first_cost_ = kInfinity;
  long final_iteration_ = -1;
  double final_ms_ = kInfinity;
  long last_traced_ = -1;
  std::vector<TracePoint> trace_;
};

/// Checks the stored cost and re-verifies every edge independently.
bool verify_path(const Path& path, const CollisionContext& ctx, std::string* why = nullptr);

/// Single-tree RRT* toward one goal configuration. One iteration is one
/// sample-extend-rewire step.
PlanResult plan_rrt_star(const CollisionContext& ctx, const JointConfig& start,
                         const JointConfig& goal, const PlannerConfig& config);

/// Bidirectional RRT*: start- and goal-rooted trees alternate extend/rewire
/// and greedy connection. Iterations follow iteration_count() with one goal
/// tree; the node budget is node_budget(nodes_max, 0).
PlanResult plan_rrt_star_connect(const CollisionContext& ctx, const JointConfig& start,
                                 const JointConfig& goal, const PlannerConfig& config);

}  // namespace manyrrt
