#include "manyrrt/planners.hpp"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

#include "manyrrt/many_rrt.hpp"

namespace manyrrt {

namespace {

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

// Raw loop attempts allowed per budgeted iteration, so a fully trapped tree
// still terminates without relying on the timeout.
constexpr long kAttemptsPerIteration = 50;

}  // namespace

double PlanTiming::search_ms() const { return ms_between(search_begin, search_end); }
double PlanTiming::init_ms() const { return ms_between(init_begin, init_end); }

double AnytimeLog::elapsed_ms() const { return ms_between(begin_, Clock::now()); }

bool AnytimeLog::improve(double cost, long iteration) {
  if (!(cost < best_)) return false;
  const double now = elapsed_ms();
  if (first_iteration_ < 0) {
    first_iteration_ = iteration;
    first_ms_ = now;
    first_cost_ = cost;
  }
  final_iteration_ = iteration;
  final_ms_ = now;
  best_ = cost;
  return true;
}

void AnytimeLog::advance(long iteration) {
  if (iteration <= last_traced_) return;
  const double now = elapsed_ms();
  for (long i = last_traced_ + 1; i <= iteration; ++i) trace_.push_back({i, now, best_});
  last_traced_ = iteration;
}

void AnytimeLog::finish(PlanResult& result) const {
  result.trace = trace_;
  result.first_iteration = first_iteration_;
  result.first_ms = first_ms_;
  result.first_cost = first_cost_;
  result.final_iteration = final_iteration_;
  result.final_ms = final_ms_;
  result.iterations = last_traced_ < 0 ? 0 : last_traced_;
}

bool verify_path(const Path& path, const CollisionContext& ctx, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (path.waypoints.empty()) return fail("empty path");
  const double cost = path_cost(path.waypoints);
  if (std::abs(cost - path.cost) > 1e-9 * std::max(1.0, cost)) {
    return fail("stored cost " + std::to_string(path.cost) + " != " + std::to_string(cost));
  }
  if (path.waypoints.size() == 1 && !ctx.is_free(path.waypoints.front())) {
    return fail("single waypoint in collision");
  }
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    if (!ctx.edge_free(path.waypoints[i - 1], path.waypoints[i])) {
      return fail("edge " + std::to_string(i - 1) + " in collision");
    }
  }
  return true;
}

PlanResult plan_rrt_star(const CollisionContext& ctx, const JointConfig& start,
                         const JointConfig& goal, const PlannerConfig& config) {
  config.validate();
  PlanResult result;
  result.timing.init_begin = Clock::now();
  if (start.size() != ctx.chain.dof() || goal.size() != ctx.chain.dof()) {
    throw std::invalid_argument("plan_rrt_star: configuration dimension mismatch");
  }
  Tree tree(start);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  result.timing.init_end = Clock::now();
  result.timing.search_begin = Clock::now();
  AnytimeLog log(result.timing.search_begin);

  long goal_node = -1;
  if (!ctx.is_free(start) || !ctx.is_free(goal)) {
    result.stop_reason = "start or goal in collision";
  } else if ((start - goal).norm() == 0.0) {
    goal_node = 0;
    log.improve(0.0, 0);
    result.stop_reason = "start equals goal";
  }
  log.advance(0);

  if (result.stop_reason.empty()) {
    const long max_attempts = kAttemptsPerIteration * config.max_iterations;
    long iteration = 0;
    for (long attempt = 0;; ++attempt) {
      if (iteration >= config.max_iterations) { result.stop_reason = "iterations"; break; }
      if (static_cast<long>(tree.size()) >= config.nodes_max) { result.stop_reason = "nodes"; break; }
      if (log.elapsed_ms() >= config.max_runtime_ms) { result.stop_reason = "timeout"; break; }
      if (attempt >= max_attempts) { result.stop_reason = "attempts"; break; }
      ++iteration;
      const JointConfig target = unit(rng) < config.goal_bias ? goal : uniform_config(ctx.chain, rng);
      ExtendResult ext = extend(tree, target, ctx, config);
      if (ext.added) {
        rewire(tree, ext.index, ctx, config, &ext.neighbors);
        if (goal_node < 0) {
          const double to_goal = (tree.config(ext.index) - goal).norm();
          if (to_goal == 0.0) {
            goal_node = static_cast<long>(ext.index);
          } else if (to_goal <= config.extend_step && ctx.edge_free(tree.config(ext.index), goal)) {
            // Attach through the cheapest visible neighbour, not just the node that got close.
            ExtendResult g = extend(tree, goal, ctx, config);
            if (g.status == ExtendStatus::kReached) {
              goal_node = static_cast<long>(g.index);
              if (g.added) rewire(tree, g.index, ctx, config, &g.neighbors);
            } else {
              goal_node = static_cast<long>(tree.add(goal, ext.index));
              rewire(tree, static_cast<std::size_t>(goal_node), ctx, config);
            }
          }
        }
      }
      if (goal_node >= 0) log.improve(tree.cost(static_cast<std::size_t>(goal_node)), iteration);
      log.advance(iteration);
    }
  }

  if (goal_node >= 0) {
    result.success = true;
    result.path.waypoints = tree.path_from_root(static_cast<std::size_t>(goal_node));
    result.path.cost = path_cost(result.path.waypoints);
    result.goal_index = 0;
  }
  result.timing.search_end = Clock::now();
  result.nodes = tree.size();
  log.finish(result);
  return result;
}

PlanResult plan_rrt_star_connect(const CollisionContext& ctx, const JointConfig& start,
                                 const JointConfig& goal, const PlannerConfig& config) {
  config.validate();
  PlanResult result;
  result.timing.init_begin = Clock::now();
  if (start.size() != ctx.chain.dof() || goal.size() != ctx.chain.dof()) {
    throw std::invalid_argument("plan_rrt_star_connect: configuration dimension mismatch");
  }
  std::array<Tree, 2> trees{Tree(start), Tree(goal)};  // 0: start-rooted, 1: goal-rooted
  std::mt19937_64 rng(config.seed);
  const auto budget = node_budget(static_cast<std::size_t>(config.nodes_max), 0);
  result.timing.init_end = Clock::now();
  result.timing.search_begin = Clock::now();
  AnytimeLog log(result.timing.search_begin);

  struct Link {
    std::size_t start_node;
    std::size_t goal_node;
  };
  std::vector<Link> links;
  Link best_link{0, 0};
  auto link_cost = [&](const Link& l) {
    return trees[0].cost(l.start_node) + trees[1].cost(l.goal_node) +
           (trees[0].config(l.start_node) - trees[1].config(l.goal_node)).norm();
  };
  auto node_counts = [&] { return std::array<std::size_t, 2>{trees[0].size(), trees[1].size()}; };
  auto current_iteration = [&] { return iteration_count(node_counts(), 0); };

  if (!ctx.is_free(start) || !ctx.is_free(goal)) {
    result.stop_reason = "start or goal in collision";
  } else if (ctx.edge_free(start, goal) && (start - goal).norm() <= config.extend_step) {
    links.push_back({0, 0});
    log.improve(link_cost(links.back()), 0);
  }
  log.advance(0);

  auto out_of_budget = [&](long attempt) -> std::string {
    if (current_iteration() >= config.max_iterations) return "iterations";
    if (trees[0].size() + trees[1].size() >= budget) return "nodes";
    if (log.elapsed_ms() >= config.max_runtime_ms) return "timeout";
    if (attempt >= kAttemptsPerIteration * config.max_iterations) return "attempts";
    return "";
  };

  if (result.stop_reason.empty()) {
    int active = 0;
    for (long attempt = 0;; ++attempt) {
      if (const std::string why = out_of_budget(attempt); !why.empty()) {
        result.stop_reason = why;
        break;
      }
      Tree& grow = trees[static_cast<std::size_t>(active)];
      Tree& other = trees[static_cast<std::size_t>(1 - active)];
      ExtendResult ext = extend(grow, uniform_config(ctx.chain, rng), ctx, config);
      if (ext.added) {
        rewire(grow, ext.index, ctx, config, &ext.neighbors);
        // Greedy connect of the other tree toward the new node.
        const JointConfig target = grow.config(ext.index);
        while (out_of_budget(attempt).empty()) {
          ExtendResult step = extend(other, target, ctx, config);
          if (step.status == ExtendStatus::kTrapped) break;
          if (step.added) rewire(other, step.index, ctx, config, &step.neighbors);
          if (step.status == ExtendStatus::kReached) {
            links.push_back(active == 0 ? Link{ext.index, step.index} : Link{step.index, ext.index});
            break;
          }
        }
      }
      // Rewiring lowers costs behind existing links, so re-price them all.
      for (const Link& l : links) {
        const double c = link_cost(l);
        if (log.improve(c, current_iteration())) best_link = l;
      }
      log.advance(current_iteration());
      active = 1 - active;
    }
  }

  if (!links.empty()) {
    // Pick the cheapest link against final costs.
    double best = kInfinity;
    for (const Link& l : links) {
      const double c = link_cost(l);
      if (c < best) {
        best = c;
        best_link = l;
      }
    }
    std::vector<JointConfig> waypoints = trees[0].path_from_root(best_link.start_node);
    std::vector<JointConfig> goal_side = trees[1].path_from_root(best_link.goal_node);
    if ((waypoints.back() - goal_side.back()).norm() == 0.0) goal_side.pop_back();
    waypoints.insert(waypoints.end(), goal_side.rbegin(), goal_side.rend());
    result.success = true;
    result.path.waypoints = std::move(waypoints);
    result.path.cost = path_cost(result.path.waypoints);
    result.goal_index = 0;
  }
  result.timing.search_end = Clock::now();
  result.nodes = trees[0].size() + trees[1].size();
  log.finish(result);
  return result;
}

}  // namespace manyrrt
