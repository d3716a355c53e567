#include "manyrrt/many_rrt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "manyrrt/error.hpp"

namespace manyrrt {

namespace {

std::span<const double> as_span(const JointConfig& q) {
  return {q.data(), static_cast<std::size_t>(q.size())};
}

// Bridges are re-priced every few start-tree iterations; rewiring on either
// side can only make them cheaper.
constexpr long kRefreshPeriod = 16;
constexpr long kRoundsPerIteration = 50;

Path assemble(const Tree& start, std::size_t start_node, const Tree& goal, std::size_t goal_node) {
  Path p;
  p.waypoints = start.path_from_root(start_node);
  std::vector<JointConfig> goal_side = goal.path_from_root_shared(goal_node);
  if ((p.waypoints.back() - goal_side.back()).norm() == 0.0) goal_side.pop_back();
  p.waypoints.insert(p.waypoints.end(), goal_side.rbegin(), goal_side.rend());
  p.cost = path_cost(p.waypoints);
  return p;
}

bool adopt(const Tree& start, const std::vector<Tree>& goal_trees, const Bridge& b, double cost,
           SolutionRecord& record, long iteration, double ms) {
  if (!(cost < record.cost)) return false;
  Path p = assemble(start, b.start_node, goal_trees[static_cast<std::size_t>(b.goal_tree)], b.goal_node);
  // The assembled cost can differ from the bookkept one in the last bits.
  if (!(p.cost < record.cost)) return false;
  record.path = std::move(p);
  record.cost = record.path.cost;
  record.goal_tree = b.goal_tree;
  if (record.first_iteration < 0) {
    record.first_iteration = iteration;
    record.first_ms = ms;
  }
  record.latest_iteration = iteration;
  record.latest_ms = ms;
  return true;
}

double bridge_cost(const Tree& start, const std::vector<Tree>& goal_trees, const Bridge& b) {
  return start.cost(b.start_node) + b.length +
         goal_trees[static_cast<std::size_t>(b.goal_tree)].cost_shared(b.goal_node);
}

}  // namespace

ManyConfig ManyConfig::defaults_for(const SerialChain& chain) {
  ManyConfig c;
  c.base = PlannerConfig::defaults_for(chain);
  c.ik = IkSettings::for_chain(chain);
  return c;
}

void ManyConfig::validate() const {
  base.validate();
  ik.validate();
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (!(gamma0 >= 0.0 && gamma0 <= 1.0)) throw std::invalid_argument("gamma0 must be in [0, 1]");
  if (!(goal_tree_bias >= 0.0 && goal_tree_bias <= 1.0)) {
    throw std::invalid_argument("goal_tree_bias must be in [0, 1]");
  }
  if (!(dedup_eps > 0.0)) throw std::invalid_argument("dedup_eps must be > 0");
}

JointConfig sample_vertex(const GoalPool& pool, std::mt19937_64& rng, double gamma0,
                          const SerialChain& chain, bool* exploited) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double gamma = unit(rng);
  if (gamma > gamma0 || pool.goal_configs.empty()) {
    if (exploited) *exploited = false;
    return uniform_config(chain, rng);
  }
  if (exploited) *exploited = true;
  if (!pool.fresh_nodes.empty()) {
    const std::size_t total = pool.goal_configs.size() + pool.fresh_nodes.size();
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, total - 1)(rng);
    return i < pool.goal_configs.size() ? pool.goal_configs[i] : pool.fresh_nodes[i - pool.goal_configs.size()];
  }
  const auto& from = pool.all_nodes.empty() ? pool.goal_configs : pool.all_nodes;
  return from[std::uniform_int_distribution<std::size_t>(0, from.size() - 1)(rng)];
}

long iteration_count(std::span<const std::size_t> node_counts, std::size_t n) {
  std::size_t sum = 0;
  for (std::size_t c : node_counts) sum += 2 * c;
  return static_cast<long>(sum / (n + 1));
}

std::size_t node_budget(std::size_t nodes_max, std::size_t n) { return nodes_max / 2 * (n + 1); }

GoalFrontier::GoalFrontier(int dof, std::size_t tree_count) : index_(dof), seen_(tree_count, 0) {}

void GoalFrontier::poll(const std::vector<Tree>& goal_trees) {
  if (goal_trees.size() != seen_.size()) throw std::invalid_argument("GoalFrontier::poll: tree count changed");
  fresh_begin_ = all_.size();
  for (std::size_t t = 0; t < goal_trees.size(); ++t) {
    if (goal_trees[t].published_size() <= seen_[t]) continue;
    const std::size_t before = all_.size();
    goal_trees[t].configs_since_shared(seen_[t], all_);
    for (std::size_t i = before; i < all_.size(); ++i) {
      refs_.push_back({static_cast<int>(t), seen_[t] + (i - before)});
      index_.insert(as_span(all_[i]));
    }
    seen_[t] += all_.size() - before;
  }
}

std::span<const JointConfig> GoalFrontier::fresh() const {
  return std::span<const JointConfig>(all_).subspan(fresh_begin_);
}

std::vector<std::size_t> GoalFrontier::within(const JointConfig& q, double radius) const {
  return index_.within_radius(as_span(q), radius);
}

bool conn_tree(const Tree& start, std::size_t start_node, const std::vector<Tree>& goal_trees,
               const GoalFrontier& frontier, const CollisionContext& ctx, double tolerance,
               SolutionRecord& record, std::vector<Bridge>* bridges, long iteration, double ms) {
  const JointConfig& q = start.config(start_node);
  std::vector<Bridge> found;
  for (std::size_t i : frontier.within(q, tolerance)) {
    const auto& ref = frontier.ref(i);
    const JointConfig& g = frontier.all()[i];
    if (!ctx.edge_free(q, g)) continue;
    found.push_back({start_node, ref.tree, ref.node, (q - g).norm()});
  }
  bool changed = false;
  for (const Bridge& b : found) {
    changed |= adopt(start, goal_trees, b, bridge_cost(start, goal_trees, b), record, iteration, ms);
  }
  if (bridges) bridges->insert(bridges->end(), found.begin(), found.end());
  return changed;
}

bool conn_fresh(const Tree& start, const std::vector<Tree>& goal_trees, const GoalFrontier& frontier,
                const CollisionContext& ctx, double tolerance, SolutionRecord& record,
                std::vector<Bridge>* bridges, long iteration, double ms) {
  std::vector<Bridge> found;
  for (std::size_t i = frontier.fresh_begin(); i < frontier.all().size(); ++i) {
    const JointConfig& g = frontier.all()[i];
    const auto& ref = frontier.ref(i);
    for (std::size_t s : start.near(g, tolerance)) {
      if (!ctx.edge_free(start.config(s), g)) continue;
      found.push_back({s, ref.tree, ref.node, (start.config(s) - g).norm()});
    }
  }
  bool changed = false;
  for (const Bridge& b : found) {
    changed |= adopt(start, goal_trees, b, bridge_cost(start, goal_trees, b), record, iteration, ms);
  }
  if (bridges) bridges->insert(bridges->end(), found.begin(), found.end());
  return changed;
}

bool refresh_bridges(const Tree& start, const std::vector<Tree>& goal_trees,
                     const std::vector<Bridge>& bridges, SolutionRecord& record, long iteration,
                     double ms) {
  const Bridge* best = nullptr;
  double best_cost = record.cost;
  for (const Bridge& b : bridges) {
    const double c = bridge_cost(start, goal_trees, b);
    if (c < best_cost) {
      best_cost = c;
      best = &b;
    }
  }
  return best && adopt(start, goal_trees, *best, best_cost, record, iteration, ms);
}

ManyResult plan_many(const CollisionContext& ctx, const JointConfig& start, const GoalSet& goals,
                     const ManyConfig& config) {
  config.validate();
  if (goals.configs.empty()) throw std::invalid_argument("plan_many: empty goal set");
  if (start.size() != ctx.chain.dof()) throw std::invalid_argument("plan_many: start dimension mismatch");
  for (const auto& g : goals.configs) {
    if (g.size() != ctx.chain.dof()) throw std::invalid_argument("plan_many: goal dimension mismatch");
  }

  PlanResult result;
  result.timing.init_begin = Clock::now();
  const std::size_t n = goals.configs.size() - 1;
  const PlannerConfig& base = config.base;
  const double tolerance = config.tolerance();
  const std::size_t budget = node_budget(static_cast<std::size_t>(base.nodes_max), n);

  Tree start_tree(start);
  std::vector<Tree> goal_trees;
  goal_trees.reserve(n + 1);
  std::vector<std::mt19937_64> rngs;
  rngs.emplace_back(derive_seed(base.seed, 0));
  for (std::size_t k = 0; k <= n; ++k) {
    goal_trees.emplace_back(goals.configs[k]);
    rngs.emplace_back(derive_seed(base.seed, k + 1));
  }
  GoalFrontier frontier(ctx.chain.dof(), goal_trees.size());
  SolutionRecord record;
  std::vector<Bridge> bridges;
  result.timing.init_end = Clock::now();

  result.timing.search_begin = Clock::now();
  AnytimeLog log(result.timing.search_begin);

  auto counts = [&] {
    std::vector<std::size_t> c;
    c.reserve(goal_trees.size() + 1);
    c.push_back(start_tree.published_size());
    for (const Tree& t : goal_trees) c.push_back(t.published_size());
    return c;
  };
  auto total = [](const std::vector<std::size_t>& c) {
    std::size_t s = 0;
    for (std::size_t x : c) s += x;
    return s;
  };
  // Empty when growth may continue.
  auto limit_reached = [&]() -> std::string {
    const auto c = counts();
    if (iteration_count(c, n) >= base.max_iterations) return "iterations";
    if (total(c) >= budget) return "nodes";
    if (log.elapsed_ms() >= base.max_runtime_ms) return "timeout";
    return "";
  };

  auto grow_goal_tree = [&](std::size_t k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const JointConfig target = unit(rng) < config.goal_tree_bias ? start : uniform_config(ctx.chain, rng);
    ExtendResult ext = extend(goal_trees[k], target, ctx, base);
    if (ext.added) rewire(goal_trees[k], ext.index, ctx, base, &ext.neighbors);
  };

  auto note = [&](bool changed, long iteration) {
    if (changed) log.improve(record.cost, iteration);
  };

  const bool start_free = ctx.is_free(start);
  if (!start_free) result.stop_reason = "start in collision";

  std::atomic<bool> stop{!start_free};
  std::vector<std::thread> workers;
  if (config.parallel && start_free) {
    for (std::size_t k = 0; k <= n; ++k) {
      workers.emplace_back([&, k] {
        std::mt19937_64& rng = rngs[k + 1];
        while (!stop.load(std::memory_order_relaxed)) {
          if (!limit_reached().empty()) {
            stop.store(true, std::memory_order_relaxed);
            break;
          }
          grow_goal_tree(k, rng);
        }
      });
    }
  }

  if (start_free) {
    frontier.poll(goal_trees);
    note(conn_tree(start_tree, 0, goal_trees, frontier, ctx, tolerance, record, &bridges, 0, log.elapsed_ms()), 0);
  }
  log.advance(0);

  if (start_free) {
    const long max_rounds = kRoundsPerIteration * base.max_iterations;
    for (long round = 1;; ++round) {
      if (std::string why = limit_reached(); !why.empty()) {
        result.stop_reason = why;
        break;
      }
      if (config.parallel && stop.load(std::memory_order_relaxed)) {
        result.stop_reason = limit_reached();
        if (result.stop_reason.empty()) result.stop_reason = "stopped";
        break;
      }
      if (round > max_rounds) {
        result.stop_reason = "attempts";
        break;
      }
      if (!config.parallel) {
        for (std::size_t k = 0; k <= n; ++k) grow_goal_tree(k, rngs[k + 1]);
      }

      frontier.poll(goal_trees);
      if (config.bridge_fresh) {
        const long it0 = iteration_count(counts(), n);
        note(conn_fresh(start_tree, goal_trees, frontier, ctx, tolerance, record, &bridges, it0, log.elapsed_ms()),
             it0);
      }
      const GoalPool pool{goals.configs, frontier.fresh(), frontier.all()};
      bool exploited = false;
      const JointConfig q = sample_vertex(pool, rngs[0], config.gamma0, ctx.chain, &exploited);
      long it = 0;
      for (;;) {
        ExtendResult ext = extend(start_tree, q, ctx, base);
        it = iteration_count(counts(), n);
        if (ext.status != ExtendStatus::kTrapped) {
          note(conn_tree(start_tree, ext.index, goal_trees, frontier, ctx, tolerance, record, &bridges, it,
                         log.elapsed_ms()),
               it);
        }
        if (ext.added) rewire(start_tree, ext.index, ctx, base, &ext.neighbors);
        if (!(exploited && config.greedy_exploit) || ext.status != ExtendStatus::kAdvanced) break;
        if (!limit_reached().empty()) break;
        log.advance(it);
      }
      if (round % kRefreshPeriod == 0) {
        note(refresh_bridges(start_tree, goal_trees, bridges, record, it, log.elapsed_ms()), it);
      }
      log.advance(it);
    }
  }

  stop.store(true);
  for (auto& w : workers) w.join();

  if (start_free) {
    const long it = std::max<long>(0, std::min(iteration_count(counts(), n), base.max_iterations));
    note(refresh_bridges(start_tree, goal_trees, bridges, record, it, log.elapsed_ms()), it);
    log.advance(it);
  }

  if (record.has_solution()) {
    result.success = true;
    result.path = record.path;
    result.goal_index = record.goal_tree;
  }
  result.timing.search_end = Clock::now();
  result.nodes = total(counts());
  result.goal_count = goals.configs.size();
  log.finish(result);

  ManyResult out{std::move(result), std::move(record), goals, std::move(start_tree), std::move(goal_trees)};
  return out;
}

ManyResult plan_many(const CollisionContext& ctx, const JointConfig& start, const Pose& target,
                     const SeedDatabase& db, const ManyConfig& config) {
  config.validate();
  const auto t0 = Clock::now();
  GoalSetOptions options;
  options.k = config.k;
  options.dedup_eps = config.dedup_eps;
  options.parallel = config.parallel;
  GoalSet goals = sample_goal_set(ctx.chain, ctx.model, ctx.world, db, target, config.ik, options);
  const double ik_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  ManyResult r = plan_many(ctx, start, goals, config);
  r.plan.ik_ms = ik_ms;
  r.plan.timing.init_begin = t0;
  return r;
}

}  // namespace manyrrt
