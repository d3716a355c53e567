#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "manyrrt/collision.hpp"
#include "manyrrt/ik.hpp"
#include "manyrrt/many_rrt.hpp"
#include "manyrrt/planners.hpp"

namespace manyrrt {

enum class PlannerKind { RrtStar, Connect, Many };

std::string to_string(PlannerKind kind);
PlannerKind planner_kind_from_string(const std::string& name);

struct EnvSpec {
  EnvKind kind = EnvKind::Empty;
  std::uint64_t seed = 0;
  EnvOptions options;
};

/// Everything needed to replay one planning query.
struct TrialSpec {
  std::string id;
  std::string chain = "generic6";  // built-in name or chain file
  EnvSpec env;
  JointConfig start;
  Pose goal_pose;
  PlannerKind planner = PlannerKind::Many;
  /// Goal configuration for the single-goal planners. When absent, one IK
  /// solve seeded at the start configuration provides it.
  std::optional<JointConfig> baseline_goal;
  ManyConfig config;  // config.base drives the single-goal planners
  std::size_t seed_db_size = 100000;
  std::uint64_t seed_db_seed = 1;
};

struct TrialResult {
  std::string id;
  std::string chain;
  std::string env;
  std::string planner;
  bool success = false;
  long first_iteration = -1;
  double first_ms = kInfinity;
  double first_cost = kInfinity;
  long final_iteration = -1;
  double final_ms = kInfinity;
  double final_cost = kInfinity;
  double search_ms = 0.0;  // the measured span, excluding initialisation
  double init_ms = 0.0;
  double ik_ms = 0.0;
  std::size_t nodes = 0;
  std::size_t goal_count = 0;
  int goal_index = -1;
  long iterations = 0;
  long max_iterations = 0;
  std::string stop_reason;
  std::string error;  // set when the trial could not run the planner
  std::vector<TracePoint> trace;
  Path path;
};

/// Seed databases keyed by chain, world and build parameters, shared across
/// trials that plan in the same world. Holds at most `capacity` databases;
/// a reference from get() stays valid until `capacity` further misses.
class SeedDbCache {
 public:
  explicit SeedDbCache(std::size_t capacity = 4) : capacity_(capacity < 1 ? 1 : capacity) {}

  const SeedDatabase& get(const SerialChain& chain, const RobotSphereModel& model, const World& world,
                          std::size_t size, std::uint64_t seed);
  std::size_t size() const { return cache_.size(); }

 private:
  using Key = std::tuple<std::uint64_t, std::uint64_t, std::size_t, std::uint64_t>;
  std::size_t capacity_;
  std::map<Key, std::unique_ptr<SeedDatabase>> cache_;
  std::deque<Key> order_;
};

/// Runs one trial with fresh planner state. Domain failures (unreachable
/// goal, bad start) are recorded in the result, never thrown.
TrialResult run_trial(const TrialSpec& spec, SeedDbCache& cache);

/// Runs every trial in order. If out_dir is non-empty, results.csv and
/// traces/<id>.csv are written there as trials complete.
std::vector<TrialResult> run_suite(const std::vector<TrialSpec>& specs, const std::string& out_dir = "",
                                   SeedDbCache* cache = nullptr);

/// Nearest-rank percentile: the smallest value with at least p percent of
/// the data at or below it. p in (0, 100]; values need not be sorted.
long nearest_rank(std::vector<long> values, double p);
double nearest_rank(std::vector<double> values, double p);

struct SummaryRow {
  std::string env;
  std::string planner;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  long max_iterations = 0;
  // First-solution iteration; failures count as max_iterations + 1.
  long p10_first_iteration = 0;
  long p50_first_iteration = 0;
  long p90_first_iteration = 0;
  double median_first_cost = kInfinity;  // over successes
  double median_final_cost = kInfinity;
  double mean_first_ms = kInfinity;  // time to the first solution
  double mean_final_ms = kInfinity;  // time to the last improvement
  double mean_search_ms = 0.0;       // whole measured span, all trials
};

/// One row per (env, planner), sorted by env then planner. Pure and
/// independent of result order.
std::vector<SummaryRow> summarize(const std::vector<TrialResult>& results);

/// ">max" for encoded failures, the number otherwise.
std::string render_iteration(long value, long max_iterations);
std::string render_cost(double value);

void write_results_csv(std::ostream& out, const std::vector<TrialResult>& results);
void write_result_row(std::ostream& out, const TrialResult& r);
std::vector<TrialResult> read_results_csv(std::istream& in, const std::string& source = "<stream>");

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_summary_json(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_summary_markdown(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Suites are JSON: {"trials": [...]} with one object per TrialSpec.
std::vector<TrialSpec> parse_suite(std::istream& in);
std::vector<TrialSpec> load_suite(const std::string& path);
void write_suite(std::ostream& out, const std::vector<TrialSpec>& specs);

struct SuiteOptions {
  std::string chain = "generic6";
  std::vector<EnvKind> envs{EnvKind::Random};
  std::vector<PlannerKind> planners{PlannerKind::RrtStar, PlannerKind::Connect, PlannerKind::Many};
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  int random_obstacles = 20;
  bool planar = false;
  ManyConfig config;
  std::size_t seed_db_size = 100000;
  /// Budget for the plan-existence check run before a query is accepted.
  long feasibility_iterations = 20000;
  double feasibility_ms = 5000.0;
};

/// Generates queries that are feasible before any benchmarked planner runs:
/// the start is free, the goal pose has free IK solutions and a generous
/// RRT*-Connect run reaches one of them. Each query is emitted once per
/// planner with identical start, goal and seed.
std::vector<TrialSpec> make_suite(const SuiteOptions& options, SeedDbCache& cache);

/// Wall/Passage query: a free start whose end effector lies in a box on the
/// +y side of the wall and a goal pose taken from a free configuration in the
/// mirrored box on the -y side. Boxes scale with the reach.
std::optional<std::pair<JointConfig, Pose>> wall_query(const CollisionContext& ctx, std::mt19937_64& rng,
                                                       int tries = 1000000);

/// Shortest joint-space path on an 8-connected grid over a 2-joint box,
/// shortcut along collision-free straight segments afterwards. The start
/// and goals connect to their nearest grid nodes by straight segments.
/// Returns infinity when no goal is reachable.
struct OracleResult {
  double cost = kInfinity;
  Path path;
  int goal_index = -1;
};
OracleResult grid_oracle_2dof(const CollisionContext& ctx, const JointConfig& start,
                              const std::vector<JointConfig>& goals, double resolution);

}  // namespace manyrrt
