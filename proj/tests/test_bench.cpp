#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "manyrrt/bench.hpp"
#include "manyrrt/io.hpp"
#include "oracles.hpp"

using namespace manyrrt;
namespace fs = std::filesystem;

namespace {

TrialResult result(const std::string& planner, bool success, long first_iter, double final_cost) {
  TrialResult r;
  r.id = planner + std::to_string(first_iter);
  r.chain = "generic6";
  r.env = "random";
  r.planner = planner;
  r.success = success;
  r.max_iterations = 3000;
  if (success) {
    r.first_iteration = first_iter;
    r.first_cost = final_cost + 1.0;
    r.final_cost = final_cost;
    r.first_ms = 1.0;
    r.final_ms = 2.0;
  }
  r.search_ms = 10.0;
  return r;
}

}  // namespace

TEST(NearestRank, ByHandTenValues) {
  // Sorted: 3 5 8 13 21 34 55 89 144 233. Rank ceil(p/100 * 10).
  const std::vector<long> v{89, 3, 233, 21, 5, 144, 8, 55, 13, 34};
  EXPECT_EQ(nearest_rank(v, 10), 3);
  EXPECT_EQ(nearest_rank(v, 50), 21);
  EXPECT_EQ(nearest_rank(v, 90), 144);
  EXPECT_EQ(nearest_rank(v, 100), 233);
  EXPECT_EQ(nearest_rank(v, 11), 5);
  EXPECT_DOUBLE_EQ(nearest_rank(std::vector<double>{2.5, 0.5, 1.5}, 50), 1.5);
}

TEST(Summarize, AllFailures) {
  std::vector<TrialResult> rs;
  for (int i = 0; i < 5; ++i) rs.push_back(result("rrtstar", false, 0, 0));
  const auto rows = summarize(rs);
  ASSERT_EQ(rows.size(), 1u);
  const SummaryRow& row = rows[0];
  EXPECT_EQ(row.success_rate, 0.0);
  EXPECT_TRUE(std::isinf(row.median_first_cost));
  EXPECT_TRUE(std::isinf(row.median_final_cost));
  EXPECT_EQ(render_iteration(row.p10_first_iteration, row.max_iterations), ">3000");
  EXPECT_EQ(render_iteration(row.p50_first_iteration, row.max_iterations), ">3000");
  EXPECT_EQ(render_iteration(row.p90_first_iteration, row.max_iterations), ">3000");
  EXPECT_EQ(render_cost(row.median_final_cost), "inf");

  std::ostringstream js;
  write_summary_json(js, rows);
  const auto j = nlohmann::json::parse(js.str());
  EXPECT_TRUE(j["rows"][0]["median_final_cost"].is_null());
  EXPECT_EQ(j["rows"][0]["first_iteration_rendered"]["p50"], ">3000");
}

TEST(Summarize, SingleSuccess) {
  const auto rows = summarize({result("many", true, 40, 5.0)});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].median_final_cost, 5.0);
  EXPECT_EQ(rows[0].p50_first_iteration, 40);
}

TEST(Summarize, HandBuiltTenResults) {
  std::vector<TrialResult> rs;
  const long iters[] = {12, 7, 30, 3, 25, 18, 9, 41, 0, 0};
  for (int i = 0; i < 8; ++i) rs.push_back(result("connect", true, iters[i], 1.0 + i));
  rs.push_back(result("connect", false, 0, 0));
  rs.push_back(result("connect", false, 0, 0));
  // Encoded: 3 7 9 12 18 25 30 41 3001 3001.
  auto rows = summarize(rs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].p10_first_iteration, 3);
  EXPECT_EQ(rows[0].p50_first_iteration, 18);
  EXPECT_EQ(rows[0].p90_first_iteration, 3001);
  EXPECT_DOUBLE_EQ(rows[0].success_rate, 0.8);
  EXPECT_DOUBLE_EQ(rows[0].median_final_cost, 4.0);  // lower median of 1..8
  EXPECT_DOUBLE_EQ(rows[0].mean_search_ms, 10.0);

  // Pure and order independent.
  std::reverse(rs.begin(), rs.end());
  const auto again = summarize(rs);
  EXPECT_EQ(again[0].p50_first_iteration, rows[0].p50_first_iteration);
  EXPECT_DOUBLE_EQ(again[0].median_final_cost, rows[0].median_final_cost);
}

TEST(Summarize, GroupsByEnvAndPlanner) {
  std::vector<TrialResult> rs{result("many", true, 4, 2.0), result("connect", true, 6, 3.0)};
  rs.push_back(result("many", true, 5, 2.5));
  rs.back().env = "wall";
  const auto rows = summarize(rs);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].env, "random");
  EXPECT_EQ(rows[0].planner, "connect");
  EXPECT_EQ(rows[2].env, "wall");
}

TEST(ResultsCsv, RoundTrip) {
  std::vector<TrialResult> rs{result("many", true, 4, 2.25), result("rrtstar", false, 0, 0)};
  rs[1].error = "ik from start configuration failed, twice";
  rs[0].stop_reason = "iterations";
  std::stringstream ss;
  write_results_csv(ss, rs);
  const auto back = read_results_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].id, rs[0].id);
  EXPECT_DOUBLE_EQ(back[0].final_cost, 2.25);
  EXPECT_EQ(back[0].first_iteration, 4);
  EXPECT_TRUE(std::isinf(back[1].final_cost));
  EXPECT_EQ(back[1].error, rs[1].error);
  EXPECT_FALSE(back[1].success);
}

TEST(Suite, JsonRoundTrip) {
  TrialSpec s;
  s.id = "t0";
  s.env = {EnvKind::Random, 7, {12, true}};
  s.start = Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);
  s.goal_pose.position = Eigen::Vector3d(0.1, 0.2, 0.3);
  s.planner = PlannerKind::Connect;
  s.baseline_goal = JointConfig::Constant(6, 0.25);
  s.config.k = 7;
  s.config.base.seed = 99;
  std::stringstream ss;
  write_suite(ss, {s});
  const auto back = parse_suite(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].id, "t0");
  EXPECT_EQ(back[0].env.kind, EnvKind::Random);
  EXPECT_EQ(back[0].env.seed, 7u);
  EXPECT_EQ(back[0].env.options.random_obstacles, 12);
  EXPECT_TRUE(back[0].env.options.planar);
  EXPECT_EQ(back[0].start, s.start);
  EXPECT_EQ(back[0].planner, PlannerKind::Connect);
  ASSERT_TRUE(back[0].baseline_goal);
  EXPECT_EQ(*back[0].baseline_goal, *s.baseline_goal);
  EXPECT_EQ(back[0].config.k, 7u);
  EXPECT_EQ(back[0].config.base.seed, 99u);
  EXPECT_LT((back[0].goal_pose.position - s.goal_pose.position).norm(), 1e-15);
}

TEST(RunSuite, TrivialTrialAndDeterminism) {
  const auto chain = generic_6dof();
  std::mt19937_64 rng(3);
  const JointConfig q = uniform_config(chain, rng);
  std::vector<TrialSpec> specs;
  for (PlannerKind p : {PlannerKind::RrtStar, PlannerKind::Connect, PlannerKind::Many}) {
    TrialSpec s;
    s.id = "trivial-" + to_string(p);
    s.start = q;
    s.goal_pose = forward_kinematics(chain, q);
    s.planner = p;
    s.config = ManyConfig::defaults_for(chain);
    s.seed_db_size = 2000;
    specs.push_back(s);
  }
  const fs::path dir = fs::temp_directory_path() / "manyrrt_suite_test";
  fs::remove_all(dir);
  const auto a = run_suite(specs, dir.string());
  for (const auto& r : a) {
    EXPECT_TRUE(r.success) << r.id << ": " << r.error;
    EXPECT_NEAR(r.final_cost, 0.0, 1e-3) << r.id;
  }
  EXPECT_TRUE(fs::exists(dir / "results.csv"));
  for (const auto& s : specs) EXPECT_TRUE(fs::exists(dir / "traces" / (s.id + ".csv")));
  std::ifstream in(dir / "results.csv");
  EXPECT_EQ(read_results_csv(in).size(), 3u);
  fs::remove_all(dir);

  const auto b = run_suite(specs);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].final_cost, b[i].final_cost);
    EXPECT_EQ(a[i].nodes, b[i].nodes);
    EXPECT_EQ(a[i].path.waypoints, b[i].path.waypoints);
  }
}

TEST(RunSuite, FailuresAreRecordedNotThrown) {
  TrialSpec s;
  s.id = "bad";
  s.start = JointConfig::Zero(3);  // wrong dimension for generic6
  s.planner = PlannerKind::Connect;
  const auto r = run_suite({s});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_FALSE(r[0].success);
  EXPECT_FALSE(r[0].error.empty());

  TrialSpec far;
  far.id = "far";
  far.start = JointConfig::Zero(6);
  far.goal_pose.position = Eigen::Vector3d(5.0, 0.0, 0.0);
  far.planner = PlannerKind::Many;
  far.seed_db_size = 1000;
  const auto r2 = run_suite({far});
  EXPECT_FALSE(r2[0].success);
  EXPECT_FALSE(r2[0].error.empty());
}

TEST(MakeSuite, QueriesAreSharedAcrossPlannersAndFeasible) {
  SuiteOptions o;
  o.envs = {EnvKind::Random, EnvKind::Wall};
  o.trials = 2;
  o.seed_db_size = 5000;
  o.config = ManyConfig::defaults_for(generic_6dof());
  o.config.base.max_iterations = 300;
  o.config.base.nodes_max = 300;
  SeedDbCache cache;
  const auto specs = make_suite(o, cache);
  ASSERT_EQ(specs.size(), 2u * 2u * 3u);
  const auto chain = generic_6dof();
  const auto model = RobotSphereModel::for_chain(chain);
  for (std::size_t i = 0; i < specs.size(); i += 3) {
    for (std::size_t k = 1; k < 3; ++k) {
      EXPECT_EQ(specs[i].start, specs[i + k].start);
      EXPECT_EQ(specs[i].goal_pose.position, specs[i + k].goal_pose.position);
      EXPECT_EQ(specs[i].config.base.seed, specs[i + k].config.base.seed);
    }
    const World w = make_environment(specs[i].env.kind, chain.reach(), specs[i].env.seed, specs[i].env.options);
    EXPECT_TRUE(is_free(chain, model, w, specs[i].start));
  }
  // Wall queries start on the +y side and aim at the -y side.
  for (const auto& s : specs) {
    if (s.env.kind != EnvKind::Wall) continue;
    EXPECT_GT(forward_kinematics(chain, s.start).position.y(), 0.0);
    EXPECT_LT(s.goal_pose.position.y(), 0.0);
  }
}

TEST(GridOracle, EmptyWorldStraightLine) {
  const auto chain = planar_2dof();
  const auto model = RobotSphereModel::for_chain(chain);
  const World empty;
  const CollisionContext ctx{chain, model, empty};
  const JointConfig a = Eigen::Vector2d(-1.234, 0.5), b = Eigen::Vector2d(2.0, -1.1);
  const auto r = grid_oracle_2dof(ctx, a, {b}, 0.01);
  EXPECT_NEAR(r.cost, (b - a).norm(), std::hypot(0.01, 0.01));
  EXPECT_EQ(r.goal_index, 0);
}

TEST(GridOracle, WalledOffGoalIsInfinite) {
  const auto chain = planar_2dof();
  const auto model = RobotSphereModel::for_chain(chain);
  const World ring = make_environment(EnvKind::Bifurcated, chain.reach(), 0);
  const CollisionContext ctx{chain, model, ring};
  const JointConfig a = Eigen::Vector2d(0.0, 1.5), b = Eigen::Vector2d(0.5, -1.5);
  EXPECT_TRUE(std::isinf(grid_oracle_2dof(ctx, a, {b}, 0.02).cost));

  // With both branches offered only the reachable one counts.
  const JointConfig c = Eigen::Vector2d(0.7, 1.2);
  const auto r = grid_oracle_2dof(ctx, a, {b, c}, 0.02);
  EXPECT_EQ(r.goal_index, 1);
  EXPECT_NEAR(r.cost, (c - a).norm(), 0.03);
  EXPECT_TRUE(verify_path(r.path, ctx));
}

TEST(GridOracle, LowerBoundsPlannerInClutter) {
  const auto chain = planar_2dof();
  const auto model = RobotSphereModel::for_chain(chain);
  const World w = make_environment(EnvKind::Random, chain.reach(), 4, {6, true});
  const CollisionContext ctx{chain, model, w};
  std::mt19937_64 rng(6);
  JointConfig a, b;
  do a = uniform_config(chain, rng);
  while (!ctx.is_free(a));
  do b = uniform_config(chain, rng);
  while (!ctx.is_free(b));
  const auto oracle_result = grid_oracle_2dof(ctx, a, {b}, 0.01);
  PlannerConfig cfg = PlannerConfig::defaults_for(chain);
  cfg.max_runtime_ms = 60000;
  const PlanResult p = plan_rrt_star_connect(ctx, a, b, cfg);
  if (p.success) {
    ASSERT_TRUE(std::isfinite(oracle_result.cost));
    // The oracle shortcuts a resolution-limited grid path, so allow one cell.
    EXPECT_LE(oracle_result.cost, p.path.cost + std::hypot(0.01, 0.01));
  }
}

TEST(GridOracle, RejectsWrongChain) {
  const auto chain = generic_6dof();
  const auto model = RobotSphereModel::for_chain(chain);
  const World empty;
  const CollisionContext ctx{chain, model, empty};
  EXPECT_THROW(grid_oracle_2dof(ctx, JointConfig::Zero(6), {JointConfig::Zero(6)}, 0.01), std::invalid_argument);
}

TEST(PlannerKinds, NamesRoundTrip) {
  for (PlannerKind k : {PlannerKind::RrtStar, PlannerKind::Connect, PlannerKind::Many}) {
    EXPECT_EQ(planner_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(planner_kind_from_string("prm"), std::invalid_argument);
}
