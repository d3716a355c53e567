#include <cstdio>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "manyrrt/error.hpp"
#include "manyrrt/ik.hpp"
#include "manyrrt/tree.hpp"
#include "oracles.hpp"

using namespace manyrrt;

namespace {

Pose planar_target(double x, double y) {
  Pose p;
  p.position = Eigen::Vector3d(x, y, 0.0);
  return p;
}

double position_error(const SerialChain& chain, const JointConfig& q, const Pose& t) {
  return (forward_kinematics(chain, q).position - t.position).norm();
}

// Greedy reference filter written independently of the library.
std::vector<JointConfig> greedy_filter(const std::vector<JointConfig>& in, double eps) {
  std::vector<JointConfig> out;
  for (const auto& q : in) {
    bool keep = true;
    for (const auto& k : out) keep = keep && (q - k).norm() > eps;
    if (keep) out.push_back(q);
  }
  return out;
}

}  // namespace

TEST(IkSqp, ExactSeedIsFixedPoint) {
  const auto chain = generic_6dof();
  std::mt19937_64 rng(1);
  IkSettings s;
  s.seed_weight = 0.0;
  for (int i = 0; i < 20; ++i) {
    const JointConfig q = uniform_config(chain, rng);
    const auto sol = solve_ik_sqp(chain, forward_kinematics(chain, q), q, s);
    ASSERT_TRUE(sol);
    EXPECT_EQ(*sol, q);
  }
}

TEST(IkSqp, PlanarTwoLinkMatchesClosedForm) {
  const auto chain = planar_2dof();
  IkSettings s = IkSettings::position_only();
  s.residual_tol = 1e-7;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI), rad(0.3, 1.9);
  for (int i = 0; i < 50; ++i) {
    const double th = ang(rng), r = rad(rng);
    const Pose t = planar_target(r * std::cos(th), r * std::sin(th));
    const auto branches = oracle::two_link_ik(1.0, 1.0, t.position.x(), t.position.y());
    ASSERT_EQ(branches.size(), 2u);
    for (const auto& b : branches) {
      // A seed a little off each analytic branch stays in that basin.
      const JointConfig seed = b + Eigen::Vector2d(0.05, -0.05);
      const auto sol = solve_ik_sqp(chain, t, seed, s);
      ASSERT_TRUE(sol);
      EXPECT_LE(position_error(chain, *sol, t), 1e-6);
      EXPECT_LT((*sol - b).norm(), 1e-4);
    }
  }
}

TEST(IkSqp, DescentNeverIncreasesObjective) {
  const auto chain = generic_7dof();
  std::mt19937_64 rng(3);
  const IkSettings s;
  for (int i = 0; i < 30; ++i) {
    const Pose t = forward_kinematics(chain, uniform_config(chain, rng));
    IkTrace trace;
    solve_ik_sqp(chain, t, uniform_config(chain, rng), s, &trace);
    for (std::size_t k = 1; k < trace.accepted.size(); ++k) {
      if (trace.accepted[k].phase != trace.accepted[k - 1].phase) continue;
      EXPECT_LE(trace.accepted[k].objective, trace.accepted[k - 1].objective + 1e-15);
    }
  }
}

TEST(IkSqp, SolutionsRespectLimitsAndTolerance) {
  const auto chain = generic_7dof();
  std::mt19937_64 rng(4);
  const IkSettings s;
  int solved = 0;
  for (int i = 0; i < 50; ++i) {
    const Pose t = forward_kinematics(chain, uniform_config(chain, rng));
    const auto sol = solve_ik_sqp(chain, t, uniform_config(chain, rng), s);
    if (!sol) continue;
    ++solved;
    EXPECT_TRUE(chain.within_limits(*sol));
    EXPECT_LE(weighted_residual(pose_error(forward_kinematics(chain, *sol), t), s), s.residual_tol);
  }
  EXPECT_GT(solved, 0);
}

TEST(IkSqp, UnreachableTargetFails) {
  const auto chain = planar_2dof();
  EXPECT_FALSE(solve_ik_sqp(chain, planar_target(3.0, 0.0), JointConfig::Zero(2), IkSettings::position_only()));
  EXPECT_FALSE(solve_ik_newton(chain, planar_target(3.0, 0.0), JointConfig::Zero(2), IkSettings::position_only()));
}

TEST(IkNewton, ExactStartTerminatesImmediately) {
  const auto chain = generic_6dof();
  std::mt19937_64 rng(5);
  const JointConfig q = uniform_config(chain, rng);
  IkTrace trace;
  const auto sol = solve_ik_newton(chain, forward_kinematics(chain, q), q, IkSettings{}, &trace);
  ASSERT_TRUE(sol);
  EXPECT_EQ(*sol, q);
  EXPECT_LE(trace.iterations, 1);
}

TEST(IkNewton, ConvergesInBasin) {
  const auto chain = planar_2dof();
  IkSettings s = IkSettings::position_only();
  s.residual_tol = 1e-7;
  const Pose t = planar_target(1.2, 0.7);
  const auto b = oracle::two_link_ik(1.0, 1.0, 1.2, 0.7);
  const auto sol = solve_ik_newton(chain, t, b[0] + Eigen::Vector2d(0.1, 0.1), s);
  ASSERT_TRUE(sol);
  EXPECT_LE(position_error(chain, *sol, t), 1e-6);
}

TEST(IkNewton, SingularStartStaysFinite) {
  const auto chain = planar_2dof();
  // Straight arm; the target asks for motion along the arm, the degenerate direction.
  for (const auto& solver : {solve_ik_newton, solve_ik_sqp}) {
    IkTrace trace;
    const auto sol = solver(chain, planar_target(1.5, 0.0), JointConfig::Zero(2), IkSettings::position_only(), &trace);
    if (sol) EXPECT_TRUE(sol->allFinite());
    for (const auto& st : trace.accepted) EXPECT_TRUE(std::isfinite(st.residual));
  }
}

TEST(IkSettings, ValidationRejectsBadFields) {
  IkSettings s;
  s.residual_tol = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = IkSettings{};
  s.seed_weight = -1.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = IkSettings{};
  s.task_weight[0] = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Downsample, Examples) {
  const JointConfig a = JointConfig::Zero(3);
  EXPECT_EQ(downsample({a, a, a, a}, 1e-4).size(), 1u);
  const JointConfig b = a + JointConfig::Unit(3, 0) * 2e-4;
  EXPECT_EQ(downsample({a, b}, 1e-4).size(), 2u);
}

TEST(Downsample, MatchesGreedyOracle) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<JointConfig> in;
  for (int i = 0; i < 400; ++i) in.push_back(Eigen::Vector2d(u(rng), u(rng)));
  const auto got = downsample(in, 0.1);
  EXPECT_EQ(got, greedy_filter(in, 0.1));
  for (std::size_t i = 0; i < got.size(); ++i) {
    for (std::size_t k = i + 1; k < got.size(); ++k) EXPECT_GT((got[i] - got[k]).norm(), 0.1);
  }
}

TEST(SeedDatabase, EmptyWorldTwoDof) {
  const auto chain = planar_2dof();
  const auto db = SeedDatabase::build(chain, RobotSphereModel::for_chain(chain), World{}, 100);
  ASSERT_EQ(db.size(), 100u);
  for (const auto& e : db.entries()) {
    EXPECT_TRUE(chain.within_limits(e.config));
    EXPECT_LT((forward_kinematics(chain, e.config).position - e.pose.position).norm(), 1e-9);
  }
}

TEST(SeedDatabase, FilledWorldIsInfeasible) {
  const auto chain = planar_2dof();
  const World solid({{Eigen::Vector3d::Zero(), 10.0}}, Aabb{});
  try {
    SeedDatabase::build(chain, RobotSphereModel::for_chain(chain), solid, 10);
    FAIL() << "expected an infeasible world error";
  } catch (const PlanningError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasibleWorld);
  }
}

TEST(SeedDatabase, EntriesAreFreeAndQueriesMatchLinearScan) {
  const auto chain = generic_6dof();
  const auto model = RobotSphereModel::for_chain(chain);
  const World w = make_environment(EnvKind::Random, chain.reach(), 3);
  const auto db = SeedDatabase::build(chain, model, w, 100000, 7);
  ASSERT_EQ(db.size(), 100000u);
  for (std::size_t i = 0; i < db.size(); i += 997) EXPECT_TRUE(is_free(chain, model, w, db.entries()[i].config));

  std::vector<Eigen::VectorXd> positions;
  for (const auto& e : db.entries()) positions.push_back(e.pose.position);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.3, 1.3);
  for (int i = 0; i < 50; ++i) {
    Pose t;
    t.position = Eigen::Vector3d(u(rng), u(rng), u(rng));
    const auto got = db.nearest_entries(t, 1);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0], oracle::linear_nearest(positions, t.position));

    std::vector<std::size_t> order(positions.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + 10, order.end(), [&](auto a, auto b) {
      const double da = (positions[a] - t.position).squaredNorm(), dbb = (positions[b] - t.position).squaredNorm();
      return da < dbb || (da == dbb && a < b);
    });
    order.resize(10);
    EXPECT_EQ(db.nearest_entries(t, 10), order);
  }
}

TEST(SeedDatabase, ExactMatchAndWholeDatabase) {
  const auto chain = planar_2dof();
  const auto db = SeedDatabase::build(chain, RobotSphereModel::for_chain(chain), World{}, 50, 3);
  const auto& e = db.entries()[17];
  const auto seeds = db.query_seeds(e.pose, 1);
  ASSERT_EQ(seeds.size(), 1u);
  EXPECT_EQ(seeds[0], e.config);
  EXPECT_EQ(db.query_seeds(e.pose, 500).size(), 50u);
}

TEST(SeedDatabase, SaveLoadRoundTrip) {
  const auto chain = generic_6dof();
  const auto db = SeedDatabase::build(chain, RobotSphereModel::for_chain(chain), World{}, 500, 4);
  const std::string path = (std::filesystem::temp_directory_path() / "manyrrt_seeds_test.bin").string();
  db.save(path);
  const auto back = SeedDatabase::load(path);
  std::remove(path.c_str());
  ASSERT_EQ(back.size(), db.size());
  EXPECT_EQ(back.chain_hash(), db.chain_hash());
  EXPECT_EQ(back.world_hash(), db.world_hash());
  for (std::size_t i = 0; i < db.size(); ++i) EXPECT_EQ(back.entries()[i].config, db.entries()[i].config);
  Pose t;
  t.position = Eigen::Vector3d(0.3, 0.2, 0.5);
  EXPECT_EQ(back.nearest_entries(t, 5), db.nearest_entries(t, 5));
}

TEST(GoalSet, PlanarContainsBothElbowBranches) {
  const auto chain = planar_2dof();
  const auto model = RobotSphereModel::for_chain(chain);
  const auto db = SeedDatabase::build(chain, model, World{}, 20000, 1);
  const Pose t = planar_target(0.9, 1.1);
  const GoalSet gs = sample_goal_set(chain, model, World{}, db, t, IkSettings::position_only(), {10, 1e-4, false});
  const auto branches = oracle::two_link_ik(1.0, 1.0, 0.9, 1.1);
  for (const auto& b : branches) {
    bool found = false;
    for (const auto& q : gs.configs) found = found || (q - b).norm() < 1e-3;
    EXPECT_TRUE(found) << b.transpose();
  }
}

TEST(GoalSet, MembersAreAccurateFreeAndDistinct) {
  const auto chain = generic_6dof();
  const auto model = RobotSphereModel::for_chain(chain);
  const World w = make_environment(EnvKind::Random, chain.reach(), 12);
  const auto db = SeedDatabase::build(chain, model, w, 20000, 1);
  std::mt19937_64 rng(10);
  const IkSettings s;
  for (int i = 0; i < 10; ++i) {
    const Pose t = forward_kinematics(chain, uniform_config(chain, rng));
    GoalSet gs;
    try {
      gs = sample_goal_set(chain, model, w, db, t, s, {10, 1e-4, false});
    } catch (const PlanningError&) {
      continue;
    }
    for (std::size_t a = 0; a < gs.configs.size(); ++a) {
      EXPECT_LE(pose_error(forward_kinematics(chain, gs.configs[a]), t).norm(), 1e-4);
      EXPECT_TRUE(is_free(chain, model, w, gs.configs[a]));
      for (std::size_t b = a + 1; b < gs.configs.size(); ++b) EXPECT_GT((gs.configs[a] - gs.configs[b]).norm(), 1e-4);
    }
  }
}

TEST(GoalSet, ParallelMatchesSerial) {
  const auto chain = generic_6dof();
  const auto model = RobotSphereModel::for_chain(chain);
  const auto db = SeedDatabase::build(chain, model, World{}, 5000, 1);
  std::mt19937_64 rng(11);
  const Pose t = forward_kinematics(chain, uniform_config(chain, rng));
  const auto a = sample_goal_set(chain, model, World{}, db, t, IkSettings{}, {10, 1e-4, false});
  const auto b = sample_goal_set(chain, model, World{}, db, t, IkSettings{}, {10, 1e-4, true});
  EXPECT_EQ(a.configs, b.configs);
}

TEST(GoalSet, OutOfReachThrows) {
  const auto chain = planar_2dof();
  const auto model = RobotSphereModel::for_chain(chain);
  const auto db = SeedDatabase::build(chain, model, World{}, 100, 1);
  EXPECT_THROW(sample_goal_set(chain, model, World{}, db, planar_target(5.0, 0.0), IkSettings::position_only()),
               PlanningError);
}
