#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "manyrrt/collision.hpp"
#include "manyrrt/kd_tree.hpp"
#include "manyrrt/kinematics.hpp"

namespace manyrrt {

struct IkSettings {
  /// Diagonal of W. Position entries must be positive; orientation entries
  /// may be zero for arms that cannot control orientation (planar chains).
  Vector6d task_weight = Vector6d::Ones();
  double seed_weight = 1e-3;  // lambda
  int max_iters = 200;
  double residual_tol = 1e-4;
  double step = 0.5;  // alpha, Newton-Raphson only
  /// Newton-Raphson stops once ||q_{k+1} - q_k||^2 falls to this value.
  double convergence_eps = 1e-16;
  /// Added to J^T W J before solving; keeps steps finite at singularities.
  double damping = 1e-6;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;

  /// Position-only weights, for chains with fewer than six joints.
  static IkSettings position_only();
  /// Full pose for chains with 6+ joints, position-only otherwise.
  static IkSettings for_chain(const SerialChain& chain);
};

/// sqrt(e^T W e) for the error between f(q) and the target.
double weighted_residual(const Vector6d& error, const IkSettings& settings);

/// Per-iteration record of a solve, for diagnostics and tests.
struct IkTrace {
  struct Step {
    int phase;         // 0: seeded objective, 1: lambda = 0 refinement
    double objective;  // E(q) of the phase's objective at an accepted iterate
    double residual;
  };
  std::vector<Step> accepted;
  int iterations = 0;
};

/// Projected Levenberg-Marquardt on
///   E(q) = 1/2 ||f(q) - x||_W^2 + 1/2 lambda ||q - seed||^2,  q in the joint box.
/// Steps are accepted only if they lower E. If the seeded minimum does not
/// meet residual_tol, the solve continues from there with lambda = 0, which
/// stays in the seed's basin. Returns nullopt on failure.
std::optional<JointConfig> solve_ik_sqp(const SerialChain& chain, const Pose& target,
                                        const JointConfig& seed, const IkSettings& settings,
                                        IkTrace* trace = nullptr);

/// Damped pseudoinverse iteration q <- clamp(q + alpha J^+ e).
std::optional<JointConfig> solve_ik_newton(const SerialChain& chain, const Pose& target,
                                           const JointConfig& q0, const IkSettings& settings,
                                           IkTrace* trace = nullptr);

/// Greedy, order-preserving filter: keeps a solution iff it is farther than
/// eps from every solution already kept.
std::vector<JointConfig> downsample(const std::vector<JointConfig>& solutions, double eps);

/// Collision-free configurations with their end-effector poses, indexed by
/// position for nearest-neighbour seeding. Immutable once built.
class SeedDatabase {
 public:
  struct Entry {
    Pose pose;
    JointConfig config;
  };

  SeedDatabase(std::uint64_t chain_hash, std::uint64_t world_hash, int dof,
               std::vector<Entry> entries);

  /// Rejection-samples `sample_count` free configurations uniformly from the
  /// joint box. Throws PlanningError(kInfeasibleWorld) when fewer than 1 in
  /// 10^4 samples are accepted over a window of attempts.
  static SeedDatabase build(const SerialChain& chain, const RobotSphereModel& model,
                            const World& world, std::size_t sample_count, std::uint64_t seed = 1);

  std::size_t size() const { return entries_.size(); }
  int dof() const { return dof_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::uint64_t chain_hash() const { return chain_hash_; }
  std::uint64_t world_hash() const { return world_hash_; }

  /// Entries whose positions are nearest target.position, nearest first,
  /// ties by insertion order. k larger than the database returns everything.
  std::vector<std::size_t> nearest_entries(const Pose& target, std::size_t k) const;
  std::vector<JointConfig> query_seeds(const Pose& target, std::size_t k) const;

  /// Binary format, see README.
  void save(const std::string& path) const;
  static SeedDatabase load(const std::string& path);

 private:
  std::uint64_t chain_hash_;
  std::uint64_t world_hash_;
  int dof_;
  std::vector<Entry> entries_;
  KdTree index_{3};
};

struct GoalSet {
  std::vector<JointConfig> configs;
  Pose target;
};

struct GoalSetOptions {
  std::size_t k = 10;
  double dedup_eps = 1e-4;
  bool parallel = false;
};

/// K-seeded IK followed by collision filtering and downsampling. Throws
/// PlanningError(kNoReachableGoal) when nothing survives.
GoalSet sample_goal_set(const SerialChain& chain, const RobotSphereModel& model, const World& world,
                        const SeedDatabase& db, const Pose& target, const IkSettings& settings,
                        const GoalSetOptions& options = {});

}  // namespace manyrrt
