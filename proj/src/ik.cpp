#include "manyrrt/ik.hpp"

#include <cmath>
#include <future>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "manyrrt/error.hpp"

namespace manyrrt {

namespace {

struct Evaluation {
  Vector6d error;
  double residual;
  double objective;
};

Evaluation evaluate(const SerialChain& chain, const Pose& target, const IkSettings& s,
                    const JointConfig& q, const JointConfig& seed, double lambda) {
  Evaluation ev;
  ev.error = pose_error(forward_kinematics(chain, q), target);
  const double r2 = ev.error.dot(s.task_weight.asDiagonal() * ev.error);
  ev.residual = std::sqrt(r2);
  ev.objective = 0.5 * r2 + 0.5 * lambda * (q - seed).squaredNorm();
  return ev;
}

}  // namespace

void IkSettings::validate() const {
  if ((task_weight.array() < 0.0).any() || (task_weight.head<3>().array() <= 0.0).any()) {
    throw std::invalid_argument("IK task weights: position entries must be > 0, all >= 0");
  }
  if (seed_weight < 0.0) throw std::invalid_argument("IK seed weight must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("IK max_iters must be >= 1");
  if (!(residual_tol > 0.0)) throw std::invalid_argument("IK residual_tol must be > 0");
  if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("IK step must be in (0, 1]");
  if (!(damping > 0.0)) throw std::invalid_argument("IK damping must be > 0");
}

IkSettings IkSettings::position_only() {
  IkSettings s;
  s.task_weight << 1.0, 1.0, 1.0, 0.0, 0.0, 0.0;
  return s;
}

IkSettings IkSettings::for_chain(const SerialChain& chain) {
  return chain.dof() >= 6 ? IkSettings{} : position_only();
}

double weighted_residual(const Vector6d& error, const IkSettings& settings) {
  return std::sqrt(error.dot(settings.task_weight.asDiagonal() * error));
}

std::optional<JointConfig> solve_ik_sqp(const SerialChain& chain, const Pose& target,
                                        const JointConfig& seed, const IkSettings& settings,
                                        IkTrace* trace) {
  settings.validate();
  JointConfig q = clamp_to_limits(chain, seed);
  int phase = settings.seed_weight > 0.0 ? 0 : 1;
  double lambda = phase == 0 ? settings.seed_weight : 0.0;
  Evaluation cur = evaluate(chain, target, settings, q, seed, lambda);
  if (trace) trace->accepted.push_back({phase, cur.objective, cur.residual});
  if (cur.residual <= settings.residual_tol) return q;

  const auto w = settings.task_weight.asDiagonal();
  double mu = 1e-3;
  for (int it = 0; it < settings.max_iters; ++it) {
    if (trace) trace->iterations = it + 1;
    const Jacobian jac = jacobian(chain, q);
    Eigen::MatrixXd normal = jac.transpose() * w * jac;
    normal.diagonal().array() += lambda + mu + settings.damping;
    const Eigen::VectorXd gradient = jac.transpose() * (w * cur.error) - lambda * (q - seed);
    const JointConfig candidate =
        clamp_to_limits(chain, q + normal.ldlt().solve(gradient));

    bool stalled = false;
    const Evaluation next = evaluate(chain, target, settings, candidate, seed, lambda);
    if (std::isfinite(next.objective) && next.objective < cur.objective) {
      const double decrease = cur.objective - next.objective;
      const double moved = (candidate - q).norm();
      q = candidate;
      cur = next;
      mu = std::max(mu / 3.0, 1e-12);
      if (trace) trace->accepted.push_back({phase, cur.objective, cur.residual});
      if (cur.residual <= settings.residual_tol) return q;
      stalled = decrease <= 1e-15 * std::max(1.0, cur.objective) || moved < 1e-14;
    } else {
      mu *= 10.0;
      stalled = mu > 1e10;
    }
    if (!stalled) continue;
    if (phase == 1) break;
    // The seeded minimum is biased toward the seed; refine it without the
    // pull so the residual can reach tolerance.
    phase = 1;
    lambda = 0.0;
    mu = 1e-3;
    cur = evaluate(chain, target, settings, q, seed, lambda);
    if (trace) trace->accepted.push_back({phase, cur.objective, cur.residual});
  }
  return std::nullopt;
}

std::optional<JointConfig> solve_ik_newton(const SerialChain& chain, const Pose& target,
                                           const JointConfig& q0, const IkSettings& settings,
                                           IkTrace* trace) {
  settings.validate();
  const auto w = settings.task_weight.asDiagonal();
  JointConfig q = clamp_to_limits(chain, q0);
  for (int it = 0; it < settings.max_iters; ++it) {
    if (trace) trace->iterations = it + 1;
    const Vector6d e = pose_error(forward_kinematics(chain, q), target);
    if (trace) trace->accepted.push_back({0, 0.5 * e.dot(w * e), weighted_residual(e, settings)});
    const Jacobian jac = jacobian(chain, q);
    Eigen::MatrixXd normal = jac.transpose() * w * jac;
    normal.diagonal().array() += settings.damping;
    const Eigen::VectorXd delta = normal.ldlt().solve(jac.transpose() * (w * e));
    const JointConfig next = clamp_to_limits(chain, q + settings.step * delta);
    if (!next.allFinite()) return std::nullopt;
    const double moved2 = (next - q).squaredNorm();
    q = next;
    if (moved2 <= settings.convergence_eps) break;
  }
  const double residual =
      weighted_residual(pose_error(forward_kinematics(chain, q), target), settings);
  if (!q.allFinite() || !(residual <= settings.residual_tol)) return std::nullopt;
  return q;
}

std::vector<JointConfig> downsample(const std::vector<JointConfig>& solutions, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("downsample eps must be > 0");
  std::vector<JointConfig> kept;
  for (const JointConfig& q : solutions) {
    bool distinct = true;
    for (const JointConfig& k : kept) {
      if ((q - k).norm() <= eps) {
        distinct = false;
        break;
      }
    }
    if (distinct) kept.push_back(q);
  }
  return kept;
}

GoalSet sample_goal_set(const SerialChain& chain, const RobotSphereModel& model, const World& world,
                        const SeedDatabase& db, const Pose& target, const IkSettings& settings,
                        const GoalSetOptions& options) {
  if (db.dof() != chain.dof() || db.chain_hash() != chain.hash()) {
    throw std::invalid_argument("seed database was built for a different chain");
  }
  const std::vector<JointConfig> seeds = db.query_seeds(target, options.k);
  std::vector<std::optional<JointConfig>> solved(seeds.size());
  if (options.parallel) {
    std::vector<std::future<std::optional<JointConfig>>> jobs;
    for (const JointConfig& s : seeds) {
      jobs.push_back(std::async(std::launch::async,
                                [&, s] { return solve_ik_sqp(chain, target, s, settings); }));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) solved[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      solved[i] = solve_ik_sqp(chain, target, seeds[i], settings);
    }
  }
  // Merged in seed order, so the result does not depend on scheduling.
  std::vector<JointConfig> valid;
  for (const auto& s : solved) {
    if (s && is_free(chain, model, world, *s)) valid.push_back(*s);
  }
  GoalSet goals;
  goals.target = target;
  goals.configs = downsample(valid, options.dedup_eps);
  if (goals.configs.empty()) {
    throw PlanningError(ErrorCode::kNoReachableGoal,
                        "no collision-free IK solution found for the goal pose");
  }
  return goals;
}

}  // namespace manyrrt
