#include <random>

#include <gtest/gtest.h>

#include "manyrrt/kinematics.hpp"
#include "manyrrt/tree.hpp"
#include "oracles.hpp"

using namespace manyrrt;

namespace {

void expect_pose_matches_oracle(const SerialChain& chain, const JointConfig& q) {
  const Pose p = forward_kinematics(chain, q);
  const Eigen::Matrix4d T = oracle::fk(chain, q);
  EXPECT_LT((p.position - T.topRightCorner<3, 1>()).norm(), 1e-12);
  EXPECT_LT((p.orientation.toRotationMatrix() - T.topLeftCorner<3, 3>()).norm(), 1e-12);
}

}  // namespace

TEST(Kinematics, ZeroConfigurationIsStraight) {
  for (const auto& chain : {planar_2dof(), generic_6dof(), generic_7dof()}) {
    const Pose p = forward_kinematics(chain, JointConfig::Zero(chain.dof()));
    EXPECT_NEAR(p.position.norm(), chain.reach(), 1e-12) << chain.name();
  }
  EXPECT_DOUBLE_EQ(planar_2dof().reach(), 2.0);
  EXPECT_NEAR(generic_6dof().reach(), 1.3, 1e-12);
}

TEST(Kinematics, PlanarElbowRightAngle) {
  const auto chain = planar_2dof();
  JointConfig q(2);
  q << 0.0, M_PI / 2;
  EXPECT_LT((forward_kinematics(chain, q).position - Eigen::Vector3d(1, 1, 0)).norm(), 1e-12);
}

TEST(Kinematics, MatchesHomogeneousTransformOracle) {
  std::mt19937_64 rng(3);
  for (const auto& chain : {planar_2dof(), generic_6dof(), generic_7dof()}) {
    for (int i = 0; i < 200; ++i) expect_pose_matches_oracle(chain, uniform_config(chain, rng));
  }
}

TEST(Kinematics, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (const auto& chain : {generic_6dof(), generic_7dof()}) {
    for (int i = 0; i < 100; ++i) {
      const JointConfig q = uniform_config(chain, rng);
      const double err = (jacobian(chain, q) - oracle::jacobian_fd(chain, q)).cwiseAbs().maxCoeff();
      EXPECT_LE(err, 1e-5) << chain.name();
    }
  }
}

TEST(Kinematics, JacobianShapeAndLinearRowsFirst) {
  const auto chain = planar_2dof();
  const Jacobian J = jacobian(chain, JointConfig::Zero(2));
  ASSERT_EQ(J.cols(), 2);
  // Straight arm along x: joint 1 moves the tip along +y by the full reach.
  EXPECT_NEAR(J(1, 0), 2.0, 1e-12);
  EXPECT_NEAR(J(5, 0), 1.0, 1e-12);
  EXPECT_NEAR(J(0, 0), 0.0, 1e-12);
}

TEST(Kinematics, PoseErrorVanishesAtTarget) {
  const auto chain = generic_6dof();
  std::mt19937_64 rng(5);
  const Pose p = forward_kinematics(chain, uniform_config(chain, rng));
  EXPECT_LT(pose_error(p, p).norm(), 1e-12);

  Pose rotated = p;
  rotated.orientation = Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitX()) * p.orientation;
  const Vector6d e = pose_error(p, rotated);
  EXPECT_LT(e.head<3>().norm(), 1e-12);
  EXPECT_NEAR(e.tail<3>().x(), 0.3, 1e-12);
}

TEST(Kinematics, LimitsAndClamp) {
  const auto chain = generic_7dof();
  JointConfig q = JointConfig::Constant(7, 10.0);
  EXPECT_FALSE(chain.within_limits(q));
  EXPECT_TRUE(chain.within_limits(clamp_to_limits(chain, q)));
  EXPECT_TRUE(chain.within_limits(JointConfig::Zero(7)));
}

TEST(Kinematics, RejectsBadChains) {
  EXPECT_THROW(SerialChain("bad", {{Eigen::Vector3d::UnitZ(), {1, 0, 0}, 1.0, -1.0}}), std::invalid_argument);
  EXPECT_THROW(SerialChain("bad", {{Eigen::Vector3d::Zero(), {1, 0, 0}, -1.0, 1.0}}), std::invalid_argument);
}

TEST(Kinematics, HashIsStableAndDiscriminating) {
  EXPECT_EQ(generic_6dof().hash(), generic_6dof().hash());
  EXPECT_NE(generic_6dof().hash(), generic_7dof().hash());
}
