#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace manyrrt {

/// A point in configuration space: one angle per revolute joint, radians.
using JointConfig = Eigen::VectorXd;

/// 6 x m geometric Jacobian. Rows 0-2 are linear velocity, rows 3-5 angular.
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

using Vector6d = Eigen::Matrix<double, 6, 1>;

struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

/// One revolute joint followed by a rigid link.
///
/// The joint rotates about `axis` (unit vector, expressed in the frame left
/// by the previous link); the link then translates by `offset` in the rotated
/// frame. The zero configuration is the straightened arm.
struct Link {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  double lower = -M_PI;
  double upper = M_PI;
};

class SerialChain {
 public:
  /// Throws std::invalid_argument if a limit interval is empty, an axis is
  /// degenerate, or the zero configuration is not fully extended.
  SerialChain(std::string name, std::vector<Link> links);

  const std::string& name() const { return name_; }
  int dof() const { return static_cast<int>(links_.size()); }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(int j) const { return links_[static_cast<std::size_t>(j)]; }

  /// Distance from the base to the end effector when straightened (q = 0).
  double reach() const { return reach_; }

  const JointConfig& lower() const { return lower_; }
  const JointConfig& upper() const { return upper_; }
  bool within_limits(const JointConfig& q) const;

  /// Stable FNV-1a digest of the geometry and limits.
  std::uint64_t hash() const;

 private:
  std::string name_;
  std::vector<Link> links_;
  JointConfig lower_;
  JointConfig upper_;
  double reach_ = 0.0;
};

/// World-frame placement of every link for a configuration.
///
/// `joint_frames[j]` is the frame after joint j has rotated; link j spans
/// from its origin to `joint_frames[j] * offset_j`. `end_effector` is the
/// frame at the tip of the last link.
struct LinkFrames {
  std::vector<Eigen::Isometry3d> joint_frames;
  Eigen::Isometry3d end_effector = Eigen::Isometry3d::Identity();
};

LinkFrames link_frames(const SerialChain& chain, const JointConfig& q);

Pose forward_kinematics(const SerialChain& chain, const JointConfig& q);

Jacobian jacobian(const SerialChain& chain, const JointConfig& q);

JointConfig clamp_to_limits(const SerialChain& chain, const JointConfig& q);

/// Task-space error taking `current` to `target`: position difference
/// followed by the rotation vector (log map) of target * current^-1.
Vector6d pose_error(const Pose& current, const Pose& target);

/// Reference chains. The 6- and 7-DoF geometries are generic arms scaled to
/// 1.3 m and 0.85 m reach.
SerialChain planar_2dof();
SerialChain generic_6dof();
SerialChain generic_7dof();

/// Resolves "planar2", "generic6" or "generic7"; anything else is treated as
/// a chain file path.
SerialChain chain_by_name_or_path(const std::string& spec);

}  // namespace manyrrt
