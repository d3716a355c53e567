#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "manyrrt/kinematics.hpp"

namespace manyrrt {

struct Sphere {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;
};

struct Aabb {
  Eigen::Vector3d min = Eigen::Vector3d::Constant(-1.0);
  Eigen::Vector3d max = Eigen::Vector3d::Constant(1.0);
};

/// Static set of obstacle spheres with a bounding-volume hierarchy for
/// overlap queries. Immutable after construction.
class World {
 public:
  World() = default;
  /// Throws std::invalid_argument on a non-positive radius.
  World(std::vector<Sphere> obstacles, Aabb bounds);

  const std::vector<Sphere>& obstacles() const { return obstacles_; }
  const Aabb& bounds() const { return bounds_; }
  bool empty() const { return obstacles_.empty(); }

  /// True iff the sphere overlaps any obstacle. Touching counts as overlap.
  bool sphere_hits(const Eigen::Vector3d& center, double radius) const;

  /// Appends the indices of obstacles within `radius` of the segment a-b.
  void capsule_candidates(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius,
                          std::vector<std::uint32_t>& out) const;

  std::uint64_t hash() const;

 private:
  struct BvhNode {
    Eigen::Vector3d lo;
    Eigen::Vector3d hi;
    std::int32_t left = -1;  // leaf when < 0
    std::int32_t right = -1;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Sphere> obstacles_;
  std::vector<std::uint32_t> order_;
  std::vector<BvhNode> bvh_;
  Aabb bounds_;
};

/// Collision spheres attached to each link, in the joint frame of that link.
class RobotSphereModel {
 public:
  struct LinkSpheres {
    std::vector<Eigen::Vector3d> centers;
    double radius = 0.0;
  };

  explicit RobotSphereModel(std::vector<LinkSpheres> links);

  /// Spheres of radius 0.05 * link length, spaced evenly from the joint to the
  /// link tip, with neighbouring spheres overlapping.
  static RobotSphereModel for_chain(const SerialChain& chain);

  const std::vector<LinkSpheres>& links() const { return links_; }

 private:
  std::vector<LinkSpheres> links_;
};

/// True iff q is within the joint limits and no robot sphere overlaps an
/// obstacle. Self-collision is not checked.
bool is_free(const SerialChain& chain, const RobotSphereModel& model, const World& world,
             const JointConfig& q);

/// Checks the straight joint-space segment at spacing `resolution` (radians),
/// always including both endpoints. Sampling starts from the
/// lexicographically smaller endpoint so the result is symmetric.
bool edge_free(const SerialChain& chain, const RobotSphereModel& model, const World& world,
               const JointConfig& a, const JointConfig& b, double resolution);

/// Bundles what planners need to test configurations and edges.
struct CollisionContext {
  const SerialChain& chain;
  const RobotSphereModel& model;
  const World& world;
  double edge_resolution = 0.05;

  bool is_free(const JointConfig& q) const { return manyrrt::is_free(chain, model, world, q); }
  bool edge_free(const JointConfig& a, const JointConfig& b) const {
    return manyrrt::edge_free(chain, model, world, a, b, edge_resolution);
  }
};

enum class EnvKind { Empty, Table, Wall, Passage, Random, Bifurcated };

std::string to_string(EnvKind kind);
/// Accepts lowercase names; throws std::invalid_argument otherwise.
EnvKind env_kind_from_string(const std::string& name);

struct EnvOptions {
  int random_obstacles = 20;
  /// Keep Random obstacle centers in the z = 0 plane (for planar arms).
  bool planar = false;
};

/// Geometry of the generated environments, in units of the reach l.
struct EnvLayout {
  static constexpr double kBaseClearance = 0.2;
  static constexpr double kTableSphereRadius = 0.06;
  static constexpr double kTableSpacing = 0.08;
  static constexpr double kTableRadius = 1.0;
  static constexpr double kWallSphereRadius = 0.05;
  static constexpr double kWallSpacing = 0.065;
  static constexpr double kWallXMin = 0.25;
  static constexpr double kWallXMax = 1.1;
  static constexpr double kWallZMax = 0.9;
  static constexpr double kOpeningSide = 0.3;
  static constexpr double kOpeningX = 0.6;
  static constexpr double kOpeningZ = 0.45;
  static constexpr double kRandomShellMin = 0.25;
  static constexpr double kRandomShellMax = 0.9;
  static constexpr double kRandomRadiusMin = 0.05;
  static constexpr double kRandomRadiusMax = 0.12;
  // Ring in the z = 0 plane just inside full reach. A planar arm can only
  // switch elbow branches through the straightened pose, which the ring
  // blocks, so free space splits in two.
  static constexpr double kRingRadius = 0.975;
  static constexpr double kRingSphereRadius = 0.04;
  static constexpr double kRingSpacing = 0.05;
};

/// Pure function of its arguments. Throws std::invalid_argument if reach <= 0.
World make_environment(EnvKind kind, double reach, std::uint64_t seed,
                       const EnvOptions& options = {});

}  // namespace manyrrt
