#include "manyrrt/kinematics.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "manyrrt/io.hpp"

namespace manyrrt {

namespace {

void check_dimension(const SerialChain& chain, const JointConfig& q) {
  if (q.size() != chain.dof()) {
    throw std::invalid_argument("joint configuration has " + std::to_string(q.size()) +
                                " values, chain '" + chain.name() + "' has " +
                                std::to_string(chain.dof()) + " joints");
  }
}

class Fnv1a {
 public:
  void add(const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= bytes[i];
      state_ *= 1099511628211ULL;
    }
  }
  void add(double v) { add(&v, sizeof v); }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 14695981039346656037ULL;
};

}  // namespace

SerialChain::SerialChain(std::string name, std::vector<Link> links)
    : name_(std::move(name)), links_(std::move(links)) {
  if (links_.empty()) throw std::invalid_argument("chain needs at least one link");
  lower_.resize(dof());
  upper_.resize(dof());
  double length_sum = 0.0;
  for (int j = 0; j < dof(); ++j) {
    Link& l = links_[static_cast<std::size_t>(j)];
    const double n = l.axis.norm();
    if (!(n > 1e-12)) throw std::invalid_argument("link " + std::to_string(j) + " has a zero axis");
    l.axis /= n;
    if (!(l.lower < l.upper)) {
      throw std::invalid_argument("link " + std::to_string(j) + " has q_min >= q_max");
    }
    lower_[j] = l.lower;
    upper_[j] = l.upper;
    length_sum += l.offset.norm();
  }
  reach_ = forward_kinematics(*this, JointConfig::Zero(dof())).position.norm();
  if (!(reach_ > 0.0) || std::abs(reach_ - length_sum) > 1e-9) {
    throw std::invalid_argument("chain '" + name_ +
                                "': zero configuration must be the fully extended arm");
  }
}

bool SerialChain::within_limits(const JointConfig& q) const {
  return q.size() == dof() && (q.array() >= lower_.array()).all() &&
         (q.array() <= upper_.array()).all();
}

std::uint64_t SerialChain::hash() const {
  Fnv1a h;
  for (const Link& l : links_) {
    for (int i = 0; i < 3; ++i) h.add(l.axis[i]);
    for (int i = 0; i < 3; ++i) h.add(l.offset[i]);
    h.add(l.lower);
    h.add(l.upper);
  }
  return h.value();
}

LinkFrames link_frames(const SerialChain& chain, const JointConfig& q) {
  check_dimension(chain, q);
  LinkFrames out;
  out.joint_frames.reserve(static_cast<std::size_t>(chain.dof()));
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (int j = 0; j < chain.dof(); ++j) {
    const Link& l = chain.link(j);
    t.linear() = t.linear() * Eigen::AngleAxisd(q[j], l.axis).toRotationMatrix();
    out.joint_frames.push_back(t);
    t.translation() += t.linear() * l.offset;
  }
  out.end_effector = t;
  return out;
}

Pose forward_kinematics(const SerialChain& chain, const JointConfig& q) {
  const Eigen::Isometry3d ee = link_frames(chain, q).end_effector;
  Pose p;
  p.position = ee.translation();
  p.orientation = Eigen::Quaterniond(ee.linear()).normalized();
  return p;
}

Jacobian jacobian(const SerialChain& chain, const JointConfig& q) {
  const LinkFrames frames = link_frames(chain, q);
  const Eigen::Vector3d tip = frames.end_effector.translation();
  Jacobian jac(6, chain.dof());
  for (int j = 0; j < chain.dof(); ++j) {
    const Eigen::Isometry3d& f = frames.joint_frames[static_cast<std::size_t>(j)];
    // Rotating about the joint axis does not move the axis itself.
    const Eigen::Vector3d axis = f.linear() * chain.link(j).axis;
    jac.col(j).head<3>() = axis.cross(tip - f.translation());
    jac.col(j).tail<3>() = axis;
  }
  return jac;
}

JointConfig clamp_to_limits(const SerialChain& chain, const JointConfig& q) {
  check_dimension(chain, q);
  return q.cwiseMax(chain.lower()).cwiseMin(chain.upper());
}

Vector6d pose_error(const Pose& current, const Pose& target) {
  Vector6d e;
  e.head<3>() = target.position - current.position;
  const Eigen::AngleAxisd rot(target.orientation * current.orientation.conjugate());
  e.tail<3>() = rot.angle() * rot.axis();
  return e;
}

SerialChain planar_2dof() {
  std::vector<Link> links(2);
  for (Link& l : links) {
    l.axis = Eigen::Vector3d::UnitZ();
    l.offset = Eigen::Vector3d(1.0, 0.0, 0.0);
    l.lower = -M_PI;
    l.upper = M_PI;
  }
  return SerialChain("planar2", std::move(links));
}

SerialChain generic_6dof() {
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d y = Eigen::Vector3d::UnitY();
  const double lim = M_PI;
  std::vector<Link> links = {
      {z, {0, 0, 0.15}, -lim, lim},  // base yaw; shoulder height
      {y, {0, 0, 0.45}, -lim, lim},  // shoulder
      {y, {0, 0, 0.40}, -lim, lim},  // elbow
      {z, {0, 0, 0.10}, -lim, lim},
      {y, {0, 0, 0.10}, -lim, lim},
      {z, {0, 0, 0.10}, -lim, lim},
  };
  return SerialChain("generic6", std::move(links));
}

SerialChain generic_7dof() {
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d y = Eigen::Vector3d::UnitY();
  std::vector<Link> links = {
      {z, {0, 0, 0.15}, -2.9, 2.9}, {y, {0, 0, 0.10}, -1.8, 1.8},
      {z, {0, 0, 0.20}, -2.9, 2.9}, {y, {0, 0, 0.15}, -3.0, 3.0},
      {z, {0, 0, 0.10}, -2.9, 2.9}, {y, {0, 0, 0.08}, -3.0, 3.0},
      {z, {0, 0, 0.07}, -2.9, 2.9},
  };
  return SerialChain("generic7", std::move(links));
}

SerialChain chain_by_name_or_path(const std::string& spec) {
  if (spec == "planar2") return planar_2dof();
  if (spec == "generic6") return generic_6dof();
  if (spec == "generic7") return generic_7dof();
  return load_chain(spec);
}

}  // namespace manyrrt
