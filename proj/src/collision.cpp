#include "manyrrt/collision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace manyrrt {

namespace {

double segment_point_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                              const Eigen::Vector3d& p) {
  const Eigen::Vector3d ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

bool boxes_overlap(const Eigen::Vector3d& lo1, const Eigen::Vector3d& hi1,
                   const Eigen::Vector3d& lo2, const Eigen::Vector3d& hi2) {
  return (lo1.array() <= hi2.array()).all() && (lo2.array() <= hi1.array()).all();
}

std::uint64_t fnv(std::uint64_t h, double v) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(&v);
  for (std::size_t i = 0; i < sizeof v; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

constexpr std::uint32_t kLeafSize = 4;

}  // namespace

World::World(std::vector<Sphere> obstacles, Aabb bounds)
    : obstacles_(std::move(obstacles)), bounds_(bounds) {
  for (const Sphere& s : obstacles_) {
    if (!(s.radius > 0.0)) throw std::invalid_argument("obstacle radius must be positive");
  }
  order_.resize(obstacles_.size());
  std::iota(order_.begin(), order_.end(), 0U);
  if (!obstacles_.empty()) {
    bvh_.reserve(2 * obstacles_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(obstacles_.size()));
  }
}

std::int32_t World::build(std::uint32_t begin, std::uint32_t end) {
  BvhNode node;
  node.lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  node.hi = -node.lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Sphere& s = obstacles_[order_[i]];
    node.lo = node.lo.cwiseMin((s.center.array() - s.radius).matrix());
    node.hi = node.hi.cwiseMax((s.center.array() + s.radius).matrix());
  }
  node.begin = begin;
  node.end = end;
  const auto index = static_cast<std::int32_t>(bvh_.size());
  bvh_.push_back(node);
  if (end - begin <= kLeafSize) return index;

  Eigen::Index axis = 0;
  (node.hi - node.lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t x, std::uint32_t y) {
                     const double cx = obstacles_[x].center[axis];
                     const double cy = obstacles_[y].center[axis];
                     return cx < cy || (cx == cy && x < y);
                   });
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  bvh_[static_cast<std::size_t>(index)].left = left;
  bvh_[static_cast<std::size_t>(index)].right = right;
  return index;
}

bool World::sphere_hits(const Eigen::Vector3d& center, double radius) const {
  std::vector<std::uint32_t> hits;
  capsule_candidates(center, center, radius, hits);
  return !hits.empty();
}

void World::capsule_candidates(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius,
                               std::vector<std::uint32_t>& out) const {
  if (bvh_.empty()) return;
  const Eigen::Vector3d lo = a.cwiseMin(b).array() - radius;
  const Eigen::Vector3d hi = a.cwiseMax(b).array() + radius;
  std::int32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const BvhNode& n = bvh_[static_cast<std::size_t>(stack[--top])];
    if (!boxes_overlap(lo, hi, n.lo, n.hi)) continue;
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const Sphere& s = obstacles_[order_[i]];
        if (segment_point_distance(a, b, s.center) <= radius + s.radius) out.push_back(order_[i]);
      }
      continue;
    }
    stack[top++] = n.left;
    stack[top++] = n.right;
  }
}

std::uint64_t World::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (const Sphere& s : obstacles_) {
    for (int i = 0; i < 3; ++i) h = fnv(h, s.center[i]);
    h = fnv(h, s.radius);
  }
  for (int i = 0; i < 3; ++i) h = fnv(fnv(h, bounds_.min[i]), bounds_.max[i]);
  return h;
}

RobotSphereModel::RobotSphereModel(std::vector<LinkSpheres> links) : links_(std::move(links)) {
  for (const LinkSpheres& l : links_) {
    if (l.centers.empty() || !(l.radius > 0.0)) {
      throw std::invalid_argument("every link needs at least one sphere of positive radius");
    }
  }
}

RobotSphereModel RobotSphereModel::for_chain(const SerialChain& chain) {
  std::vector<LinkSpheres> links;
  for (const Link& l : chain.links()) {
    const double length = l.offset.norm();
    LinkSpheres ls;
    ls.radius = 0.05 * length;
    // Spacing of 1.5 r keeps neighbouring spheres overlapping.
    const int count = std::max(3, static_cast<int>(std::ceil(length / (1.5 * ls.radius))) + 1);
    for (int i = 0; i < count; ++i) {
      ls.centers.push_back(l.offset * (static_cast<double>(i) / (count - 1)));
    }
    links.push_back(std::move(ls));
  }
  return RobotSphereModel(std::move(links));
}

bool is_free(const SerialChain& chain, const RobotSphereModel& model, const World& world,
             const JointConfig& q) {
  if (!chain.within_limits(q)) return false;
  if (world.empty()) return true;
  thread_local std::vector<std::uint32_t> candidates;
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  for (int j = 0; j < chain.dof(); ++j) {
    const Link& link = chain.link(j);
    rot = rot * Eigen::AngleAxisd(q[j], link.axis).toRotationMatrix();
    const Eigen::Vector3d tip = origin + rot * link.offset;
    const auto& spheres = model.links()[static_cast<std::size_t>(j)];
    candidates.clear();
    world.capsule_candidates(origin, tip, spheres.radius, candidates);
    for (std::uint32_t idx : candidates) {
      const Sphere& obs = world.obstacles()[idx];
      const double reach = obs.radius + spheres.radius;
      for (const Eigen::Vector3d& c : spheres.centers) {
        if ((origin + rot * c - obs.center).squaredNorm() <= reach * reach) return false;
      }
    }
    origin = tip;
  }
  return true;
}

bool edge_free(const SerialChain& chain, const RobotSphereModel& model, const World& world,
               const JointConfig& a, const JointConfig& b, double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("edge resolution must be positive");
  const bool swap = std::lexicographical_compare(b.data(), b.data() + b.size(), a.data(),
                                                 a.data() + a.size());
  const JointConfig& from = swap ? b : a;
  const JointConfig& to = swap ? a : b;
  if (!is_free(chain, model, world, from)) return false;
  const double len = (to - from).norm();
  if (len == 0.0) return true;
  if (!is_free(chain, model, world, to)) return false;
  const double step = resolution / len;
  JointConfig q(from.size());
  for (int i = 1;; ++i) {
    const double t = i * step;
    if (t >= 1.0) break;
    q = from + t * (to - from);
    if (!is_free(chain, model, world, q)) return false;
  }
  return true;
}

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::Empty: return "empty";
    case EnvKind::Table: return "table";
    case EnvKind::Wall: return "wall";
    case EnvKind::Passage: return "passage";
    case EnvKind::Random: return "random";
    case EnvKind::Bifurcated: return "bifurcated";
  }
  return "unknown";
}

EnvKind env_kind_from_string(const std::string& name) {
  if (name == "empty") return EnvKind::Empty;
  if (name == "table") return EnvKind::Table;
  if (name == "wall") return EnvKind::Wall;
  if (name == "passage") return EnvKind::Passage;
  if (name == "random") return EnvKind::Random;
  if (name == "bifurcated") return EnvKind::Bifurcated;
  throw std::invalid_argument("unknown environment '" + name + "'");
}

}  // namespace manyrrt
