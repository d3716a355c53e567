#include "manyrrt/tree.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace manyrrt {

namespace {

std::span<const double> as_span(const JointConfig& q) {
  return {q.data(), static_cast<std::size_t>(q.size())};
}

double unit_ball_volume(int m) {
  return std::pow(M_PI, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

}  // namespace

PlannerConfig PlannerConfig::defaults_for(const SerialChain& chain) {
  PlannerConfig c;
  c.extend_step = chain.dof() < 6 ? 0.1 : 0.15;
  c.rewire_radius_scale = optimal_rewire_scale(chain);
  return c;
}

void PlannerConfig::validate() const {
  if (!(extend_step > 0.0)) throw std::invalid_argument("extend_step must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(max_runtime_ms > 0.0)) throw std::invalid_argument("max_runtime_ms must be > 0");
  if (nodes_max < 1) throw std::invalid_argument("nodes_max must be >= 1");
  if (!(goal_bias >= 0.0 && goal_bias <= 1.0)) throw std::invalid_argument("goal_bias must be in [0, 1]");
  if (!(rewire_radius_scale > 0.0)) throw std::invalid_argument("rewire_radius_scale must be > 0");
  if (!(edge_resolution > 0.0)) throw std::invalid_argument("edge_resolution must be > 0");
}

double optimal_rewire_scale(const SerialChain& chain) {
  const int m = chain.dof();
  const double volume = (chain.upper() - chain.lower()).prod();
  return 2.0 * std::pow(1.0 + 1.0 / m, 1.0 / m) * std::pow(volume / unit_ball_volume(m), 1.0 / m);
}

double rewire_radius(const PlannerConfig& config, int dof, std::size_t n) {
  if (n <= 1) return 0.0;
  const double nd = static_cast<double>(n);
  const double r = config.rewire_radius_scale * std::pow(std::log(nd) / nd, 1.0 / dof);
  return std::min(r, 4.0 * config.extend_step);
}

JointConfig uniform_config(const SerialChain& chain, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  JointConfig q(chain.dof());
  for (int j = 0; j < chain.dof(); ++j) {
    q[j] = chain.lower()[j] + unit(rng) * (chain.upper()[j] - chain.lower()[j]);
  }
  return q;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the combined value
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double path_cost(const std::vector<JointConfig>& waypoints) {
  double c = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) c += (waypoints[i] - waypoints[i - 1]).norm();
  return c;
}

Tree::Tree(JointConfig root)
    : index_(static_cast<int>(root.size())), mutex_(std::make_unique<std::shared_mutex>()) {
  if (root.size() == 0) throw std::invalid_argument("tree root must have at least one joint");
  Node n;
  n.config = std::move(root);
  index_.insert(as_span(n.config));
  nodes_.push_back(std::move(n));
  published_.store(1, std::memory_order_release);
}

Tree::Tree(Tree&& other) noexcept
    : nodes_(std::move(other.nodes_)),
      index_(std::move(other.index_)),
      mutex_(std::move(other.mutex_)),
      published_(other.published_.load()) {}

Tree& Tree::operator=(Tree&& other) noexcept {
  nodes_ = std::move(other.nodes_);
  index_ = std::move(other.index_);
  mutex_ = std::move(other.mutex_);
  published_.store(other.published_.load());
  return *this;
}

Tree::~Tree() = default;

std::size_t Tree::add(const JointConfig& q, std::size_t parent) {
  if (parent >= nodes_.size()) throw std::out_of_range("Tree::add: parent out of range");
  if (q.size() != dof()) throw std::invalid_argument("Tree::add: dimension mismatch");
  const std::size_t id = nodes_.size();
  {
    std::unique_lock lock(*mutex_);
    Node n;
    n.config = q;
    n.parent = static_cast<std::int32_t>(parent);
    n.cost = nodes_[parent].cost + (q - nodes_[parent].config).norm();
    nodes_.push_back(std::move(n));
    nodes_[parent].children.push_back(static_cast<std::int32_t>(id));
  }
  index_.insert(as_span(nodes_[id].config));
  published_.store(nodes_.size(), std::memory_order_release);
  return id;
}

bool Tree::is_ancestor(std::size_t ancestor, std::size_t node) const {
  for (std::int32_t cur = static_cast<std::int32_t>(node); cur >= 0;
       cur = nodes_[static_cast<std::size_t>(cur)].parent) {
    if (static_cast<std::size_t>(cur) == ancestor) return true;
  }
  return false;
}

void Tree::reparent(std::size_t child, std::size_t new_parent) {
  if (child == 0 || child >= nodes_.size() || new_parent >= nodes_.size()) {
    throw std::out_of_range("Tree::reparent: bad node index");
  }
  if (is_ancestor(child, new_parent)) throw std::logic_error("Tree::reparent would create a cycle");
  std::unique_lock lock(*mutex_);
  Node& c = nodes_[child];
  auto& siblings = nodes_[static_cast<std::size_t>(c.parent)].children;
  siblings.erase(std::find(siblings.begin(), siblings.end(), static_cast<std::int32_t>(child)));
  c.parent = static_cast<std::int32_t>(new_parent);
  nodes_[new_parent].children.push_back(static_cast<std::int32_t>(child));
  refresh_subtree_costs(child);
}

void Tree::refresh_subtree_costs(std::size_t root) {
  std::vector<std::size_t> stack{root};
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    Node& n = nodes_[i];
    const Node& p = nodes_[static_cast<std::size_t>(n.parent)];
    n.cost = p.cost + (n.config - p.config).norm();
    for (std::int32_t ch : n.children) stack.push_back(static_cast<std::size_t>(ch));
  }
}

std::size_t Tree::nearest(const JointConfig& q) const { return index_.nearest(as_span(q)); }

std::vector<std::size_t> Tree::near(const JointConfig& q, double radius) const {
  return index_.within_radius(as_span(q), radius);
}

std::vector<JointConfig> Tree::path_from_root(std::size_t i) const {
  std::vector<JointConfig> out;
  for (std::int32_t cur = static_cast<std::int32_t>(i); cur >= 0;
       cur = nodes_[static_cast<std::size_t>(cur)].parent) {
    out.push_back(nodes_[static_cast<std::size_t>(cur)].config);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

double Tree::total_cost() const {
  double s = 0.0;
  for (const Node& n : nodes_) s += n.cost;
  return s;
}

bool Tree::check_invariants(std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (nodes_.empty()) return fail("empty tree");
  if (nodes_[0].parent != -1 || nodes_[0].cost != 0.0) return fail("root must have no parent and zero cost");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.parent < 0 || static_cast<std::size_t>(n.parent) >= nodes_.size() ||
        static_cast<std::size_t>(n.parent) == i) {
      return fail("node " + std::to_string(i) + " has an invalid parent");
    }
    const Node& p = nodes_[static_cast<std::size_t>(n.parent)];
    const double expected = p.cost + (n.config - p.config).norm();
    if (std::abs(n.cost - expected) > 1e-9 * std::max(1.0, expected)) {
      return fail("node " + std::to_string(i) + " cost " + std::to_string(n.cost) + " != " +
                  std::to_string(expected));
    }
    if (std::count(p.children.begin(), p.children.end(), static_cast<std::int32_t>(i)) != 1) {
      return fail("node " + std::to_string(i) + " missing from its parent's children");
    }
    std::size_t steps = 0;
    for (std::int32_t cur = n.parent; cur > 0; cur = nodes_[static_cast<std::size_t>(cur)].parent) {
      if (++steps > nodes_.size()) return fail("cycle through node " + std::to_string(i));
    }
  }
  std::size_t child_links = 0;
  for (const Node& n : nodes_) child_links += n.children.size();
  if (child_links != nodes_.size() - 1) return fail("children lists do not match parent links");
  return true;
}

double Tree::cost_shared(std::size_t i) const {
  std::shared_lock lock(*mutex_);
  return nodes_[i].cost;
}

std::vector<JointConfig> Tree::path_from_root_shared(std::size_t i) const {
  std::shared_lock lock(*mutex_);
  return path_from_root(i);
}

void Tree::configs_since_shared(std::size_t from, std::vector<JointConfig>& out) const {
  std::shared_lock lock(*mutex_);
  for (std::size_t i = from; i < nodes_.size(); ++i) out.push_back(nodes_[i].config);
}

ExtendResult extend(Tree& tree, const JointConfig& target, const CollisionContext& ctx,
                    const PlannerConfig& config) {
  ExtendResult result;
  const std::size_t nearest = tree.nearest(target);
  const JointConfig& q_near = tree.config(nearest);
  const double d = (target - q_near).norm();
  if (d == 0.0) {
    result.status = ExtendStatus::kReached;
    result.index = nearest;
    return result;
  }
  const bool reaches = d <= config.extend_step;
  const JointConfig q_new = reaches ? target : JointConfig(q_near + (config.extend_step / d) * (target - q_near));
  if (!ctx.edge_free(q_near, q_new)) return result;

  const double radius = rewire_radius(config, tree.dof(), tree.size() + 1);
  result.neighbors = tree.near(q_new, radius);

  struct Candidate {
    double cost;
    std::size_t index;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(result.neighbors.size());
  for (std::size_t n : result.neighbors) {
    candidates.push_back({tree.cost(n) + (q_new - tree.config(n)).norm(), n});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.cost < b.cost || (a.cost == b.cost && a.index < b.index);
  });
  std::size_t parent = nearest;
  const double via_nearest = tree.cost(nearest) + d * std::min(1.0, config.extend_step / d);
  for (const Candidate& c : candidates) {
    if (c.cost >= via_nearest) break;
    if (c.index == nearest) break;
    if (ctx.edge_free(tree.config(c.index), q_new)) {
      parent = c.index;
      break;
    }
  }
  result.index = tree.add(q_new, parent);
  result.added = true;
  result.status = reaches ? ExtendStatus::kReached : ExtendStatus::kAdvanced;
  return result;
}

std::size_t rewire(Tree& tree, std::size_t index, const CollisionContext& ctx,
                   const PlannerConfig& config, const std::vector<std::size_t>* neighbors) {
  std::vector<std::size_t> queried;
  if (!neighbors) {
    queried = tree.near(tree.config(index), rewire_radius(config, tree.dof(), tree.size()));
    neighbors = &queried;
  }
  std::size_t rewired = 0;
  for (std::size_t n : *neighbors) {
    if (n == index || n == 0 || static_cast<std::int32_t>(n) == tree.node(index).parent) continue;
    const double via = tree.cost(index) + (tree.config(n) - tree.config(index)).norm();
    if (!(via < tree.cost(n) - 1e-12)) continue;
    if (tree.is_ancestor(n, index)) continue;
    if (!ctx.edge_free(tree.config(index), tree.config(n))) continue;
    tree.reparent(n, index);
    ++rewired;
  }
  return rewired;
}

}  // namespace manyrrt
