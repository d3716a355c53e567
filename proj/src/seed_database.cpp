#include <array>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "manyrrt/error.hpp"
#include "manyrrt/ik.hpp"

namespace manyrrt {

namespace {

constexpr std::array<char, 8> kMagic = {'M', 'R', 'R', 'T', 'S', 'E', 'E', 'D'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kAcceptanceWindow = 20000;
constexpr double kMinAcceptanceRate = 1e-4;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw PlanningError(ErrorCode::kFormat, "seed database: truncated file");
  return v;
}

}  // namespace

SeedDatabase::SeedDatabase(std::uint64_t chain_hash, std::uint64_t world_hash, int dof,
                           std::vector<Entry> entries)
    : chain_hash_(chain_hash), world_hash_(world_hash), dof_(dof), entries_(std::move(entries)) {
  for (const Entry& e : entries_) {
    if (e.config.size() != dof_) throw std::invalid_argument("seed database: dof mismatch");
    index_.insert(std::span<const double>(e.pose.position.data(), 3));
  }
}

SeedDatabase SeedDatabase::build(const SerialChain& chain, const RobotSphereModel& model,
                                 const World& world, std::size_t sample_count,
                                 std::uint64_t seed) {
  if (sample_count < 1) throw std::invalid_argument("seed database needs sample_count >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::uniform_real_distribution<double>> dist;
  for (int j = 0; j < chain.dof(); ++j) dist.emplace_back(chain.lower()[j], chain.upper()[j]);

  std::vector<Entry> entries;
  entries.reserve(sample_count);
  std::size_t window_attempts = 0;
  std::size_t window_accepted = 0;
  JointConfig q(chain.dof());
  while (entries.size() < sample_count) {
    for (int j = 0; j < chain.dof(); ++j) q[j] = dist[static_cast<std::size_t>(j)](rng);
    ++window_attempts;
    if (is_free(chain, model, world, q)) {
      ++window_accepted;
      entries.push_back({forward_kinematics(chain, q), q});
    }
    if (window_attempts == kAcceptanceWindow) {
      const double rate = static_cast<double>(window_accepted) / static_cast<double>(window_attempts);
      if (rate < kMinAcceptanceRate) {
        throw PlanningError(ErrorCode::kInfeasibleWorld,
                            "infeasible world: collision-free acceptance rate " +
                                std::to_string(rate) + " below 1e-4");
      }
      window_attempts = 0;
      window_accepted = 0;
    }
  }
  return SeedDatabase(chain.hash(), world.hash(), chain.dof(), std::move(entries));
}

std::vector<std::size_t> SeedDatabase::nearest_entries(const Pose& target, std::size_t k) const {
  if (k < 1) throw std::invalid_argument("seed query needs k >= 1");
  if (entries_.empty()) throw std::invalid_argument("seed query on empty database");
  return index_.k_nearest(std::span<const double>(target.position.data(), 3), k);
}

std::vector<JointConfig> SeedDatabase::query_seeds(const Pose& target, std::size_t k) const {
  std::vector<JointConfig> out;
  for (std::size_t id : nearest_entries(target, k)) out.push_back(entries_[id].config);
  return out;
}

void SeedDatabase::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write seed database '" + path + "'");
  out.write(kMagic.data(), kMagic.size());
  write_pod(out, kVersion);
  write_pod(out, chain_hash_);
  write_pod(out, world_hash_);
  write_pod(out, static_cast<std::uint32_t>(dof_));
  write_pod(out, static_cast<std::uint64_t>(entries_.size()));
  for (const Entry& e : entries_) {
    for (int i = 0; i < 3; ++i) write_pod(out, e.pose.position[i]);
    write_pod(out, e.pose.orientation.w());
    write_pod(out, e.pose.orientation.x());
    write_pod(out, e.pose.orientation.y());
    write_pod(out, e.pose.orientation.z());
    for (int j = 0; j < dof_; ++j) write_pod(out, e.config[j]);
  }
  if (!out) throw std::runtime_error("failed writing seed database '" + path + "'");
}

SeedDatabase SeedDatabase::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open seed database '" + path + "'");
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw PlanningError(ErrorCode::kFormat, "not a seed database file");
  if (read_pod<std::uint32_t>(in) != kVersion) {
    throw PlanningError(ErrorCode::kFormat, "unsupported seed database version");
  }
  const auto chain_hash = read_pod<std::uint64_t>(in);
  const auto world_hash = read_pod<std::uint64_t>(in);
  const auto dof = static_cast<int>(read_pod<std::uint32_t>(in));
  const auto count = read_pod<std::uint64_t>(in);
  std::vector<Entry> entries(count);
  for (Entry& e : entries) {
    for (int i = 0; i < 3; ++i) e.pose.position[i] = read_pod<double>(in);
    const double w = read_pod<double>(in);
    const double x = read_pod<double>(in);
    const double y = read_pod<double>(in);
    const double z = read_pod<double>(in);
    e.pose.orientation = Eigen::Quaterniond(w, x, y, z);
    e.config.resize(dof);
    for (int j = 0; j < dof; ++j) e.config[j] = read_pod<double>(in);
  }
  return SeedDatabase(chain_hash, world_hash, dof, std::move(entries));
}

}  // namespace manyrrt
