#include <cmath>
#include <random>
#include <stdexcept>

#include "manyrrt/collision.hpp"

namespace manyrrt {

namespace {

using L = EnvLayout;

void add_table(std::vector<Sphere>& out, double l) {
  const double r = L::kTableSphereRadius * l;
  const double s = L::kTableSpacing * l;
  const int n = static_cast<int>(std::ceil(L::kTableRadius * l / s));
  for (int i = -n; i <= n; ++i) {
    for (int k = -n; k <= n; ++k) {
      const double x = i * s;
      const double y = k * s;
      const double rho = std::hypot(x, y);
      if (rho > L::kTableRadius * l || rho < L::kBaseClearance * l + r) continue;
      // Top surface of the table is the plane z = 0.
      out.push_back({Eigen::Vector3d(x, y, -r), r});
    }
  }
}

void add_wall(std::vector<Sphere>& out, double l, bool with_opening) {
  const double r = L::kWallSphereRadius * l;
  const double s = L::kWallSpacing * l;
  const double half = 0.5 * L::kOpeningSide * l;
  const double cx = L::kOpeningX * l;
  const double cz = L::kOpeningZ * l;
  for (double x = L::kWallXMin * l; x <= L::kWallXMax * l + 1e-12; x += s) {
    for (double z = 0.0; z <= L::kWallZMax * l + 1e-12; z += s) {
      if (with_opening && std::abs(x - cx) < half + r && std::abs(z - cz) < half + r) continue;
      out.push_back({Eigen::Vector3d(x, 0.0, z), r});
    }
  }
}

void add_random(std::vector<Sphere>& out, double l, std::uint64_t seed, const EnvOptions& opt) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double r_in = L::kRandomShellMin * l;
  const double r_out = L::kRandomShellMax * l;
  int placed = 0;
  while (placed < opt.random_obstacles) {
    Eigen::Vector3d dir;
    double rho;
    if (opt.planar) {
      const double theta = 2.0 * M_PI * unit(rng);
      dir = Eigen::Vector3d(std::cos(theta), std::sin(theta), 0.0);
      rho = std::sqrt(r_in * r_in + unit(rng) * (r_out * r_out - r_in * r_in));
    } else {
      do {
        dir = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
      } while (dir.norm() < 1e-9);
      dir.normalize();
      rho = std::cbrt(std::pow(r_in, 3) + unit(rng) * (std::pow(r_out, 3) - std::pow(r_in, 3)));
    }
    const double radius =
        L::kRandomRadiusMin * l + unit(rng) * (L::kRandomRadiusMax - L::kRandomRadiusMin) * l;
    if (rho - radius < L::kBaseClearance * l) continue;
    out.push_back({rho * dir, radius});
    ++placed;
  }
}

void add_ring(std::vector<Sphere>& out, double l) {
  const double rho = L::kRingRadius * l;
  const int n = static_cast<int>(std::ceil(2.0 * M_PI * rho / (L::kRingSpacing * l)));
  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * M_PI * i / n;
    out.push_back({Eigen::Vector3d(rho * std::cos(theta), rho * std::sin(theta), 0.0), L::kRingSphereRadius * l});
  }
}

}  // namespace

World make_environment(EnvKind kind, double reach, std::uint64_t seed, const EnvOptions& options) {
  if (!(reach > 0.0)) throw std::invalid_argument("environment reach must be positive");
  std::vector<Sphere> spheres;
  switch (kind) {
    case EnvKind::Empty:
      break;
    case EnvKind::Table:
      add_table(spheres, reach);
      break;
    case EnvKind::Wall:
      add_table(spheres, reach);
      add_wall(spheres, reach, false);
      break;
    case EnvKind::Passage:
      add_table(spheres, reach);
      add_wall(spheres, reach, true);
      break;
    case EnvKind::Random:
      add_random(spheres, reach, seed, options);
      break;
    case EnvKind::Bifurcated:
      add_ring(spheres, reach);
      break;
  }
  Aabb bounds;
  bounds.min = Eigen::Vector3d::Constant(-1.2 * reach);
  bounds.max = Eigen::Vector3d::Constant(1.2 * reach);
  return World(std::move(spheres), bounds);
}

}  // namespace manyrrt
