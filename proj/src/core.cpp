#include "oqmap/core.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <random>

namespace oqmap {

namespace {
std::atomic<std::size_t> g_max_dimension{std::size_t{1} << 20};
}

std::size_t max_dimension() { return g_max_dimension.load(); }

void set_max_dimension(std::size_t n) {
  if (n == 0) throw std::invalid_argument("size limit must be positive");
  g_max_dimension.store(n);
}

void check_dimension(std::size_t n, const char* what) {
  if (n > max_dimension()) {
    throw SizeLimitError(std::string(what) + ": dimension " + std::to_string(n) +
                         " exceeds size limit " + std::to_string(max_dimension()));
  }
}

std::size_t checked_pow(std::size_t base, int exp) {
  if (exp < 0) throw std::invalid_argument("negative exponent");
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::size_t>::max() / base) {
      throw SizeLimitError("integer power overflows");
    }
    r *= base;
  }
  return r;
}

cplx unit_root(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw std::invalid_argument("unit_root: denominator must be positive");
  std::int64_t r = num % den;
  if (r < 0) r += den;
  if ((4 * r) % den == 0) {
    switch ((4 * r) / den) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  // keep the angle in (-pi, pi] for accuracy
  if (2 * r > den) r -= den;
  const double a = 2.0 * kPi * static_cast<double>(r) / static_cast<double>(den);
  return {std::cos(a), std::sin(a)};
}

PlanckGrid::PlanckGrid(std::size_t n) : n_(n) {
  if (n < 1) throw std::invalid_argument("PlanckGrid: N must be >= 1");
}

PlanckGrid PlanckGrid::power(int base, int k) {
  if (base < 2) throw std::invalid_argument("PlanckGrid: base must be >= 2");
  if (k < 1) throw std::invalid_argument("PlanckGrid: k must be >= 1");
  PlanckGrid g(checked_pow(static_cast<std::size_t>(base), k));
  g.base_ = base;
  g.k_ = k;
  return g;
}

double operator_norm(const Matrix& a, double tol, int max_iter) {
  if (a.size() == 0) return 0.0;
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  Vector v(a.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx(gauss(rng), gauss(rng));
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = a * v;
    const double s = w.norm();
    if (s == 0.0) return 0.0;
    Vector u = a.adjoint() * w;
    const double un = u.norm();
    if (un == 0.0) return s;
    v = u / un;
    if (std::abs(s - sigma) <= tol * s) return s;
    sigma = s;
  }
  return sigma;
}

}  // namespace oqmap
