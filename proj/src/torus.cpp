#include "oqmap/torus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace oqmap {

TorusState::TorusState(Vector c, PlanckGrid g) : coeffs(std::move(c)), grid(g) {
  if (static_cast<std::size_t>(coeffs.size()) != grid.N()) {
    throw std::invalid_argument("TorusState: length differs from N");
  }
}

QuDitWord::QuDitWord(int base, std::vector<int> symbols) : base_(base), symbols_(std::move(symbols)) {
  if (base_ < 2) throw std::invalid_argument("QuDitWord: base must be >= 2");
  if (symbols_.empty()) throw std::invalid_argument("QuDitWord: empty word");
  for (int s : symbols_) {
    if (s < 0 || s >= base_) {
      throw std::invalid_argument("QuDitWord: symbol " + std::to_string(s) + " out of range for base " +
                                  std::to_string(base_));
    }
  }
}

QuDitWord QuDitWord::from_index(int base, int k, std::size_t index) {
  if (base < 2 || k < 1) throw std::invalid_argument("QuDitWord: bad base or length");
  const std::size_t n = checked_pow(static_cast<std::size_t>(base), k);
  if (index >= n) throw std::invalid_argument("QuDitWord: index out of range");
  std::vector<int> s(static_cast<std::size_t>(k));
  for (int l = k - 1; l >= 0; --l) {
    s[static_cast<std::size_t>(l)] = static_cast<int>(index % base);
    index /= base;
  }
  return QuDitWord(base, std::move(s));
}

std::size_t QuDitWord::index() const {
  std::size_t j = 0;
  for (int s : symbols_) j = j * static_cast<std::size_t>(base_) + static_cast<std::size_t>(s);
  return j;
}

std::string to_string(const QuDitWord& w) {
  std::ostringstream os;
  for (std::size_t i = 0; i < w.symbols().size(); ++i) {
    if (i) os << ' ';
    os << w.symbols()[i];
  }
  return os.str();
}

TrigObservable TrigObservable::constant(cplx c) {
  TrigObservable f;
  f.add(0, 0, c);
  return f;
}

TrigObservable TrigObservable::harmonic(int l, int m, cplx c) {
  TrigObservable f;
  f.add(l, m, c);
  return f;
}

TrigObservable TrigObservable::from_samples(const Eigen::MatrixXd& samples, int bandwidth) {
  const Eigen::Index g = samples.rows();
  if (g == 0 || samples.cols() != g) throw std::invalid_argument("from_samples: need a square grid");
  if (bandwidth < 0 || 2 * bandwidth >= g) throw std::invalid_argument("from_samples: bandwidth too large for grid");
  const int nb = 2 * bandwidth + 1;
  // partial transform over p: P(a, m)
  Eigen::MatrixXcd part(g, nb);
  for (Eigen::Index a = 0; a < g; ++a) {
    for (int mi = 0; mi < nb; ++mi) {
      const int m = mi - bandwidth;
      cplx acc = 0.0;
      for (Eigen::Index b = 0; b < g; ++b) acc += samples(a, b) * unit_root(-static_cast<std::int64_t>(m) * b, g);
      part(a, mi) = acc;
    }
  }
  TrigObservable f;
  const double scale = 1.0 / static_cast<double>(g * g);
  for (int li = 0; li < nb; ++li) {
    const int l = li - bandwidth;
    for (int mi = 0; mi < nb; ++mi) {
      cplx acc = 0.0;
      for (Eigen::Index a = 0; a < g; ++a) acc += part(a, mi) * unit_root(-static_cast<std::int64_t>(l) * a, g);
      f.add(l, mi - bandwidth, acc * scale);
    }
  }
  return f;
}

void TrigObservable::add(int l, int m, cplx c) {
  if (c == cplx(0.0)) return;
  coeffs_[{l, m}] += c;
}

cplx TrigObservable::coefficient(int l, int m) const {
  auto it = coeffs_.find({l, m});
  return it == coeffs_.end() ? cplx(0.0) : it->second;
}

bool TrigObservable::is_real(double tol) const {
  for (const auto& [key, c] : coeffs_) {
    if (std::abs(coefficient(-key.first, -key.second) - std::conj(c)) > tol) return false;
  }
  return true;
}

cplx TrigObservable::operator()(double q, double p) const {
  cplx s = 0.0;
  for (const auto& [key, c] : coeffs_) {
    s += c * std::polar(1.0, 2.0 * kPi * (key.first * q + key.second * p));
  }
  return s;
}

int TrigObservable::max_frequency() const {
  int r = 0;
  for (const auto& [key, c] : coeffs_) r = std::max({r, std::abs(key.first), std::abs(key.second)});
  return r;
}

TrigObservable TrigObservable::operator+(const TrigObservable& o) const {
  TrigObservable r = *this;
  for (const auto& [key, c] : o.coeffs_) r.add(key.first, key.second, c);
  return r;
}

TrigObservable TrigObservable::operator*(const TrigObservable& o) const {
  TrigObservable r;
  for (const auto& [k1, c1] : coeffs_) {
    for (const auto& [k2, c2] : o.coeffs_) r.add(k1.first + k2.first, k1.second + k2.second, c1 * c2);
  }
  return r;
}

TrigObservable TrigObservable::operator*(cplx s) const {
  TrigObservable r;
  for (const auto& [key, c] : coeffs_) r.add(key.first, key.second, c * s);
  return r;
}

Matrix dft(std::size_t n) {
  if (n < 1) throw std::invalid_argument("dft: N must be >= 1");
  check_dimension(n, "dft");
  const auto nn = static_cast<std::int64_t>(n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix f(nn, nn);
  for (std::int64_t j = 0; j < nn; ++j) {
    for (std::int64_t jp = 0; jp < nn; ++jp) f(j, jp) = s * unit_root(-((j * jp) % nn), nn);
  }
  return f;
}

Matrix inverse_dft(std::size_t n) { return dft(n).adjoint(); }

QuantumMap dft_matrix(const PlanckGrid& grid) {
  return {dft(grid.N()), grid, {"dft", {{"N", std::to_string(grid.N())}}}};
}

QuantumMap walsh_matrix(int D, int k) {
  PlanckGrid grid = PlanckGrid::power(D, k);
  const std::size_t n = grid.N();
  check_dimension(n, "walsh_matrix");
  std::vector<int> digits(n * static_cast<std::size_t>(k));
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t x = j;
    for (int l = k - 1; l >= 0; --l) {
      digits[j * k + l] = static_cast<int>(x % D);
      x /= D;
    }
  }
  const double s = std::pow(static_cast<double>(D), -0.5 * k);
  Matrix w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const int* a = &digits[j * k];
    for (std::size_t jp = 0; jp < n; ++jp) {
      const int* b = &digits[jp * k];
      int e = 0;
      for (int l = 0; l < k; ++l) e += a[l] * b[k - 1 - l];
      w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(jp)) = s * unit_root(-(e % D), D);
    }
  }
  return {std::move(w), grid, {"walsh", {{"D", std::to_string(D)}, {"k", std::to_string(k)}}}};
}

Vector tensor_product(std::span<const Vector> factors) {
  if (factors.empty()) throw std::invalid_argument("tensor_product: no factors");
  Vector r = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) {
    const Vector& f = factors[i];
    Vector next(r.size() * f.size());
    for (Eigen::Index a = 0; a < r.size(); ++a) next.segment(a * f.size(), f.size()) = r[a] * f;
    r = std::move(next);
  }
  return r;
}

QuantumMap weyl_quantize(const TrigObservable& f, const PlanckGrid& grid) {
  const std::size_t n = grid.N();
  check_dimension(n, "weyl_quantize");
  const auto nn = static_cast<std::int64_t>(n);
  Matrix op = Matrix::Zero(nn, nn);
  for (const auto& [key, c] : f.coefficients()) {
    const std::int64_t l = key.first;
    const std::int64_t m = key.second;
    if (std::abs(m) >= nn) {
      throw std::invalid_argument("weyl_quantize: |m| must be < N");
    }
    for (std::int64_t j = 0; j < nn; ++j) {
      std::int64_t row = (j - m) % nn;
      if (row < 0) row += nn;
      // phase exp(pi i (2 j l - m l) / N) with integer numerator mod 2N
      const std::int64_t num = ((2 * j * l - m * l) % (2 * nn) + 2 * nn) % (2 * nn);
      op(row, j) += c * unit_root(num, 2 * nn);
    }
  }
  return {std::move(op), grid, {"weyl", {{"N", std::to_string(n)}}}};
}

}  // namespace oqmap
