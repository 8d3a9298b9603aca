#pragma once

#include "oqmap/core.hpp"

#include <map>
#include <span>

namespace oqmap {

struct TorusState {
  Vector coeffs;
  PlanckGrid grid;

  TorusState(Vector c, PlanckGrid g);
  double norm() const { return coeffs.norm(); }
};

// Base-D digits eps_1 ... eps_k, eps_1 most significant.
class QuDitWord {
 public:
  QuDitWord(int base, std::vector<int> symbols);
  static QuDitWord from_index(int base, int k, std::size_t index);

  int base() const { return base_; }
  int length() const { return static_cast<int>(symbols_.size()); }
  // 1-based access to match eps_1 ... eps_k.
  int operator[](int l) const { return symbols_.at(static_cast<std::size_t>(l - 1)); }
  const std::vector<int>& symbols() const { return symbols_; }
  std::size_t index() const;

  bool operator==(const QuDitWord&) const = default;

 private:
  int base_;
  std::vector<int> symbols_;
};

std::string to_string(const QuDitWord& w);

// Finite Fourier series f(q,p) = sum fhat(l,m) exp(2 pi i (l q + m p)).
class TrigObservable {
 public:
  using Key = std::pair<int, int>;

  TrigObservable() = default;
  static TrigObservable constant(cplx c);
  static TrigObservable harmonic(int l, int m, cplx c = 1.0);
  // Coefficients of a sampled function on a G x G grid, keeping |l|,|m| <= bandwidth.
  static TrigObservable from_samples(const Eigen::MatrixXd& samples, int bandwidth);

  void add(int l, int m, cplx c);
  cplx coefficient(int l, int m) const;
  const std::map<Key, cplx>& coefficients() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }
  bool is_real(double tol = 1e-12) const;
  cplx operator()(double q, double p) const;
  int max_frequency() const;

  TrigObservable operator+(const TrigObservable& o) const;
  TrigObservable operator*(const TrigObservable& o) const;
  TrigObservable operator*(cplx s) const;

 private:
  std::map<Key, cplx> coeffs_;
};

QuantumMap dft_matrix(const PlanckGrid& grid);
Matrix dft(std::size_t n);
Matrix inverse_dft(std::size_t n);

QuantumMap walsh_matrix(int D, int k);

// Kronecker product with the first factor carrying the most significant digit.
Vector tensor_product(std::span<const Vector> factors);

QuantumMap weyl_quantize(const TrigObservable& f, const PlanckGrid& grid);

}  // namespace oqmap
