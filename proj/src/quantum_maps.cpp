#include "oqmap/quantum_maps.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace oqmap {

namespace {

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> normalize_kept(int D, const std::vector<int>& kept) {
  std::set<int> s(kept.begin(), kept.end());
  for (int x : s) {
    if (x < 0 || x >= D) throw std::invalid_argument("kept strip " + std::to_string(x) + " outside 0.." + std::to_string(D - 1));
  }
  return {s.begin(), s.end()};
}

// Places F_M at rows/cols [offset, offset+M) of the column-block operator, already multiplied by F_N^*.
void place_block(Matrix& b, const Matrix& fn_inv, std::size_t offset, std::size_t m) {
  const Matrix fm = dft(m);
  const auto o = static_cast<Eigen::Index>(offset);
  const auto mm = static_cast<Eigen::Index>(m);
  b.middleCols(o, mm).noalias() = fn_inv.middleCols(o, mm) * fm;
}

// Column j of the Walsh open baker has entries at rows (j mod D^{k-1}) D + d,
// value (F_D^*)_{d, eps_1} (or (F_D)_{d, eps_1} when forward is set) if eps_1 is kept.
Matrix walsh_tensor_assembly(int D, int k, const std::vector<bool>& keep, bool forward) {
  const std::size_t n = checked_pow(static_cast<std::size_t>(D), k);
  check_dimension(n, "walsh builder");
  const std::size_t tail = n / static_cast<std::size_t>(D);
  const double s = 1.0 / std::sqrt(static_cast<double>(D));
  Matrix b = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const int e1 = static_cast<int>(j / tail);
    if (!keep[static_cast<std::size_t>(e1)]) continue;
    const std::size_t base = (j % tail) * static_cast<std::size_t>(D);
    for (int d = 0; d < D; ++d) {
      const std::int64_t ex = forward ? -(d * e1) : d * e1;
      b(static_cast<Eigen::Index>(base + d), static_cast<Eigen::Index>(j)) = s * unit_root(ex, D);
    }
  }
  return b;
}

Matrix walsh_dense_assembly(int D, int k, const std::vector<bool>& keep, bool forward) {
  const std::size_t n = checked_pow(static_cast<std::size_t>(D), k);
  check_dimension(n, "walsh builder");
  const std::size_t tail = n / static_cast<std::size_t>(D);
  const auto t = static_cast<Eigen::Index>(tail);
  Matrix inner = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const Matrix wk1 = k > 1 ? walsh_matrix(D, k - 1).matrix : Matrix::Identity(1, 1);
  for (int e = 0; e < D; ++e) {
    if (keep[static_cast<std::size_t>(e)]) inner.block(e * t, e * t, t, t) = wk1;
  }
  const Matrix wk = walsh_matrix(D, k).matrix;
  if (forward) return wk * inner;
  return wk.adjoint() * inner;
}

QuantumMap walsh_builder(int D, int k, const std::vector<int>& kept, AssemblyPath path, bool forward,
                         const std::string& kind) {
  if (D < 2 || k < 1) throw std::invalid_argument("walsh builder: need D >= 2 and k >= 1");
  PlanckGrid grid = PlanckGrid::power(D, k);
  check_dimension(grid.N(), "walsh builder");
  const auto ks = normalize_kept(D, kept);
  std::vector<bool> keep(static_cast<std::size_t>(D), false);
  for (int x : ks) keep[static_cast<std::size_t>(x)] = true;
  if (path == AssemblyPath::automatic) path = grid.N() > 243 ? AssemblyPath::tensor : AssemblyPath::dense;
  Matrix m = path == AssemblyPath::tensor ? walsh_tensor_assembly(D, k, keep, forward)
                                          : walsh_dense_assembly(D, k, keep, forward);
  return {std::move(m), grid,
          {kind, {{"D", std::to_string(D)}, {"k", std::to_string(k)}, {"kept", join(ks)},
                  {"path", path == AssemblyPath::tensor ? "tensor" : "dense"}}}};
}

}  // namespace

QuantumMap build_open_baker(const BakerParams& params, const PlanckGrid& grid) {
  params.validate();
  const std::size_t n = grid.N();
  if (n % static_cast<std::size_t>(params.D1) != 0 || n % static_cast<std::size_t>(params.D2) != 0) {
    throw std::invalid_argument("build_open_baker: N=" + std::to_string(n) + " must be divisible by D1=" +
                                std::to_string(params.D1) + " and D2=" + std::to_string(params.D2));
  }
  check_dimension(n, "build_open_baker");
  const std::size_t m1 = n / params.D1, m2 = n / params.D2;
  const std::size_t off1 = params.l1 * m1;
  const std::size_t off2 = params.l2 * m2;
  const std::size_t gap = off2 - (off1 + m1);
  const std::size_t trailing = (params.D2 - params.l2 - 1) * m2;
  if (off1 + m1 + gap + m2 + trailing != n) throw std::logic_error("build_open_baker: block widths do not sum to N");
  const Matrix fn_inv = inverse_dft(n);
  Matrix b = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  place_block(b, fn_inv, off1, m1);
  place_block(b, fn_inv, off2, m2);
  return {std::move(b), grid,
          {"open-baker",
           {{"N", std::to_string(n)}, {"D1", std::to_string(params.D1)}, {"D2", std::to_string(params.D2)},
            {"l1", std::to_string(params.l1)}, {"l2", std::to_string(params.l2)}}}};
}

QuantumMap build_toy_baker(const PlanckGrid& grid) {
  const std::size_t n = grid.N();
  if (n % 3 != 0) throw std::invalid_argument("build_toy_baker: N=" + std::to_string(n) + " must be divisible by 3");
  check_dimension(n, "build_toy_baker");
  const std::size_t m = n / 3;
  const double s = 1.0 / std::sqrt(3.0);
  Matrix b = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t row = 0; row < n; ++row) {
    const auto r = static_cast<Eigen::Index>(row);
    const auto l = static_cast<Eigen::Index>(row / 3);
    b(r, l) = s;
    b(r, static_cast<Eigen::Index>(2 * m) + l) = s * unit_root(static_cast<std::int64_t>((2 * row) % 3), 3);
  }
  return {std::move(b), grid, {"toy", {{"N", std::to_string(n)}}}};
}

QuantumMap build_walsh_open_baker(int D, int k, const std::vector<int>& kept, AssemblyPath path) {
  return walsh_builder(D, k, kept, path, false, "walsh");
}

QuantumMap build_walsh_2baker(int k, AssemblyPath path) {
  return walsh_builder(2, k, {0, 1}, path, true, "walsh-2baker");
}

QuantumMap build_walsh_4baker(int k, AssemblyPath path) {
  return walsh_builder(4, k, {0, 1, 2, 3}, path, false, "walsh-4baker");
}

QuantumMap build_dft_4baker(int k) {
  PlanckGrid grid = PlanckGrid::power(4, k);
  const std::size_t n = grid.N();
  check_dimension(n, "build_dft_4baker");
  const std::size_t m = n / 4;
  const Matrix fn_inv = inverse_dft(n);
  Matrix b(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < 4; ++s) place_block(b, fn_inv, s * m, m);
  return {std::move(b), grid, {"dft-4baker", {{"k", std::to_string(k)}}}};
}

Matrix truncated_inverse_dft(int D, const std::vector<int>& kept) {
  const auto ks = normalize_kept(D, kept);
  Matrix t = Matrix::Zero(D, D);
  const Matrix f = inverse_dft(static_cast<std::size_t>(D));
  for (int c : ks) t.col(c) = f.col(c);
  return t;
}

OmegaBlock omega_block(int D, const std::vector<int>& kept) {
  if (D < 2) throw std::invalid_argument("omega_block: D must be >= 2");
  const auto ks = normalize_kept(D, kept);
  if (ks.empty()) throw std::invalid_argument("omega_block: kept set is empty");
  const double s = 1.0 / std::sqrt(static_cast<double>(D));
  const auto sz = static_cast<Eigen::Index>(ks.size());
  Matrix b(sz, sz);
  for (Eigen::Index r = 0; r < sz; ++r) {
    for (Eigen::Index c = 0; c < sz; ++c) b(r, c) = s * unit_root(static_cast<std::int64_t>(ks[r]) * ks[c], D);
  }
  return {D, ks, std::move(b)};
}

Vector walsh_open_baker_apply(int D, int k, const std::vector<int>& kept, const Vector& v) {
  const std::size_t n = checked_pow(static_cast<std::size_t>(D), k);
  if (static_cast<std::size_t>(v.size()) != n) throw std::invalid_argument("walsh_open_baker_apply: length mismatch");
  const Matrix t = truncated_inverse_dft(D, kept);
  const std::size_t tail = n / static_cast<std::size_t>(D);
  Vector out = Vector::Zero(v.size());
  // out[r * D + d] = sum_e t(d, e) v[e * tail + r]
  for (std::size_t r = 0; r < tail; ++r) {
    for (int d = 0; d < D; ++d) {
      cplx acc = 0.0;
      for (int e = 0; e < D; ++e) acc += t(d, e) * v[static_cast<Eigen::Index>(e * tail + r)];
      out[static_cast<Eigen::Index>(r * D + d)] = acc;
    }
  }
  return out;
}

Matrix walsh_nontrivial_basis(int D, int k, const std::vector<int>& kept) {
  const std::size_t n = checked_pow(static_cast<std::size_t>(D), k);
  check_dimension(n, "walsh_nontrivial_basis");
  const Matrix t = truncated_inverse_dft(D, kept);
  Matrix p = Matrix::Identity(D, D);
  for (int i = 0; i < D; ++i) p = t * p;
  Eigen::JacobiSVD<Matrix> svd(p, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > 1e-10 * std::max(1.0, sv[0])) ++rank;
  const Matrix q = svd.matrixU().leftCols(rank);
  Matrix basis = q;
  for (int i = 1; i < k; ++i) {
    Matrix next(basis.rows() * q.rows(), basis.cols() * q.cols());
    for (Eigen::Index a = 0; a < basis.rows(); ++a) {
      for (Eigen::Index b = 0; b < basis.cols(); ++b) {
        next.block(a * q.rows(), b * q.cols(), q.rows(), q.cols()) = basis(a, b) * q;
      }
    }
    basis = std::move(next);
  }
  return basis;
}

namespace {
TrigObservable bump_1d(double x0, int n, bool in_q) {
  if (n < 0) throw std::invalid_argument("bump: exponent must be >= 0");
  const cplx e = std::polar(1.0, -2.0 * kPi * x0);
  TrigObservable base = TrigObservable::constant(0.5);
  if (in_q) {
    base.add(1, 0, 0.25 * e);
    base.add(-1, 0, 0.25 * std::conj(e));
  } else {
    base.add(0, 1, 0.25 * e);
    base.add(0, -1, 0.25 * std::conj(e));
  }
  TrigObservable r = TrigObservable::constant(1.0);
  for (int i = 0; i < n; ++i) r = r * base;
  return r;
}
}  // namespace

TrigObservable bump_q(double q0, int n) { return bump_1d(q0, n, true); }
TrigObservable bump_p(double p0, int n) { return bump_1d(p0, n, false); }

Cutoffs default_toy_cutoffs() {
  return {bump_q(0.5, 6) * bump_p(1.0 / 6.0, 6), bump_q(1.0 / 6.0, 6) * bump_p(0.5, 6)};
}

TrigObservable pushforward_weight(const WeightedRelation& rel, const Cutoffs& c, int grid_size, int bandwidth) {
  Eigen::MatrixXd samples(grid_size, grid_size);
  for (int a = 0; a < grid_size; ++a) {
    for (int b = 0; b < grid_size; ++b) {
      const Point rho{static_cast<double>(a) / grid_size, static_cast<double>(b) / grid_size};
      const double r = c.right(rho.q, rho.p).real();
      double acc = 0.0;
      if (r != 0.0) {
        for (const auto& img : rel.images(rho)) {
          const double l = c.left(img.image.q, img.image.p).real();
          acc += img.probability * l * l;
        }
      }
      samples(a, b) = r * r * acc;
    }
  }
  return TrigObservable::from_samples(samples, bandwidth);
}

double weighted_relation_residual(const QuantumMap& U, const WeightedRelation& rel, const Cutoffs& c, int grid_size,
                                  double tol) {
  if (c.left.empty() || c.right.empty()) return 0.0;
  const std::size_t n = U.grid.N();
  const int band = static_cast<int>(std::min<std::size_t>(40, n - 1));
  const int max_band = std::max(c.left.max_frequency(), c.right.max_frequency());
  if (static_cast<std::size_t>(max_band) >= n) {
    throw std::invalid_argument("weighted_relation_residual: cutoff frequencies must stay below N");
  }
  const Matrix ol = weyl_quantize(c.left, U.grid).matrix;
  const Matrix orr = weyl_quantize(c.right, U.grid).matrix;
  const Matrix og = weyl_quantize(pushforward_weight(rel, c, grid_size, band), U.grid).matrix;
  const Matrix ulr = ol * U.matrix * orr;
  return operator_norm(ulr.adjoint() * ulr - og, tol);
}

double egorov_residual(const QuantumMap& U, const TrigObservable& f_left, const TrigObservable& f_right, double tol) {
  const Matrix ol = weyl_quantize(f_left, U.grid).matrix;
  const Matrix orr = weyl_quantize(f_right, U.grid).matrix;
  return operator_norm(ol * U.matrix - U.matrix * orr, tol);
}

}  // namespace oqmap
