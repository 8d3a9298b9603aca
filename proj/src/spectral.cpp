#include "oqmap/spectral.hpp"

#include "oqmap/io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace oqmap {

namespace {

double arg_2pi(cplx z) {
  double a = std::arg(z);
  if (a < 0) a += 2.0 * kPi;
  if (a >= 2.0 * kPi) a -= 2.0 * kPi;
  return a;
}

std::vector<int> prime_factors(int n) {
  std::vector<int> ps;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      ps.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) ps.push_back(n);
  return ps;
}

int mobius(int n) {
  int r = 1;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      r = -r;
    }
  }
  if (n > 1) r = -r;
  return r;
}

// Primitive binary words of length l with q minus signs.
std::int64_t primitive_words(int l, int q) {
  const int g = std::gcd(l, q);
  std::int64_t s = 0;
  for (int d = 1; d <= g; ++d) {
    if (g % d == 0) s += mobius(d) * binomial(l / d, q / d);
  }
  return s;
}

}  // namespace

void ResonanceSpectrum::canonicalize() {
  std::stable_sort(entries.begin(), entries.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
    const double ma = std::abs(a.value), mb = std::abs(b.value);
    if (ma != mb) return ma > mb;
    const double aa = arg_2pi(a.value), ab = arg_2pi(b.value);
    if (aa != ab) return aa < ab;
    return a.value.real() < b.value.real();
  });
}

int ResonanceSpectrum::total_multiplicity() const {
  int s = 0;
  for (const auto& e : entries) s += e.multiplicity;
  return s;
}

int ResonanceSpectrum::nonzero_multiplicity(double zero_threshold) const {
  int s = 0;
  for (const auto& e : entries) {
    if (std::abs(e.value) >= zero_threshold) s += e.multiplicity;
  }
  return s;
}

ResonanceSpectrum eigenvalues(const Matrix& M, double tol) {
  if (M.rows() != M.cols()) throw std::invalid_argument("eigenvalues: matrix must be square");
  check_dimension(static_cast<std::size_t>(M.rows()), "eigenvalues");
  ResonanceSpectrum spec;
  spec.N = static_cast<std::size_t>(M.rows());
  if (M.rows() == 0) return spec;
  Eigen::ComplexEigenSolver<Matrix> es(M, true);
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("eigenvalues: QR iteration did not converge for N=" + std::to_string(M.rows()));
  }
  const double norm = operator_norm(M);
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    const double vn = vecs.col(i).norm();
    const double err = norm > 0 && vn > 0 ? (M * vecs.col(i) - vals[i] * vecs.col(i)).norm() / (norm * vn) : 0.0;
    worst = std::max(worst, err);
    spec.entries.push_back({vals[i], 1});
  }
  spec.max_backward_error = worst;
  if (worst > tol) {
    throw ConvergenceError("eigenvalues: backward error " + format_double(worst) + " exceeds tolerance " +
                           format_double(tol));
  }
  spec.canonicalize();
  return spec;
}

ResonanceSpectrum eigenvalues(const QuantumMap& M, double tol) {
  ResonanceSpectrum s = eigenvalues(M.matrix, tol);
  s.k = M.grid.k();
  return s;
}

ResonanceSpectrum walsh_nontrivial_spectrum(int D, int k, const std::vector<int>& kept, double tol) {
  const Matrix q = walsh_nontrivial_basis(D, k, kept);
  Matrix bq(q.rows(), q.cols());
  for (Eigen::Index c = 0; c < q.cols(); ++c) bq.col(c) = walsh_open_baker_apply(D, k, kept, q.col(c));
  const Matrix compressed = q.adjoint() * bq;
  ResonanceSpectrum s = eigenvalues(compressed, tol);
  s.k = k;
  return s;
}

int count_at_radius(const ResonanceSpectrum& spec, double r, double tie_tol) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("count_at_radius: r must lie in (0, 1]");
  int c = 0;
  for (const auto& e : spec.entries) {
    if (std::abs(e.value) >= r - tie_tol) c += e.multiplicity;
  }
  return c;
}

std::vector<NecklaceOrbit> necklace_orbits(int k) {
  if (k < 1 || k > 24) throw std::invalid_argument("necklace_orbits: k must be in [1, 24]");
  const std::uint32_t n = 1u << k;
  const std::uint32_t mask = n - 1;
  auto rot = [&](std::uint32_t w, int s) { return ((w << s) | (w >> (k - s))) & mask; };
  std::vector<NecklaceOrbit> out;
  for (std::uint32_t w = 0; w < n; ++w) {
    bool canonical = true;
    int period = k;
    for (int s = 1; s < k; ++s) {
      const std::uint32_t r = rot(w, s);
      if (r < w) {
        canonical = false;
        break;
      }
      if (r == w && period == k) period = s;
    }
    if (!canonical) continue;
    NecklaceOrbit o;
    o.word.resize(static_cast<std::size_t>(k));
    // most significant bit is the first letter
    for (int i = 0; i < k; ++i) o.word[static_cast<std::size_t>(i)] = (w >> (k - 1 - i)) & 1u;
    o.period = period;
    o.degree = std::popcount(w);
    out.push_back(std::move(o));
  }
  return out;
}

std::string to_string(const NecklaceOrbit& o) {
  std::string s;
  for (bool b : o.word) s += b ? '-' : '+';
  return s;
}

std::pair<cplx, cplx> block_eigenvalues(const Matrix& block) {
  if (block.rows() != 2 || block.cols() != 2) throw std::invalid_argument("block_eigenvalues: need a 2x2 block");
  const cplx tr = block(0, 0) + block(1, 1);
  const cplx det = block(0, 0) * block(1, 1) - block(0, 1) * block(1, 0);
  const cplx disc = std::sqrt(tr * tr - 4.0 * det);
  cplx a = 0.5 * (tr + disc), b = 0.5 * (tr - disc);
  if (std::abs(b) > std::abs(a)) std::swap(a, b);
  // recompute the small root from the product to avoid cancellation
  if (std::abs(a) > 0) b = det / a;
  return {a, b};
}

ResonanceSpectrum walsh_analytic_spectrum(int k, const OmegaBlock& block) {
  if (k < 1 || k > 24) throw std::invalid_argument("walsh_analytic_spectrum: k must be in [1, 24]");
  const auto [lp, lm] = block_eigenvalues(block.block);
  if (lp == cplx(0.0)) throw std::invalid_argument("walsh_analytic_spectrum: lambda_+ vanishes");
  const bool rank_one = std::abs(lm) <= 1e-14 * std::abs(lp);
  // An orbit of period l and total degree p contributes the l-th roots of
  // mu = lp^{l - pl/k} lm^{pl/k}; with unwrapped logarithms these are
  // beta_p * omega_k^{j k / l}, beta_p = exp(((k - p) log lp + p log lm) / k).
  std::map<std::pair<int, int>, int> mult;
  for (int l = 1; l <= k; ++l) {
    if (k % l) continue;
    for (int p = 0; p <= k; ++p) {
      if ((p * l) % k) continue;
      const std::int64_t words = primitive_words(l, p * l / k);
      if (words == 0) continue;
      const std::int64_t orbits = words / l;
      if (rank_one && p > 0) continue;
      for (int j = 0; j < l; ++j) mult[{p, j * (k / l)}] += static_cast<int>(orbits);
    }
  }
  ResonanceSpectrum spec;
  spec.source = ResonanceSpectrum::Source::analytic_walsh;
  spec.k = k;
  spec.N = checked_pow(static_cast<std::size_t>(block.D), k);
  const cplx llp = std::log(lp);
  const cplx llm = rank_one ? cplx(0.0) : std::log(lm);
  for (const auto& [key, m] : mult) {
    const auto [p, s] = key;
    const cplx beta = std::exp((static_cast<double>(k - p) * llp + static_cast<double>(p) * llm) / static_cast<double>(k));
    spec.entries.push_back({beta * unit_root(s, k), m});
  }
  const long long nonzero = spec.total_multiplicity();
  const long long kernel = static_cast<long long>(spec.N) - nonzero;
  if (kernel > 0) spec.entries.push_back({cplx(0.0), static_cast<int>(std::min<long long>(kernel, 0x7fffffff))});
  spec.canonicalize();
  return spec;
}

OracleReport oracle_match(const ResonanceSpectrum& numerical, const ResonanceSpectrum& analytic, double tol,
                          double zero_threshold) {
  OracleReport rep;
  std::vector<cplx> num, ana;
  for (const auto& e : numerical.entries) {
    if (std::abs(e.value) >= zero_threshold) {
      for (int i = 0; i < e.multiplicity; ++i) num.push_back(e.value);
    } else {
      rep.numerical_zero += e.multiplicity;
    }
  }
  for (const auto& e : analytic.entries) {
    if (std::abs(e.value) >= zero_threshold) {
      for (int i = 0; i < e.multiplicity; ++i) ana.push_back(e.value);
    } else {
      rep.expected_zero += e.multiplicity;
    }
  }
  rep.numerical_nonzero = static_cast<int>(num.size());
  rep.analytic_nonzero = static_cast<int>(ana.size());
  if (num.size() != ana.size()) {
    rep.message = "nonzero count mismatch: numerical " + std::to_string(num.size()) + " vs analytic " +
                  std::to_string(ana.size());
    return rep;
  }
  std::vector<bool> used(ana.size(), false);
  for (const cplx& z : num) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    for (std::size_t i = 0; i < ana.size(); ++i) {
      if (used[i]) continue;
      const double d = std::abs(z - ana[i]);
      if (d < best) {
        best = d;
        bi = i;
      }
    }
    used[bi] = true;
    rep.max_distance = std::max(rep.max_distance, best);
    rep.sum_distance += best;
  }
  const bool same_space = numerical.N == analytic.N;
  if (same_space && rep.numerical_zero != rep.expected_zero) {
    rep.message = "kernel mismatch: numerical " + std::to_string(rep.numerical_zero) + " vs expected " +
                  std::to_string(rep.expected_zero);
    return rep;
  }
  rep.ok = rep.max_distance < tol && rep.sum_distance < tol * static_cast<double>(std::max<std::size_t>(num.size(), 1));
  rep.message = rep.ok ? "match" : "max distance " + format_double(rep.max_distance) + " exceeds " + format_double(tol);
  return rep;
}

std::vector<RadialPoint> radial_profile(const ResonanceSpectrum& spec, int k, const std::vector<double>& radii) {
  if (k < 0 || k > 60) throw std::invalid_argument("radial_profile: bad k");
  const double scale = std::ldexp(1.0, -k);
  std::vector<RadialPoint> out;
  for (double r : radii) out.push_back({r, scale * count_at_radius(spec, r)});
  return out;
}

double weyl_fit(const std::vector<WeylPoint>& points) {
  if (points.size() < 3) throw std::invalid_argument("weyl_fit: need at least 3 points");
  std::vector<double> x, y;
  for (const auto& p : points) {
    if (!(p.N > 0) || !(p.count > 0)) throw std::invalid_argument("weyl_fit: N and count must be positive");
    x.push_back(std::log(p.N));
    y.push_back(std::log(p.count));
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 1e-300) throw std::invalid_argument("weyl_fit: all N are equal");
  return sxy / sxx;
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Rational necklace_period_fraction(int k, int p) {
  if (k < 2 || p < 1 || p > k - 1) throw std::invalid_argument("necklace_period_fraction: need 1 <= p <= k-1");
  if (k > 60) throw std::invalid_argument("necklace_period_fraction: k too large");
  const auto primes = prime_factors(std::gcd(k, p));
  std::int64_t periodic = 0;
  const std::size_t subsets = std::size_t{1} << primes.size();
  for (std::size_t s = 1; s < subsets; ++s) {
    int prod = 1, bits = 0;
    for (std::size_t i = 0; i < primes.size(); ++i) {
      if (s >> i & 1u) {
        prod *= primes[i];
        ++bits;
      }
    }
    const std::int64_t c = binomial(k / prod, p / prod);
    periodic += (bits % 2 == 1) ? c : -c;
  }
  const std::int64_t total = binomial(k, p);
  const std::int64_t g = std::gcd(periodic, total);
  return {periodic / g, total / g};
}

std::string spectrum_csv(const ResonanceSpectrum& spec) {
  std::ostringstream os;
  os << "re,im,modulus,arg,multiplicity\n";
  for (const auto& e : spec.entries) {
    os << format_double(e.value.real()) << ',' << format_double(e.value.imag()) << ','
       << format_double(std::abs(e.value)) << ',' << format_double(arg_2pi(e.value)) << ',' << e.multiplicity
       << '\n';
  }
  return os.str();
}

std::vector<double> weyl_table_radii() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}; }

const std::vector<std::vector<int>>& reference_weyl_counts() {
  static const std::vector<std::vector<int>> table = {
      {5, 5, 5, 5, 5, 4, 3, 3},
      {14, 14, 10, 9, 8, 8, 7, 6},
      {32, 26, 23, 19, 16, 16, 14, 5},
      {63, 53, 45, 40, 33, 33, 30, 6},
      {124, 103, 85, 78, 71, 65, 63, 11},
      {237, 196, 161, 150, 142, 131, 128, 12},
  };
  return table;
}

std::string weyl_csv(const std::vector<WeylRow>& rows) {
  std::ostringstream os;
  os << "k,N,r,count\n";
  for (const auto& r : rows) os << r.k << ',' << r.N << ',' << format_double(r.r) << ',' << r.count << '\n';
  return os.str();
}

}  // namespace oqmap
