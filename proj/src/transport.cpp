#include "oqmap/transport.hpp"

#include "oqmap/io.hpp"
#include "oqmap/quantum_maps.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace oqmap {

LeadConfig::LeadConfig(int k_) : k(k_) {
  if (k < 1) throw std::invalid_argument("LeadConfig: k must be >= 1");
  checked_pow(4, k);
}

std::size_t LeadConfig::N() const { return checked_pow(4, k); }
std::size_t LeadConfig::M() const { return checked_pow(4, k - 1); }

std::string to_string(ChannelClass::Kind k) {
  switch (k) {
    case ChannelClass::Kind::transmitted: return "transmitted";
    case ChannelClass::Kind::reflected: return "reflected";
    default: return "nonclassical";
  }
}

ChannelClass classify_channel(const QuDitWord& eps) {
  if (eps.base() != 4) throw std::invalid_argument("classify_channel: word must be base 4");
  if (eps[1] != 0) throw std::invalid_argument("classify_channel: first symbol must be 0 (lead 1)");
  for (int l = 2; l <= eps.length(); ++l) {
    if (eps[l] == 0) return {ChannelClass::Kind::reflected, l};
    if (eps[l] == 3) return {ChannelClass::Kind::transmitted, l};
  }
  return {ChannelClass::Kind::nonclassical, 0};
}

QuDitWord lead_word(int k, std::size_t channel) {
  LeadConfig cfg(k);
  if (channel >= cfg.M()) throw std::invalid_argument("lead_word: channel out of range");
  return QuDitWord::from_index(4, k, channel);
}

ChannelCounts channel_counts(int k) {
  LeadConfig cfg(k);
  ChannelCounts c;
  for (std::size_t j = 0; j < cfg.M(); ++j) {
    switch (classify_channel(lead_word(k, j)).kind) {
      case ChannelClass::Kind::transmitted: ++c.transmitted; break;
      case ChannelClass::Kind::reflected: ++c.reflected; break;
      default: ++c.nonclassical; break;
    }
  }
  return c;
}

namespace {

struct DenseSweep {
  const Matrix& u;
  Eigen::Index m;
  Matrix y;  // interior part, 2M x M

  DenseSweep(const QuantumMap& U, const LeadConfig& cfg) : u(U.matrix), m(static_cast<Eigen::Index>(cfg.M())) {
    if (static_cast<std::size_t>(u.rows()) != cfg.N() || u.rows() != u.cols()) {
      throw std::invalid_argument("transmission: matrix size differs from 4^k");
    }
  }

  // Returns t_n and advances the interior state.
  Matrix first() {
    Matrix x = u.block(m, 0, 3 * m, m);
    y = x.topRows(2 * m);
    return x.bottomRows(m);
  }
  Matrix next() {
    Matrix x = u.block(m, m, 3 * m, 2 * m) * y;
    y = x.topRows(2 * m);
    return x.bottomRows(m);
  }
};

}  // namespace

std::vector<TransmissionMatrix> transmission_matrices(const QuantumMap& U, const LeadConfig& cfg,
                                                      const std::vector<double>& thetas,
                                                      const TransmissionOptions& opts) {
  if (thetas.empty()) throw std::invalid_argument("transmission_matrices: empty theta grid");
  DenseSweep sweep(U, cfg);
  const auto m = static_cast<Eigen::Index>(cfg.M());
  std::vector<TransmissionMatrix> out(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    out[i].theta = thetas[i];
    out[i].t = Matrix::Zero(m, m);
  }
  std::vector<double> ynorm;
  Matrix tn = sweep.first();
  int n = 1;
  double tail = 0.0;
  for (;;) {
    for (auto& tm : out) tm.t += std::polar(1.0, n * tm.theta) * tn;
    const double yn = sweep.y.norm();
    ynorm.push_back(yn);
    if (yn == 0.0) {
      tail = 0.0;
      break;
    }
    const int w = opts.ratio_window;
    if (static_cast<int>(ynorm.size()) > w) {
      const double prev = ynorm[ynorm.size() - 1 - static_cast<std::size_t>(w)];
      const double rho = prev > 0 ? std::pow(yn / prev, 1.0 / w) : 0.0;
      // sum_{j > n} ||t_j|| <= sum_{j >= n} ||y_j|| ~ ||y_n|| / (1 - rho)
      if (rho < 1.0) {
        tail = yn / (1.0 - rho);
        if (tail < opts.tail_tol) break;
      }
    }
    if (n >= opts.max_steps) {
      throw ConvergenceError("transmission: tail bound " + format_double(yn) + " not reached below " +
                             format_double(opts.tail_tol) + " within " + std::to_string(opts.max_steps) + " steps");
    }
    tn = sweep.next();
    ++n;
  }
  for (auto& tm : out) {
    tm.n_max = n;
    tm.tail_bound = tail;
  }
  return out;
}

TransmissionMatrix transmission_matrix(const QuantumMap& U, const LeadConfig& cfg, double theta,
                                       const TransmissionOptions& opts) {
  return transmission_matrices(U, cfg, {theta}, opts).front();
}

std::vector<Matrix> transmission_components(const QuantumMap& U, const LeadConfig& cfg, int count) {
  if (count < 1) throw std::invalid_argument("transmission_components: count must be >= 1");
  DenseSweep sweep(U, cfg);
  std::vector<Matrix> out;
  out.push_back(sweep.first());
  for (int n = 2; n <= count; ++n) out.push_back(sweep.next());
  return out;
}

double conductance(const Matrix& t) { return t.squaredNorm(); }

double noise_power(const Matrix& t) {
  const Matrix tt = t.adjoint() * t;
  return tt.trace().real() - tt.squaredNorm();
}

double fano(const Matrix& t) {
  const double g = conductance(t);
  if (g < 1e-14) throw std::domain_error("fano: conductance below 1e-14, Fano factor undefined");
  return noise_power(t) / g;
}

std::vector<double> transmission_eigenvalues(const Matrix& t) {
  Eigen::BDCSVD<Matrix> svd(t);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()[i];
    out.push_back(s * s);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double ProductState::norm2() const {
  double r = std::norm(coeff);
  for (const auto& f : factors) {
    double s = 0;
    for (const auto& x : f) s += std::norm(x);
    r *= s;
  }
  return r;
}

bool ProductState::is_zero() const { return norm2() == 0.0; }

cplx inner(const ProductState& a, const ProductState& b) {
  if (a.factors.size() != b.factors.size()) throw std::invalid_argument("inner: factor count mismatch");
  cplx r = std::conj(a.coeff) * b.coeff;
  for (std::size_t i = 0; i < a.factors.size() && r != cplx(0.0); ++i) {
    cplx s = 0.0;
    for (int d = 0; d < 4; ++d) s += std::conj(a.factors[i][d]) * b.factors[i][d];
    r *= s;
  }
  return r;
}

cplx ProductSum::inner(const ProductSum& other) const {
  cplx r = 0.0;
  for (const auto& a : terms) {
    for (const auto& b : other.terms) r += oqmap::inner(a, b);
  }
  return r;
}

Vector ProductSum::lead2_vector() const {
  if (terms.empty()) return Vector();
  const std::size_t k = terms.front().factors.size();
  std::vector<Vector> fs(k > 1 ? k - 1 : 0);
  Vector out;
  for (const auto& t : terms) {
    for (std::size_t i = 1; i < k; ++i) {
      fs[i - 1] = Vector(4);
      for (int d = 0; d < 4; ++d) fs[i - 1][d] = t.factors[i][d];
    }
    Vector v = k > 1 ? tensor_product(fs) : Vector::Ones(1);
    v *= t.coeff * t.factors[0][3];
    if (out.size() == 0) out = v;
    else out += v;
  }
  return out;
}

namespace {

using Factor = std::array<cplx, 4>;

Factor inverse_f4(const Factor& a) {
  Factor r{};
  for (int d = 0; d < 4; ++d) {
    cplx s = 0.0;
    for (int e = 0; e < 4; ++e) s += unit_root(d * e, 4) * a[e];
    r[d] = 0.5 * s;
  }
  return r;
}

// Orbit of U and the interior projection starting from a basis word.
class WalshTrajectory {
 public:
  explicit WalshTrajectory(const QuDitWord& eps) {
    if (eps.base() != 4) throw std::invalid_argument("Walsh transport needs base-4 words");
    for (int s : eps.symbols()) {
      Factor f{};
      f[s] = 1.0;
      x_.factors.push_back(f);
    }
    apply_u();
    n_ = 1;
  }

  int n() const { return n_; }

  // t_n |eps> for the current n
  ProductState transmitted() const {
    ProductState t = x_;
    t.factors[0] = {0.0, 0.0, 0.0, t.factors[0][3]};
    return t;
  }

  double interior_norm() const {
    ProductState y = x_;
    y.factors[0][0] = 0.0;
    y.factors[0][3] = 0.0;
    return std::sqrt(y.norm2());
  }

  void advance() {
    x_.factors[0][0] = 0.0;
    x_.factors[0][3] = 0.0;
    apply_u();
    ++n_;
  }

 private:
  void apply_u() {
    Factor first = x_.factors.front();
    x_.factors.erase(x_.factors.begin());
    x_.factors.push_back(inverse_f4(first));
  }

  ProductState x_;
  int n_ = 0;
};

}  // namespace

ProductState walsh_t_component(const QuDitWord& eps, int n) {
  if (n < 1) throw std::invalid_argument("walsh_t_component: n must be >= 1");
  WalshTrajectory tr(eps);
  while (tr.n() < n) tr.advance();
  return tr.transmitted();
}

int theta_cut_steps(int k, double theta_cut) {
  if (!(theta_cut > 0.0)) throw std::invalid_argument("theta_cut must be positive");
  return std::max(0, std::min(static_cast<int>(std::floor(theta_cut * k)), k - 1));
}

TensorColumn walsh_t_apply(const QuDitWord& eps, double theta, int m_max) {
  if (classify_channel(eps).kind != ChannelClass::Kind::nonclassical) {
    throw std::invalid_argument("walsh_t_apply: word " + to_string(eps) + " is a classical channel");
  }
  if (m_max < 0) throw std::invalid_argument("walsh_t_apply: m_max must be >= 0");
  const int k = eps.length();
  WalshTrajectory tr(eps);
  while (tr.n() < k) tr.advance();
  TensorColumn col;
  col.m_max = m_max;
  for (int m = 0; m <= m_max; ++m) {
    ProductState s = tr.transmitted();
    s.coeff *= std::polar(1.0, (k + m) * theta);
    col.state.terms.push_back(std::move(s));
    tr.advance();
  }
  // exact norms of the omitted components, then a geometric remainder
  double tail = 0.0;
  std::vector<double> ys;
  for (int extra = 0; extra < 2000; ++extra) {
    tail += std::sqrt(tr.transmitted().norm2());
    const double y = tr.interior_norm();
    ys.push_back(y);
    if (y == 0.0) break;
    if (ys.size() > 8) {
      const double rho = std::pow(y / ys[ys.size() - 9], 1.0 / 8.0);
      if (rho < 1.0 && y / (1.0 - rho) < 1e-17) {
        tail += y / (1.0 - rho);
        break;
      }
    }
    tr.advance();
  }
  col.tail_bound = tail;
  return col;
}

std::vector<double> theta_grid(int points) {
  if (points < 1) throw std::invalid_argument("theta_grid: need at least one point");
  std::vector<double> g;
  for (int i = 0; i < points; ++i) g.push_back(2.0 * kPi * i / points);
  return g;
}

namespace {

void finish_report(TransportReport& r) {
  const double n = static_cast<double>(r.rows.size());
  double sg = 0, sp = 0, sf = 0;
  for (const auto& s : r.rows) {
    sg += s.g;
    sp += s.P;
    sf += s.F;
  }
  r.mean_g = sg / n;
  r.mean_P = sp / n;
  r.mean_F = sf / n;
  double vg = 0, vp = 0;
  for (const auto& s : r.rows) {
    vg += (s.g - r.mean_g) * (s.g - r.mean_g);
    vp += (s.P - r.mean_P) * (s.P - r.mean_P);
  }
  r.std_g = std::sqrt(vg / n);
  r.std_P = std::sqrt(vp / n);
}

TransportSummary summarize(int k, double theta, double g, double P, const ChannelCounts& counts, int n_max,
                           double tail) {
  TransportSummary s;
  s.k = k;
  s.theta = theta;
  s.g = g;
  s.P = P;
  s.F = g >= 1e-14 ? P / g : 0.0;
  s.fano_normalized = P / std::ldexp(1.0, k - 1);
  s.counts = counts;
  s.n_max = n_max;
  s.tail_bound = tail;
  return s;
}

}  // namespace

TransportLimits& transport_limits() {
  static TransportLimits limits;
  return limits;
}

TransportReport transport_summary_dense(const QuantumMap& U, const std::vector<double>& thetas,
                                        const TransmissionOptions& opts) {
  if (!U.grid.k() || U.grid.base() != 4) throw std::invalid_argument("transport: map must act on N = 4^k");
  const int k = *U.grid.k();
  LeadConfig cfg(k);
  const ChannelCounts counts = channel_counts(k);
  TransportReport r;
  r.k = k;
  r.path = "dense";
  for (const auto& tm : transmission_matrices(U, cfg, thetas, opts)) {
    r.rows.push_back(summarize(k, tm.theta, conductance(tm.t), noise_power(tm.t), counts, tm.n_max, tm.tail_bound));
  }
  finish_report(r);
  return r;
}

TransportReport transport_summary_tensor(int k, const std::vector<double>& thetas, int m_max) {
  if (k < 1 || k > transport_limits().tensor_max_k) {
    throw SizeLimitError("transport tensor path: k=" + std::to_string(k) + " outside 1.." +
                         std::to_string(transport_limits().tensor_max_k));
  }
  const ChannelCounts counts = channel_counts(k);
  std::vector<QuDitWord> words;
  LeadConfig cfg(k);
  for (std::size_t j = 0; j < cfg.M(); ++j) {
    QuDitWord w = lead_word(k, j);
    if (classify_channel(w).kind == ChannelClass::Kind::nonclassical) words.push_back(std::move(w));
  }
  TransportReport r;
  r.k = k;
  r.path = "tensor";
  for (double theta : thetas) {
    std::vector<TensorColumn> cols;
    double tail = 0.0;
    for (const auto& w : words) {
      cols.push_back(walsh_t_apply(w, theta, m_max));
      tail = std::max(tail, cols.back().tail_bound);
    }
    // classical transmitted channels are eigenvectors of t^* t with eigenvalue 1,
    // so the nonclassical Gram block carries the rest of g and all of P
    const auto n = static_cast<Eigen::Index>(cols.size());
    Matrix G(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = a; b < n; ++b) {
        G(a, b) = cols[a].state.inner(cols[b].state);
        G(b, a) = std::conj(G(a, b));
      }
    }
    const double tr = G.trace().real();
    const double g = static_cast<double>(counts.transmitted) + tr;
    const double P = tr - G.squaredNorm();
    r.rows.push_back(summarize(k, theta, g, P, counts, k + m_max, tail));
  }
  finish_report(r);
  return r;
}

TransportReport transport_summary(int k, const std::vector<double>& thetas, const std::string& path,
                                  const TransmissionOptions& opts) {
  if (path == "dense") {
    if (k < 1 || k > transport_limits().dense_max_k) {
      throw SizeLimitError("transport dense path: k=" + std::to_string(k) + " outside 1.." +
                           std::to_string(transport_limits().dense_max_k));
    }
    return transport_summary_dense(build_walsh_4baker(k), thetas, opts);
  }
  if (path == "tensor") return transport_summary_tensor(k, thetas, theta_cut_steps(k));
  throw std::invalid_argument("transport: unknown path '" + path + "' (dense or tensor)");
}

bool shifted_coincidence(const QuDitWord& eps, int m, int mp) {
  const int k = eps.length();
  if (!(0 <= mp && mp < m)) throw std::invalid_argument("shifted_coincidence: need 0 <= m' < m");
  // eps_{m+2..k} == eps_{m'+2..k+m'-m}
  for (int i = m + 2; i <= k; ++i) {
    if (eps[i] != eps[i - (m - mp)]) return false;
  }
  return true;
}

GenericityReport cross_term_genericity(int k, int m_cut) {
  if (k < 2 || k > 14) throw std::invalid_argument("cross_term_genericity: k must be in [2, 14]");
  if (m_cut < 0 || m_cut > k - 1) throw std::invalid_argument("cross_term_genericity: m_cut must be in [0, k-1]");
  GenericityReport rep;
  rep.k = k;
  rep.m_cut = m_cut;
  LeadConfig cfg(k);
  for (std::size_t j = 0; j < cfg.M(); ++j) {
    const QuDitWord w = lead_word(k, j);
    if (classify_channel(w).kind != ChannelClass::Kind::nonclassical) continue;
    ++rep.nonclassical;
    std::vector<ProductState> comps;
    for (int m = 0; m <= m_cut; ++m) comps.push_back(walsh_t_component(w, k + m));
    bool measured = false, symbolic = false;
    for (int m = 1; m <= m_cut; ++m) {
      for (int mp = 0; mp < m; ++mp) {
        if (std::abs(inner(comps[mp], comps[m])) > 1e-12) measured = true;
        if (shifted_coincidence(w, m, mp)) symbolic = true;
      }
    }
    rep.measured += measured;
    rep.combinatorial += symbolic;
  }
  return rep;
}

double psi0_norm2(const std::vector<Matrix>& components, int k, std::size_t channel, int m_cut) {
  if (m_cut < 0 || static_cast<std::size_t>(k + m_cut) > components.size()) {
    throw std::invalid_argument("psi0_norm2: not enough components");
  }
  const auto c = static_cast<Eigen::Index>(channel);
  Vector psi = Vector::Zero(components.front().cols());
  for (int m = 0; m <= m_cut; ++m) {
    const Matrix& t = components[static_cast<std::size_t>(k + m - 1)];
    psi += t.adjoint() * t.col(c);
  }
  return psi.squaredNorm();
}

std::string transport_csv(const TransportReport& r) {
  std::ostringstream os;
  os << "k,theta,g,P,F,transmitted,reflected,nonclassical,n_max,tail_bound\n";
  for (const auto& s : r.rows) {
    os << s.k << ',' << format_double(s.theta) << ',' << format_double(s.g) << ',' << format_double(s.P) << ','
       << format_double(s.F) << ',' << s.counts.transmitted << ',' << s.counts.reflected << ','
       << s.counts.nonclassical << ',' << s.n_max << ',' << format_double(s.tail_bound) << '\n';
  }
  return os.str();
}

std::string transmission_eigenvalues_csv(const std::vector<double>& T) {
  std::ostringstream os;
  os << "index,T\n";
  for (std::size_t i = 0; i < T.size(); ++i) os << i << ',' << format_double(T[i]) << '\n';
  return os.str();
}

}  // namespace oqmap
