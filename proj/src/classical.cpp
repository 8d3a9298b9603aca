#include "oqmap/classical.hpp"

#include "oqmap/core.hpp"
#include "oqmap/io.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace oqmap {

namespace {
double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}
}  // namespace

Point make_point(double q, double p) { return {frac(q), frac(p)}; }

void BakerParams::validate() const {
  if (D1 < 2 || D2 < 2) throw std::invalid_argument("BakerParams: D1, D2 must be > 1");
  if (l1 < 0 || l2 < 0 || l1 >= D1 || l2 >= D2) throw std::invalid_argument("BakerParams: strip offset out of range");
  // (l1+1)/D1 <= l2/D2 in integers
  if (static_cast<long long>(l1 + 1) * D2 > static_cast<long long>(l2) * D1) {
    throw std::invalid_argument("BakerParams: strips overlap");
  }
}

std::optional<int> strip_of(const BakerParams& params, double q) {
  const int d[2] = {params.D1, params.D2};
  const int l[2] = {params.l1, params.l2};
  for (int s = 0; s < 2; ++s) {
    const double x = d[s] * q;
    if (x >= l[s] && x < l[s] + 1) return s;
  }
  return std::nullopt;
}

std::optional<Point> baker_image(const BakerParams& params, Point rho) {
  params.validate();
  auto s = strip_of(params, rho.q);
  if (!s) return std::nullopt;
  const int d = *s == 0 ? params.D1 : params.D2;
  const int l = *s == 0 ? params.l1 : params.l2;
  return make_point(d * rho.q - l, (rho.p + l) / d);
}

std::optional<Point> baker_preimage(const BakerParams& params, Point rho) {
  params.validate();
  const int d[2] = {params.D1, params.D2};
  const int l[2] = {params.l1, params.l2};
  for (int s = 0; s < 2; ++s) {
    const double x = d[s] * rho.p;
    if (x >= l[s] && x < l[s] + 1) return make_point((rho.q + l[s]) / d[s], d[s] * rho.p - l[s]);
  }
  return std::nullopt;
}

double sin2_ratio(int D, double x, int j) {
  if (D < 1) throw std::invalid_argument("sin2_ratio: D must be positive");
  // distance of y = x + j pi / D to the nearest multiple of pi
  const double y0 = x + j * kPi / D;
  const double y = y0 - kPi * std::round(y0 / kPi);
  if (std::abs(y) < 1e-4) {
    const double d2 = static_cast<double>(D) * D;
    return d2 * (1.0 - (d2 - 1.0) * y * y / 3.0);
  }
  const double s = std::sin(D * x);
  const double t = std::sin(y);
  return s * s / (t * t);
}

double toy_jump_probability(int strip, int j, double p) {
  if (strip != 0 && strip != 1) throw std::invalid_argument("toy_jump_probability: strip must be 0 or 1");
  if (j < 0 || j > 2) throw std::invalid_argument("toy_jump_probability: branch must be 0, 1 or 2");
  const int shift = strip == 0 ? j : j - 2;
  if (p == 0.0) return shift == 0 ? 1.0 : 0.0;
  return sin2_ratio(3, kPi * p / 3.0, shift) / 9.0;
}

std::vector<WeightedImage> toy_images(Point rho) {
  return toy_relation().images(make_point(rho.q, rho.p));
}

Point AffineBranch::apply(const Point& rho) const {
  return make_point(q_scale * rho.q + q_shift, p_scale * rho.p + p_shift);
}

std::vector<WeightedImage> WeightedRelation::images(const Point& rho) const {
  std::vector<WeightedImage> out;
  for (std::size_t b = 0; b < branches.size(); ++b) {
    const auto& br = branches[b];
    if (!br.contains(rho)) continue;
    const double w = br.probability(rho);
    if (w == 0.0) continue;
    out.push_back({br.apply(rho), w, static_cast<int>(b)});
  }
  return out;
}

WeightedRelation open_baker_relation(const BakerParams& params) {
  params.validate();
  WeightedRelation r;
  r.kind = WeightedRelation::Kind::open_baker;
  const int d[2] = {params.D1, params.D2};
  const int l[2] = {params.l1, params.l2};
  for (int s = 0; s < 2; ++s) {
    AffineBranch b;
    b.q_lo = static_cast<double>(l[s]) / d[s];
    b.q_hi = static_cast<double>(l[s] + 1) / d[s];
    b.q_scale = d[s];
    b.q_shift = -l[s];
    b.p_scale = 1.0 / d[s];
    b.p_shift = static_cast<double>(l[s]) / d[s];
    b.probability = [](const Point&) { return 1.0; };
    r.branches.push_back(std::move(b));
  }
  return r;
}

WeightedRelation toy_relation() {
  WeightedRelation r;
  r.kind = WeightedRelation::Kind::multivalued_toy;
  for (int s = 0; s < 2; ++s) {
    for (int j = 0; j < 3; ++j) {
      AffineBranch b;
      b.q_lo = s == 0 ? 0.0 : 2.0 / 3.0;
      b.q_hi = s == 0 ? 1.0 / 3.0 : 1.0;
      b.q_scale = 3.0;
      b.q_shift = s == 0 ? 0.0 : -2.0;
      b.p_scale = 1.0 / 3.0;
      b.p_shift = j / 3.0;
      b.probability = [s, j](const Point& rho) { return toy_jump_probability(s, j, rho.p); };
      r.branches.push_back(std::move(b));
    }
  }
  return r;
}

std::optional<int> escape_time(const BakerParams& params, Point rho, int max_steps) {
  if (max_steps < 1) throw std::invalid_argument("escape_time: max_steps must be >= 1");
  params.validate();
  Point x = make_point(rho.q, rho.p);
  for (int n = 1; n <= max_steps; ++n) {
    auto next = baker_image(params, x);
    if (!next) return n;
    x = *next;
  }
  return std::nullopt;
}

EscapeHistogram escape_time_histogram(const BakerParams& params, const std::vector<Point>& points, int max_steps) {
  EscapeHistogram h;
  h.counts.assign(static_cast<std::size_t>(std::max(max_steps, 1)), 0);
  for (const auto& rho : points) {
    auto n = escape_time(params, rho, max_steps);
    if (n) ++h.counts[static_cast<std::size_t>(*n - 1)];
    else ++h.trapped;
  }
  return h;
}

double cantor_dimension(int D1, int D2) {
  if (D1 < 2 || D2 < 2) throw std::invalid_argument("cantor_dimension: D1, D2 must be > 1");
  if (D1 == D2) return std::log(2.0) / std::log(static_cast<double>(D1));
  auto f = [&](double nu) { return std::pow(D1, -nu) + std::pow(D2, -nu) - 1.0; };
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {
void require_equal_stretch(const BakerParams& params) {
  params.validate();
  if (params.D1 != params.D2) {
    throw std::invalid_argument("boxcount_trapped: digit survival needs D1 == D2; use cantor_dimension");
  }
}
}  // namespace

BoxCount boxcount_trapped(const BakerParams& params, int depth) {
  require_equal_stretch(params);
  if (depth < 2) throw std::invalid_argument("boxcount_trapped: depth must be >= 2");
  const int D = params.D1;
  // at each refinement every surviving interval keeps one child per strip
  const std::uint64_t kept = params.l1 == params.l2 ? 1 : 2;
  std::uint64_t count = 1;
  for (int d = 0; d < depth; ++d) {
    if (count > std::numeric_limits<std::uint64_t>::max() / kept) throw std::overflow_error("boxcount_trapped: count overflow");
    count *= kept;
  }
  const double est = std::log(static_cast<double>(count)) / (depth * std::log(static_cast<double>(D)));
  return {depth, count, est};
}

std::vector<std::uint64_t> trapped_intervals(const BakerParams& params, int depth) {
  require_equal_stretch(params);
  if (depth < 0 || depth > 24) throw std::invalid_argument("trapped_intervals: depth must be in [0, 24]");
  const std::uint64_t D = static_cast<std::uint64_t>(params.D1);
  checked_pow(D, depth);
  std::vector<std::uint64_t> cur{0};
  for (int d = 0; d < depth; ++d) {
    std::vector<std::uint64_t> next;
    next.reserve(cur.size() * 2);
    for (auto i : cur) {
      next.push_back(i * D + static_cast<std::uint64_t>(params.l1));
      next.push_back(i * D + static_cast<std::uint64_t>(params.l2));
    }
    cur = std::move(next);
  }
  return cur;
}

std::string escape_histogram_csv(const EscapeHistogram& h) {
  std::ostringstream os;
  os << "step,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) os << (i + 1) << ',' << h.counts[i] << '\n';
  return os.str();
}

std::string boxcount_csv(const std::vector<BoxCount>& rows) {
  std::ostringstream os;
  os << "depth,count,estimate\n";
  for (const auto& r : rows) os << r.depth << ',' << r.count << ',' << format_double(r.estimate) << '\n';
  return os.str();
}

}  // namespace oqmap
