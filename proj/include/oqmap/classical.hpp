#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace oqmap {

struct Point {
  double q = 0.0;
  double p = 0.0;
};

// Reduces both coordinates to [0,1).
Point make_point(double q, double p);

struct BakerParams {
  int D1 = 3;
  int D2 = 3;
  int l1 = 0;
  int l2 = 2;

  void validate() const;
  bool symmetric() const { return D1 == D2 && l1 == D1 - l2 - 1; }
  static BakerParams three_baker() { return {3, 3, 0, 2}; }
};

// Index (0 or 1) of the strip [l_j/D_j, (l_j+1)/D_j) containing q, if any.
std::optional<int> strip_of(const BakerParams& params, double q);

std::optional<Point> baker_image(const BakerParams& params, Point rho);
std::optional<Point> baker_preimage(const BakerParams& params, Point rho);

struct WeightedImage {
  Point image;
  double probability = 0.0;
  int branch = 0;
};

// sin^2(D x) / sin^2(x + j pi / D), continuous across the removable singularity.
double sin2_ratio(int D, double x, int j);

// Jump probability from strip s (0 = left, 1 = right) of the symmetric 3-baker to branch j.
double toy_jump_probability(int strip, int j, double p);

std::vector<WeightedImage> toy_images(Point rho);

struct AffineBranch {
  double q_lo = 0.0;
  double q_hi = 0.0;
  double q_scale = 1.0;
  double q_shift = 0.0;
  double p_scale = 1.0;
  double p_shift = 0.0;
  std::function<double(const Point&)> probability;

  bool contains(const Point& rho) const { return rho.q >= q_lo && rho.q < q_hi; }
  Point apply(const Point& rho) const;
};

struct WeightedRelation {
  enum class Kind { open_baker, multivalued_toy };
  Kind kind = Kind::open_baker;
  std::vector<AffineBranch> branches;

  std::vector<WeightedImage> images(const Point& rho) const;
};

WeightedRelation open_baker_relation(const BakerParams& params);
WeightedRelation toy_relation();

// Number of steps until the orbit leaves the strips, or nullopt if it survives max_steps.
std::optional<int> escape_time(const BakerParams& params, Point rho, int max_steps);

struct EscapeHistogram {
  std::vector<std::uint64_t> counts;  // counts[n-1] = points escaping at step n
  std::uint64_t trapped = 0;
};

EscapeHistogram escape_time_histogram(const BakerParams& params, const std::vector<Point>& points, int max_steps);

double cantor_dimension(int D1, int D2);

struct BoxCount {
  int depth = 0;
  std::uint64_t count = 0;
  double estimate = 0.0;
};

// Digit-survival count of the q-intervals of Gamma_- at resolution D^-depth.
BoxCount boxcount_trapped(const BakerParams& params, int depth);

// Left endpoints (as integers over D^depth) of the surviving intervals.
std::vector<std::uint64_t> trapped_intervals(const BakerParams& params, int depth);

std::string escape_histogram_csv(const EscapeHistogram& h);
std::string boxcount_csv(const std::vector<BoxCount>& rows);

}  // namespace oqmap
