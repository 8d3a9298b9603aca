#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oqmap {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

// Raised when the requested dimension exceeds the configured size guard.
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative routines that fail to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::size_t max_dimension();
void set_max_dimension(std::size_t n);
void check_dimension(std::size_t n, const char* what);

// Integer power with overflow and size-guard checks.
std::size_t checked_pow(std::size_t base, int exp);

// exp(2*pi*i*num/den) with num reduced mod den first; quarter turns are exact.
cplx unit_root(std::int64_t num, std::int64_t den);

class PlanckGrid {
 public:
  explicit PlanckGrid(std::size_t n);
  static PlanckGrid power(int base, int k);

  std::size_t N() const { return n_; }
  double h() const { return 1.0 / (2.0 * kPi * static_cast<double>(n_)); }
  std::optional<int> base() const { return base_; }
  std::optional<int> k() const { return k_; }

  bool operator==(const PlanckGrid&) const = default;

 private:
  std::size_t n_;
  std::optional<int> base_;
  std::optional<int> k_;
};

struct BuilderInfo {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> params;
};

// Row index = output position, column index = input position.
struct QuantumMap {
  Matrix matrix;
  PlanckGrid grid;
  BuilderInfo builder;
};

// Largest singular value by power iteration on A^* A.
double operator_norm(const Matrix& a, double tol = 1e-8, int max_iter = 10000);

}  // namespace oqmap
