#pragma once

#include "oqmap/core.hpp"
#include "oqmap/quantum_maps.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace oqmap {

struct SpectrumEntry {
  cplx value;
  int multiplicity = 1;
};

struct ResonanceSpectrum {
  enum class Source { numerical, analytic_walsh };

  std::vector<SpectrumEntry> entries;
  Source source = Source::numerical;
  std::size_t N = 0;
  std::optional<int> k;
  // largest ||M v - lambda v|| / ||M|| over eigenpairs (numerical source only)
  double max_backward_error = 0.0;

  // |lambda| descending, then arg in [0, 2 pi) ascending, then real part.
  void canonicalize();
  int total_multiplicity() const;
  int nonzero_multiplicity(double zero_threshold) const;
};

ResonanceSpectrum eigenvalues(const QuantumMap& M, double tol = 1e-8);
ResonanceSpectrum eigenvalues(const Matrix& M, double tol = 1e-8);

// Nonzero spectrum of the Walsh open baker from its compression to walsh_nontrivial_basis.
ResonanceSpectrum walsh_nontrivial_spectrum(int D, int k, const std::vector<int>& kept, double tol = 1e-8);

int count_at_radius(const ResonanceSpectrum& spec, double r, double tie_tol = 1e-10);

struct NecklaceOrbit {
  std::vector<bool> word;  // true = '-'
  int period = 0;
  int degree = 0;
};

std::vector<NecklaceOrbit> necklace_orbits(int k);
std::string to_string(const NecklaceOrbit& o);

// Eigenvalues of a 2x2 block ordered by decreasing modulus.
std::pair<cplx, cplx> block_eigenvalues(const Matrix& block);

ResonanceSpectrum walsh_analytic_spectrum(int k, const OmegaBlock& block);

struct OracleReport {
  bool ok = false;
  double max_distance = 0.0;
  double sum_distance = 0.0;
  int numerical_nonzero = 0;
  int analytic_nonzero = 0;
  int numerical_zero = 0;
  int expected_zero = 0;
  std::string message;
};

OracleReport oracle_match(const ResonanceSpectrum& numerical, const ResonanceSpectrum& analytic, double tol = 1e-7,
                          double zero_threshold = 1e-6);

struct RadialPoint {
  double r = 0.0;
  double fraction = 0.0;
};

std::vector<RadialPoint> radial_profile(const ResonanceSpectrum& spec, int k, const std::vector<double>& radii);

struct WeylPoint {
  double N = 0.0;
  double count = 0.0;
};

double weyl_fit(const std::vector<WeylPoint>& points);

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

std::int64_t binomial(int n, int k);

// Fraction of degree-p words of length k whose primitive period is < k.
Rational necklace_period_fraction(int k, int p);

std::string spectrum_csv(const ResonanceSpectrum& spec);

// Radii 0.1, 0.2, ..., 0.8 of the published counting table for the 3-baker.
std::vector<double> weyl_table_radii();
// Published counts #{|lambda| >= r} for B_h, N = 3^k, k = 1..6 (row k-1, column per radius).
const std::vector<std::vector<int>>& reference_weyl_counts();

struct WeylRow {
  int k = 0;
  std::size_t N = 0;
  double r = 0.0;
  int count = 0;
};

std::string weyl_csv(const std::vector<WeylRow>& rows);

}  // namespace oqmap
