#pragma once

#include "oqmap/core.hpp"
#include "oqmap/torus.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace oqmap {

// D = 4 two-lead geometry: lead 1 = strip 0, lead 2 = strip 3, interior = strips 1, 2.
struct LeadConfig {
  static constexpr int D = 4;
  int k = 1;

  explicit LeadConfig(int k_);
  std::size_t N() const;
  std::size_t M() const;
  // first position index of strip s (strips are contiguous blocks of M positions)
  std::size_t strip_begin(int s) const { return static_cast<std::size_t>(s) * M(); }
};

struct ChannelClass {
  enum class Kind { transmitted, reflected, nonclassical };
  Kind kind = Kind::nonclassical;
  int exit_index = 0;  // l_0 for classical channels, 0 otherwise
};

std::string to_string(ChannelClass::Kind k);

ChannelClass classify_channel(const QuDitWord& eps);

// Lead-1 word 0 eps_2 ... eps_k for channel index c in [0, M).
QuDitWord lead_word(int k, std::size_t channel);

struct ChannelCounts {
  std::size_t transmitted = 0;
  std::size_t reflected = 0;
  std::size_t nonclassical = 0;
};

ChannelCounts channel_counts(int k);

struct TransmissionOptions {
  double tail_tol = 1e-10;
  int max_steps = 100000;
  int ratio_window = 8;
};

struct TransmissionMatrix {
  Matrix t;  // rows: lead-2 channels, cols: lead-1 channels
  double theta = 0.0;
  int n_max = 0;
  double tail_bound = 0.0;
};

// t(theta) = sum_n e^{i n theta} Pi_L2 U (Pi_I U)^{n-1} Pi_L1, all thetas in one sweep.
std::vector<TransmissionMatrix> transmission_matrices(const QuantumMap& U, const LeadConfig& cfg,
                                                      const std::vector<double>& thetas,
                                                      const TransmissionOptions& opts = {});
TransmissionMatrix transmission_matrix(const QuantumMap& U, const LeadConfig& cfg, double theta,
                                       const TransmissionOptions& opts = {});

// t_1, ..., t_count (index n-1 holds t_n).
std::vector<Matrix> transmission_components(const QuantumMap& U, const LeadConfig& cfg, int count);

double conductance(const Matrix& t);
double noise_power(const Matrix& t);
double fano(const Matrix& t);
std::vector<double> transmission_eigenvalues(const Matrix& t);

// Product state coeff * a_1 (x) ... (x) a_k in C^4 factors, a_1 most significant.
struct ProductState {
  cplx coeff = 1.0;
  std::vector<std::array<cplx, 4>> factors;

  double norm2() const;
  bool is_zero() const;
};

cplx inner(const ProductState& a, const ProductState& b);

struct ProductSum {
  std::vector<ProductState> terms;

  cplx inner(const ProductSum& other) const;
  double norm2() const { return inner(*this).real(); }
  // Dense coordinates in lead 2 (first factor component 3).
  Vector lead2_vector() const;
};

// t_n |eps> for n >= 1 as a product state in full coordinates.
ProductState walsh_t_component(const QuDitWord& eps, int n);

struct TensorColumn {
  ProductSum state;
  int m_max = 0;
  double tail_bound = 0.0;
};

// Steps past n = k for a cutoff fraction Theta: min(floor(Theta k), k - 1).
int theta_cut_steps(int k, double theta_cut = 0.2);

// sum_{m=0}^{m_max} e^{i (k+m) theta} t_{k+m} |eps>; tail bound from the exact norms of later
// components plus a geometric remainder.
TensorColumn walsh_t_apply(const QuDitWord& eps, double theta, int m_max);

struct TransportSummary {
  int k = 0;
  double theta = 0.0;
  double g = 0.0;
  double P = 0.0;
  double F = 0.0;
  double fano_normalized = 0.0;  // P / 2^{k-1}
  ChannelCounts counts;
  int n_max = 0;
  double tail_bound = 0.0;
};

struct TransportReport {
  int k = 0;
  std::string path;
  std::vector<TransportSummary> rows;
  double mean_g = 0.0, std_g = 0.0;
  double mean_P = 0.0, std_P = 0.0;
  double mean_F = 0.0;
};

std::vector<double> theta_grid(int points);

TransportReport transport_summary_dense(const QuantumMap& U, const std::vector<double>& thetas,
                                        const TransmissionOptions& opts = {});
TransportReport transport_summary_tensor(int k, const std::vector<double>& thetas, int m_max);
// Walsh 4-baker; path "dense" (k <= 6 by default) or "tensor" (k <= 12 by default).
TransportReport transport_summary(int k, const std::vector<double>& thetas, const std::string& path,
                                  const TransmissionOptions& opts = {});

struct TransportLimits {
  int dense_max_k = 6;
  int tensor_max_k = 12;
};

TransportLimits& transport_limits();

struct GenericityReport {
  int k = 0;
  int m_cut = 0;
  std::size_t nonclassical = 0;
  std::size_t measured = 0;       // words with a nonzero cross term <t_{k+m} eps, t_{k+m'} eps>
  std::size_t combinatorial = 0;  // words with a shifted-subsequence coincidence
  double fraction() const { return nonclassical ? static_cast<double>(measured) / nonclassical : 0.0; }
};

// Exhaustive over nonclassical words.
GenericityReport cross_term_genericity(int k, int m_cut);

// Symbolic necessary condition for a nonzero cross term between components m' < m.
bool shifted_coincidence(const QuDitWord& eps, int m, int mp);

// ||sum_{m <= m_cut} t_{k+m}^* t_{k+m} |eps>||^2 from dense components.
double psi0_norm2(const std::vector<Matrix>& components, int k, std::size_t channel, int m_cut);

std::string transport_csv(const TransportReport& r);
std::string transmission_eigenvalues_csv(const std::vector<double>& T);

}  // namespace oqmap
