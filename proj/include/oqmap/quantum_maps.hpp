#pragma once

#include "oqmap/classical.hpp"
#include "oqmap/core.hpp"
#include "oqmap/torus.hpp"

#include <vector>

namespace oqmap {

struct OmegaBlock {
  int D = 0;
  std::vector<int> kept;
  Matrix block;
};

enum class AssemblyPath { automatic, dense, tensor };

QuantumMap build_open_baker(const BakerParams& params, const PlanckGrid& grid);
QuantumMap build_toy_baker(const PlanckGrid& grid);

// W_k^* blockdiag(W_{k-1} on kept strips, 0 elsewhere). Default path is tensor above 3^5.
QuantumMap build_walsh_open_baker(int D, int k, const std::vector<int>& kept,
                                  AssemblyPath path = AssemblyPath::automatic);
QuantumMap build_walsh_2baker(int k, AssemblyPath path = AssemblyPath::automatic);

// Closed D=4 Walsh baker: all four strips kept.
QuantumMap build_walsh_4baker(int k, AssemblyPath path = AssemblyPath::automatic);

// Closed D=4 baker with ordinary DFT blocks: F_N^* blockdiag(F_M, F_M, F_M, F_M).
QuantumMap build_dft_4baker(int k);

OmegaBlock omega_block(int D, const std::vector<int>& kept);

// F_D^* with the columns of removed strips zeroed.
Matrix truncated_inverse_dft(int D, const std::vector<int>& kept);

// Action of the Walsh open baker on a position-basis vector without forming the matrix.
Vector walsh_open_baker_apply(int D, int k, const std::vector<int>& kept, const Vector& v);

// Orthonormal basis of the invariant subspace carrying the nonzero spectrum of the
// Walsh open baker: q^{(x)k} with q spanning range((F_D^* Pi)^D).
Matrix walsh_nontrivial_basis(int D, int k, const std::vector<int>& kept);

// Left and right cutoffs for residual diagnostics.
struct Cutoffs {
  TrigObservable left;
  TrigObservable right;
};

// ((1 + cos 2 pi (x - x0)) / 2)^n in q or p.
TrigObservable bump_q(double q0, int n);
TrigObservable bump_p(double p0, int n);

// Cutoffs localised in strip 1 (right) and its image (left) of the symmetric 3-baker.
Cutoffs default_toy_cutoffs();

// g_R(rho) = chi_R(rho)^2 sum_j P_j(rho) chi_L(kappa_j rho)^2, as a trigonometric polynomial.
TrigObservable pushforward_weight(const WeightedRelation& rel, const Cutoffs& c, int grid_size, int bandwidth);

// || U_{LR}^* U_{LR} - Op(g_R) ||, U_{LR} = Op(chi_L) U Op(chi_R).
double weighted_relation_residual(const QuantumMap& U, const WeightedRelation& rel, const Cutoffs& c,
                                  int grid_size = 128, double tol = 1e-8);

// || Op(f_L) U - U Op(f_R) ||
double egorov_residual(const QuantumMap& U, const TrigObservable& f_left, const TrigObservable& f_right,
                       double tol = 1e-8);

}  // namespace oqmap
