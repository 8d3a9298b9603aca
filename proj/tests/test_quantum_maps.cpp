#include <catch_amalgamated.hpp>

#include "oqmap/quantum_maps.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <random>

using namespace oqmap;

namespace {

double spectral_norm(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

Eigen::Index numerical_rank(const Matrix& a, double tol = 1e-10) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > tol) ++r;
  return r;
}

// e^{-2 pi i a b / n} / sqrt(n) straight from the definition
Matrix naive_dft(int n) {
  Matrix f(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) f(a, b) = std::polar(1.0 / std::sqrt(double(n)), -2 * kPi * a * b / n);
  }
  return f;
}

Vector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(g(rng), g(rng));
  return v.normalized();
}

Vector kron(const std::vector<Vector>& f) {
  Vector out = Vector::Ones(1);
  for (const auto& v : f) {
    Vector next(out.size() * v.size());
    for (Eigen::Index a = 0; a < out.size(); ++a) next.segment(a * v.size(), v.size()) = out[a] * v;
    out = std::move(next);
  }
  return out;
}

}  // namespace

TEST_CASE("open baker N=3 is F_3^* with the middle column removed") {
  const Matrix b = build_open_baker(BakerParams::three_baker(), PlanckGrid(3)).matrix;
  Matrix ref = naive_dft(3).adjoint();
  ref.col(1).setZero();
  CHECK((b - ref).norm() < 1e-15);
}

TEST_CASE("open baker N=9 block structure") {
  const Matrix b = build_open_baker(BakerParams::three_baker(), PlanckGrid(9)).matrix;
  Matrix mid = Matrix::Zero(9, 9);
  mid.block(0, 0, 3, 3) = naive_dft(3);
  mid.block(6, 6, 3, 3) = naive_dft(3);
  const Matrix ref = naive_dft(9).adjoint() * mid;
  CHECK((b - ref).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(b.middleCols(3, 3).norm() == 0.0);
}

TEST_CASE("open baker is a contraction with the expected rank") {
  for (BakerParams p : {BakerParams::three_baker(), BakerParams{4, 4, 1, 2}, BakerParams{2, 3, 0, 2}}) {
    const std::size_t n = 36;
    const Matrix b = build_open_baker(p, PlanckGrid(n)).matrix;
    CHECK(spectral_norm(b) < 1 + 1e-12);
    const Eigen::Index r = numerical_rank(b);
    CHECK(r == static_cast<Eigen::Index>(n / p.D1 + n / p.D2));
    // kept columns are isometric
    const Matrix g = b.adjoint() * b;
    CHECK((g * g - g).norm() < 1e-12);
  }
}

TEST_CASE("open baker rejects N not divisible by the strip counts") {
  CHECK_THROWS_AS(build_open_baker(BakerParams::three_baker(), PlanckGrid(10)), std::invalid_argument);
  CHECK_THROWS_AS(build_open_baker(BakerParams{2, 3, 0, 2}, PlanckGrid(9)), std::invalid_argument);
}

TEST_CASE("toy baker entries at N=3 and N=9") {
  const cplx w = std::polar(1.0, 2 * kPi / 3);
  const double s = 1 / std::sqrt(3.0);
  const Matrix b3 = build_toy_baker(PlanckGrid(3)).matrix;
  Matrix r3 = Matrix::Zero(3, 3);
  r3.col(0).setConstant(s);
  r3(0, 2) = s;
  r3(1, 2) = s * w * w;
  r3(2, 2) = s * w;
  CHECK((b3 - r3).norm() < 1e-15);

  const Matrix b9 = build_toy_baker(PlanckGrid(9)).matrix;
  Matrix r9 = Matrix::Zero(9, 9);
  for (int row = 0; row < 9; ++row) {
    r9(row, row / 3) = s;
    r9(row, 6 + row / 3) = s * std::pow(w, 2 * row);
  }
  CHECK((b9 - r9).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(b9.middleCols(3, 3).norm() == 0.0);
}

TEST_CASE("toy baker is a contraction whose kernel has dimension N/3") {
  for (std::size_t n : {3u, 9u, 27u, 81u}) {
    const Matrix b = build_toy_baker(PlanckGrid(n)).matrix;
    CHECK(spectral_norm(b) < 1 + 1e-12);
    CHECK(static_cast<std::size_t>(numerical_rank(b)) == 2 * n / 3);
  }
  CHECK_THROWS_AS(build_toy_baker(PlanckGrid(8)), std::invalid_argument);
}

TEST_CASE("toy baker coincides with the D=3 Walsh open baker") {
  for (int k = 1; k <= 6; ++k) {
    const Matrix toy = build_toy_baker(PlanckGrid::power(3, k)).matrix;
    for (auto path : {AssemblyPath::dense, AssemblyPath::tensor}) {
      CHECK((toy - build_walsh_open_baker(3, k, {0, 2}, path).matrix).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("Walsh open baker: dense and tensor assemblies coincide") {
  const std::vector<std::pair<int, std::vector<int>>> cases{{3, {0, 2}}, {4, {1, 2}}, {4, {0, 2}}, {4, {1, 3}}};
  for (const auto& [D, kept] : cases) {
    const int kmax = D == 3 ? 6 : 5;
    for (int k = 1; k <= kmax; ++k) {
      const Matrix d = build_walsh_open_baker(D, k, kept, AssemblyPath::dense).matrix;
      const Matrix t = build_walsh_open_baker(D, k, kept, AssemblyPath::tensor).matrix;
      CHECK((d - t).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  for (int k = 1; k <= 5; ++k) {
    CHECK((build_walsh_4baker(k, AssemblyPath::dense).matrix - build_walsh_4baker(k, AssemblyPath::tensor).matrix)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}

TEST_CASE("Walsh open baker acts on product states by shift and truncated F_D^*") {
  std::mt19937_64 rng(21);
  const int D = 3, k = 4;
  const std::vector<int> kept{0, 2};
  const Matrix b = build_walsh_open_baker(D, k, kept).matrix;
  Matrix t = naive_dft(D).adjoint();
  t.col(1).setZero();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vector> f;
    for (int l = 0; l < k; ++l) f.push_back(random_vector(rng, D));
    std::vector<Vector> out(f.begin() + 1, f.end());
    out.push_back(t * f[0]);
    CHECK((b * kron(f) - kron(out)).norm() < 1e-13);
    CHECK((walsh_open_baker_apply(D, k, kept, kron(f)) - kron(out)).norm() < 1e-13);
  }
}

TEST_CASE("Walsh 2-baker A_4 explicit matrix") {
  const double s = 1 / std::sqrt(2.0);
  Matrix ref(4, 4);
  ref << s, 0, s, 0,
         s, 0, -s, 0,
         0, s, 0, s,
         0, s, 0, -s;
  CHECK((build_walsh_2baker(2, AssemblyPath::dense).matrix - ref).norm() < 1e-15);
  CHECK((build_walsh_2baker(2, AssemblyPath::tensor).matrix - ref).norm() < 1e-15);
}

TEST_CASE("Walsh 2-baker is unitary and shifts product states") {
  std::mt19937_64 rng(8);
  for (int k = 1; k <= 7; ++k) {
    const Matrix a = build_walsh_2baker(k).matrix;
    CHECK((a.adjoint() * a - Matrix::Identity(a.rows(), a.cols())).norm() < 1e-12);
  }
  const int k = 6;
  const Matrix a = build_walsh_2baker(k).matrix;
  const Matrix f2 = naive_dft(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vector> f;
    for (int l = 0; l < k; ++l) f.push_back(random_vector(rng, 2));
    std::vector<Vector> out(f.begin() + 1, f.end());
    out.push_back(f2 * f[0]);
    CHECK((a * kron(f) - kron(out)).norm() < 1e-13);
  }
}

TEST_CASE("closed D=4 bakers are unitary") {
  for (int k = 1; k <= 4; ++k) {
    const Matrix w = build_walsh_4baker(k).matrix;
    CHECK((w.adjoint() * w - Matrix::Identity(w.rows(), w.cols())).norm() < 1e-12);
    const Matrix d = build_dft_4baker(k).matrix;
    CHECK((d.adjoint() * d - Matrix::Identity(d.rows(), d.cols())).norm() < 1e-12);
  }
  // at k=1 both reduce to F_4^*
  CHECK((build_dft_4baker(1).matrix - naive_dft(4).adjoint()).norm() < 1e-15);
  CHECK((build_walsh_4baker(1).matrix - naive_dft(4).adjoint()).norm() < 1e-15);
}

TEST_CASE("builders are deterministic") {
  const Matrix a = build_walsh_open_baker(4, 4, {1, 2}).matrix;
  const Matrix b = build_walsh_open_baker(4, 4, {1, 2}).matrix;
  CHECK(a == b);
  CHECK(build_toy_baker(PlanckGrid(27)).matrix == build_toy_baker(PlanckGrid(27)).matrix);
  CHECK(build_open_baker(BakerParams::three_baker(), PlanckGrid(27)).matrix ==
        build_open_baker(BakerParams::three_baker(), PlanckGrid(27)).matrix);
}

TEST_CASE("omega blocks") {
  const double s3 = 1 / std::sqrt(3.0);
  const cplx w = std::polar(1.0, 2 * kPi / 3);
  Matrix o3(2, 2);
  o3 << s3, s3, s3, s3 * w;
  CHECK((omega_block(3, {0, 2}).block - o3).norm() < 1e-15);
  CHECK((omega_block(3, {2, 0, 2}).block - o3).norm() < 1e-15);

  const cplx i(0, 1);
  Matrix o4(2, 2);
  o4 << 0.5 * i, -0.5, -0.5, 0.5;
  CHECK((omega_block(4, {1, 2}).block - o4).norm() < 1e-15);

  Matrix o02(2, 2);
  o02 << 0.5, 0.5, 0.5, 0.5;
  CHECK((omega_block(4, {0, 2}).block - o02).norm() < 1e-15);

  // removing strips 0 and 2 by the same restriction rule gives a rank-one block
  const Matrix o13 = omega_block(4, {1, 3}).block;
  Matrix r13(2, 2);
  r13 << 0.5 * i, -0.5 * i, -0.5 * i, 0.5 * i;
  CHECK((o13 - r13).norm() < 1e-15);
  CHECK(numerical_rank(o13) == 1);
  CHECK(std::abs(o13.trace() - i) < 1e-15);

  CHECK_THROWS_AS(omega_block(3, {}), std::invalid_argument);
  CHECK_THROWS_AS(omega_block(3, {3}), std::invalid_argument);
}

TEST_CASE("nontrivial basis spans an invariant subspace") {
  const std::vector<std::pair<int, std::vector<int>>> cases{{3, {0, 2}}, {4, {1, 2}}, {4, {0, 2}}, {4, {1, 3}}};
  for (const auto& [D, kept] : cases) {
    for (int k = 1; k <= 4; ++k) {
      const Matrix q = walsh_nontrivial_basis(D, k, kept);
      const Matrix b = build_walsh_open_baker(D, k, kept).matrix;
      CHECK((q.adjoint() * q - Matrix::Identity(q.cols(), q.cols())).norm() < 1e-12);
      const Matrix bq = b * q;
      CHECK((bq - q * (q.adjoint() * bq)).norm() < 1e-12);
    }
  }
  CHECK(walsh_nontrivial_basis(3, 3, {0, 2}).cols() == 8);
  CHECK(walsh_nontrivial_basis(4, 3, {1, 3}).cols() == 1);
}

TEST_CASE("bump cutoffs") {
  const auto b = bump_q(0.25, 3);
  CHECK(std::abs(b(0.25, 0.7) - 1.0) < 1e-14);
  CHECK(std::abs(b(0.75, 0.1)) < 1e-14);
  CHECK(b.max_frequency() == 3);
  CHECK(b.is_real());
  const auto c = default_toy_cutoffs();
  CHECK(std::abs(c.right(1.0 / 6, 0.5) - 1.0) < 1e-14);
  CHECK(std::abs(c.left(0.5, 1.0 / 6) - 1.0) < 1e-14);
}

TEST_CASE("weighted relation residual decreases with N") {
  const auto cut = default_toy_cutoffs();
  const auto toy = toy_relation();
  const auto ob = open_baker_relation(BakerParams::three_baker());
  std::vector<double> rt, rb;
  for (int k = 3; k <= 5; ++k) {
    const PlanckGrid g = PlanckGrid::power(3, k);
    rt.push_back(weighted_relation_residual(build_toy_baker(g), toy, cut));
    rb.push_back(weighted_relation_residual(build_open_baker(BakerParams::three_baker(), g), ob, cut));
  }
  CHECK(rt[0] > rt[1]);
  CHECK(rt[1] > rt[2]);
  CHECK(rb[0] > rb[1]);
  CHECK(rb[1] > rb[2]);
  CHECK(rt[2] < 0.05);
  CHECK(rb[2] < 0.05);
  // empty cutoffs give zero
  CHECK(weighted_relation_residual(build_toy_baker(PlanckGrid(27)), toy, Cutoffs{}) == 0.0);
}

TEST_CASE("Egorov residual for the Walsh 2-baker decreases with k") {
  std::vector<double> r;
  for (int k = 3; k <= 7; ++k) {
    r.push_back(egorov_residual(build_walsh_2baker(k), TrigObservable::harmonic(1, 0), TrigObservable::harmonic(2, 0)));
  }
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] < r[i - 1]);
}
