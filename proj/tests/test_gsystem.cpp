#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "kh/gsystem.hpp"

using namespace kh;

namespace {

std::mt19937_64 rng(55007u);

Eigen::MatrixXcd random_unitary(Eigen::Index d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd m(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = Complex(n(rng), n(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  return Eigen::MatrixXcd(qr.householderQ());
}

std::vector<std::size_t> random_perm(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

KhVector random_vector(const KhShape& shape) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<Eigen::VectorXcd> f;
  for (std::size_t w = 0; w < shape.points(); ++w) {
    Eigen::VectorXcd v(shape.dim(w));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(d(rng), d(rng));
    f.push_back(v);
  }
  return KhVector(shape, std::move(f));
}

// Constant fiber dimension, random base permutations, random unitaries.
GSystem random_system(std::size_t points, Eigen::Index dim, std::size_t generators) {
  auto base = numbered_base(points);
  KhShape shape(base, std::vector<Eigen::Index>(points, dim));
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> perms;
  std::vector<std::vector<Eigen::MatrixXcd>> us;
  for (std::size_t g = 0; g < generators; ++g) {
    names.push_back("g" + std::to_string(g));
    perms.push_back(random_perm(points));
    std::vector<Eigen::MatrixXcd> u;
    for (std::size_t w = 0; w < points; ++w) u.push_back(random_unitary(dim));
    us.push_back(std::move(u));
  }
  BaseAction act(base, std::move(names), std::move(perms),
                 generators == 1 ? GroupKind::SingleGeneratorZ : GroupKind::FreeOnGenerators);
  return GSystem(std::move(act), std::move(shape), std::move(us));
}

GSystem cyclic_shift_system(Eigen::Index d) {
  auto base = numbered_base(1);
  KhShape shape(base, {d});
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) u((i + 1) % d, i) = 1.0;
  BaseAction act(base, {"t"}, {{0}}, GroupKind::SingleGeneratorZ);
  return GSystem(std::move(act), std::move(shape), {{u}});
}

// Unsplit commutant dimension: one global linear system over all points.
Eigen::Index oracle_commutant_dim(const GSystem& sys, double tol) {
  const auto& shape = sys.shape();
  std::vector<Eigen::Index> offset(shape.points());
  Eigen::Index total = 0;
  for (std::size_t w = 0; w < shape.points(); ++w) {
    offset[w] = total;
    total += shape.dim(w) * shape.dim(w);
  }
  Eigen::Index rows = 0;
  for (std::size_t g = 0; g < sys.action().generator_count(); ++g) {
    (void)g;
    rows += total;
  }
  if (total == 0) return 0;
  if (rows == 0) return total;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows, total);
  Eigen::Index row = 0;
  for (std::size_t g = 0; g < sys.action().generator_count(); ++g) {
    const auto& sigma = sys.action().perm(g);
    for (std::size_t w = 0; w < shape.points(); ++w) {
      const Eigen::Index d = shape.dim(w);
      const auto& u = sys.unitary(g, w);
      const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
      m.block(row, offset[sigma[w]], d * d, d * d) =
          Eigen::kroneckerProduct(u.transpose(), id).eval();
      m.block(row, offset[w], d * d, d * d) -= Eigen::kroneckerProduct(id, u).eval();
      row += d * d;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  const double cut = tol * (s.size() > 0 ? s(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cut && s(rank) > 0.0) ++rank;
  return total - rank;
}

}  // namespace

TEST_CASE("group words") {
  auto sys = random_system(4, 3, 2);
  auto x = random_vector(sys.shape());
  CHECK(sup_norm(apply_group(sys, {}, x) - x) == 0.0);
  CHECK(sup_norm(apply_group(sys, {{"g0", 1}, {"g0", -1}}, x) - x) <= 1e-12);
  CHECK(sup_norm(apply_group(sys, {{"g1", 3}, {"g1", -3}}, x) - x) <= 1e-12);
  CHECK_THROWS_AS(apply_group(sys, {{"nope", 1}}, x), UnknownGenerator);

  // Lattice norm transforms by the base motion.
  for (std::size_t g = 0; g < 2; ++g) {
    auto tx = apply_generator(sys, g, x);
    auto want = koopman(sys.action(), g, lattice_norm(x));
    CHECK((lattice_norm(tx) - want).sup_norm() <= 1e-10);
  }

  // Round trip through a longer mixed word and its reverse.
  Word word{{"g0", 2}, {"g1", -1}, {"g0", 1}};
  Word back{{"g0", -1}, {"g1", 1}, {"g0", -2}};
  Word both = word;
  both.insert(both.end(), back.begin(), back.end());
  CHECK(sup_norm(apply_group(sys, both, x) - x) <= 1e-12);
}

TEST_CASE("suborthonormality is preserved") {
  auto sys = random_system(5, 3, 2);
  auto es = gram_schmidt({random_vector(sys.shape()), random_vector(sys.shape())});
  REQUIRE(is_suborthonormal(es));
  std::vector<KhVector> moved;
  for (const auto& e : es) moved.push_back(apply_group(sys, {{"g1", 1}, {"g0", 2}}, e));
  CHECK(is_suborthonormal(moved, 1e-9));
}

TEST_CASE("fixed submodule of simple systems") {
  SUBCASE("trivial action keeps everything") {
    auto base = numbered_base(2);
    KhShape shape(base, {2, 3});
    BaseAction act(base, {"t"}, {{0, 1}}, GroupKind::SingleGeneratorZ);
    std::vector<std::vector<Eigen::MatrixXcd>> us{
        {Eigen::MatrixXcd::Identity(2, 2), Eigen::MatrixXcd::Identity(3, 3)}};
    GSystem sys(act, shape, us);
    // One scalar block per singleton orbit: 2 + 3 vectors, spanning everything.
    auto fix = fixed_submodule(sys);
    CHECK(fix.size() == 5);
    CHECK(is_suborthonormal(fix));
    CHECK(dimension_function(fix, shape)
              .approx_equal(StoneElement(base, (Eigen::VectorXcd(2) << 2.0, 3.0).finished()), 0.5));
  }

  SUBCASE("cyclic shift fixes the constants") {
    auto sys = cyclic_shift_system(3);
    auto fix = fixed_submodule(sys);
    REQUIRE(fix.size() == 1);
    auto v = fix[0].fiber(0);
    CHECK(std::abs(std::abs(v(0)) - 1.0 / std::sqrt(3.0)) <= 1e-10);
    CHECK(std::abs(v(0) - v(1)) <= 1e-10);
    CHECK(std::abs(v(1) - v(2)) <= 1e-10);
  }

  SUBCASE("base swap with identity maps") {
    auto base = numbered_base(2);
    KhShape shape(base, {2, 2});
    BaseAction act(base, {"s"}, {{1, 0}}, GroupKind::SingleGeneratorZ);
    std::vector<std::vector<Eigen::MatrixXcd>> us{
        {Eigen::MatrixXcd::Identity(2, 2), Eigen::MatrixXcd::Identity(2, 2)}};
    GSystem sys(act, shape, us);
    auto fix = fixed_submodule(sys);
    REQUIRE(fix.size() == 2);
    for (const auto& x : fix) {
      CHECK((x.fiber(0) - x.fiber(1)).norm() <= 1e-10);
      // Pointwise unit length after the orbit rescale.
      CHECK(std::abs(x.fiber(0).norm() - 1.0) <= 1e-10);
    }
    CHECK(is_suborthonormal(fix, 1e-9));
  }
}

TEST_CASE("fixed submodule on random systems") {
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<std::size_t> np(1, 5);
    std::uniform_int_distribution<Eigen::Index> nd(1, 4);
    std::uniform_int_distribution<std::size_t> ng(1, 2);
    auto sys = random_system(np(rng), nd(rng), ng(rng));
    auto fix = fixed_submodule(sys);
    CHECK(is_suborthonormal(fix, 1e-8));
    for (const auto& x : fix) {
      for (std::size_t g = 0; g < sys.action().generator_count(); ++g) {
        CHECK(sup_norm(apply_generator(sys, g, x) - x) <= 1e-8);
        // Inner products of fixed vectors are invariant functions.
        for (const auto& y : fix) {
          auto ip = inner_product(x, y);
          CHECK((koopman(sys.action(), g, ip) - ip).sup_norm() <= 1e-8);
        }
      }
    }
  }
}

TEST_CASE("intertwiner basis of simple systems") {
  SUBCASE("circulant commutant") {
    auto sys = cyclic_shift_system(3);
    auto basis = intertwiner_basis(sys);
    CHECK(basis.size() == 3);
    CHECK(oracle_commutant_dim(sys, 1e-9) == 3);
    for (const auto& a : basis) {
      // Circulant: constant diagonals modulo the shift.
      const auto& b = a.block(0);
      CHECK(std::abs(b(0, 0) - b(1, 1)) <= 1e-9);
      CHECK(std::abs(b(1, 0) - b(2, 1)) <= 1e-9);
      CHECK(std::abs(b(2, 0) - b(0, 1)) <= 1e-9);
    }
  }

  SUBCASE("trivial dynamics has the full matrix algebra") {
    auto base = numbered_base(2);
    KhShape shape(base, {2, 3});
    auto sys = GSystem::trivial(shape);
    CHECK(intertwiner_basis(sys).size() == 4 + 9);
    CHECK(oracle_commutant_dim(sys, 1e-9) == 13);
  }
}

TEST_CASE("intertwiner basis on random systems") {
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<std::size_t> np(1, 4);
    std::uniform_int_distribution<Eigen::Index> nd(1, 3);
    std::uniform_int_distribution<std::size_t> ng(1, 2);
    auto sys = random_system(np(rng), nd(rng), ng(rng));
    auto basis = intertwiner_basis(sys);
    CHECK(static_cast<Eigen::Index>(basis.size()) == oracle_commutant_dim(sys, 1e-9));
    for (std::size_t i = 0; i < basis.size(); ++i) {
      CHECK(intertwining_residual(sys, basis[i]) <= 1e-8);
      auto n = hs_norm(basis[i]);
      for (std::size_t w = 0; w < n.size(); ++w) {
        double v = n[w].real();
        CHECK((std::abs(v) <= 1e-8 || std::abs(v - 1.0) <= 1e-8));
      }
      for (std::size_t j = i + 1; j < basis.size(); ++j)
        CHECK(hs_inner(basis[i], basis[j]).sup_norm() <= 1e-8);
    }
    // The identity intertwines, so it must project onto the span unchanged.
    auto id = ModuleHom::identity(sys.shape());
    auto acc = ModuleHom::zero(sys.shape(), sys.shape());
    for (const auto& a : basis) acc = acc + hs_inner(id, a) * a;
    CHECK(sup_hs_norm(acc - id) <= 1e-8);
  }
}

TEST_CASE("ds wm split") {
  SUBCASE("random systems are fully discrete") {
    for (int trial = 0; trial < 20; ++trial) {
      std::uniform_int_distribution<std::size_t> np(1, 4);
      std::uniform_int_distribution<Eigen::Index> nd(1, 3);
      auto sys = random_system(np(rng), nd(rng), 1);
      auto split = ds_wm_decomposition(sys);
      CHECK(split.wm_basis.empty());
      auto dims = dimension_function(split.ds_basis, sys.shape());
      for (std::size_t w = 0; w < sys.shape().points(); ++w)
        CHECK(dims[w].real() == doctest::Approx(static_cast<double>(sys.shape().dim(w))));
      // Everything is orthogonal to nothing: the wm test function criterion.
      auto inters = intertwiner_basis(sys);
      for (const auto& e : split.ds_basis) {
        double best = 0.0;
        for (const auto& a : inters)
          best = std::max(best, hs_inner(rank_one(e, e), a).sup_norm());
        CHECK(best > 1e-3);
      }
    }
  }

  SUBCASE("zero module") {
    auto sys = GSystem::trivial(KhShape(numbered_base(2), {0, 0}));
    auto split = ds_wm_decomposition(sys);
    CHECK(split.ds_basis.empty());
    CHECK(split.wm_basis.empty());
  }
}

TEST_CASE("equivariant spectral data") {
  SUBCASE("identity") {
    auto sys = random_system(3, 2, 1);
    auto out = equivariant_spectral(sys, ModuleHom::identity(sys.shape()));
    REQUIRE(out.decomposition.terms() == 1);
    CHECK((out.decomposition.lambdas[0] - StoneElement::one(sys.shape().base())).sup_norm() <=
          1e-10);
    CHECK(sup_hs_norm(out.decomposition.pos_projections[0] - ModuleHom::identity(sys.shape())) <=
          1e-9);
    CHECK(out.lambda_equivariance <= 1e-10);
    CHECK(out.commutation_residual <= 1e-9);
  }

  SUBCASE("two cycle base") {
    auto base = numbered_base(2);
    KhShape shape(base, {2, 2});
    BaseAction act(base, {"s"}, {{1, 0}}, GroupKind::SingleGeneratorZ);
    std::vector<std::vector<Eigen::MatrixXcd>> us{
        {Eigen::MatrixXcd::Identity(2, 2), Eigen::MatrixXcd::Identity(2, 2)}};
    GSystem sys(act, shape, us);
    Eigen::MatrixXcd d21 = (Eigen::MatrixXcd(2, 2) << 2, 0, 0, 1).finished();
    ModuleHom a(shape, shape, {d21, d21});
    auto out = equivariant_spectral(sys, a);
    REQUIRE(out.decomposition.terms() == 2);
    CHECK(out.decomposition.lambdas[0][0].real() == doctest::Approx(2.0));
    CHECK(out.decomposition.lambdas[0][1].real() == doctest::Approx(2.0));
    CHECK(out.lambda_equivariance <= 1e-12);
  }

  SUBCASE("random intertwiners") {
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      auto sys = random_system(3, 3, 1);
      auto basis = intertwiner_basis(sys);
      auto acc = ModuleHom::zero(sys.shape(), sys.shape());
      for (const auto& a : basis) acc = acc + Complex(c(rng), c(rng)) * a;
      auto h = Complex(0.5, 0) * (acc + adjoint(acc));
      auto out = equivariant_spectral(sys, h);
      CHECK(out.lambda_equivariance <= 1e-8);
      CHECK(out.commutation_residual <= 1e-7);
      CHECK(out.decomposition.residual_norm <= 1e-8 * std::max(1.0, sup_op_norm(h)));
    }
  }

  SUBCASE("non intertwiners are rejected") {
    auto sys = cyclic_shift_system(4);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    m(0, 0) = 1.0;
    ModuleHom a(sys.shape(), sys.shape(), {m});
    REQUIRE(intertwining_residual(sys, a) > 1e-3);
    CHECK_THROWS_AS(equivariant_spectral(sys, a), NotIntertwining);
  }
}

TEST_CASE("intertwiners rebuild from harvested levels") {
  for (int trial = 0; trial < 10; ++trial) {
    auto sys = random_system(3, 2, 1);
    auto basis = intertwiner_basis(sys);
    for (const auto& a : basis) {
      auto h = Complex(0.5, 0) * (a + adjoint(a));
      auto k = Complex(0, -0.5) * (a - adjoint(a));
      auto dh = equivariant_spectral(sys, h);
      auto dk = equivariant_spectral(sys, k);
      auto rebuilt = reconstruct(dh.decomposition, sys.shape()) +
                     Complex(0, 1) * reconstruct(dk.decomposition, sys.shape());
      CHECK(sup_hs_norm(rebuilt - a) <= 1e-8);
      CHECK(dh.lambda_equivariance <= 1e-8);
      CHECK(dk.lambda_equivariance <= 1e-8);
    }
  }
}

TEST_CASE("orthogonality bridge") {
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<std::size_t> np(1, 4);
    std::uniform_int_distribution<Eigen::Index> nd(1, 4);
    auto base = numbered_base(np(rng));
    KhShape shape(base, std::vector<Eigen::Index>(base->size(), nd(rng)));
    auto es = gram_schmidt({random_vector(shape), random_vector(shape)});
    TensorSum ub;
    for (const auto& e : es) ub.push_back({e, e});
    auto x = random_vector(shape);
    auto lhs = tensor_inner({{x, x}}, ub, base);
    Eigen::VectorXcd want(static_cast<Eigen::Index>(base->size()));
    want.setZero();
    for (const auto& e : es) {
      auto c = inner_product(x, e);
      for (std::size_t w = 0; w < base->size(); ++w)
        want(static_cast<Eigen::Index>(w)) += std::norm(c[w]);
    }
    CHECK((lhs - StoneElement(base, want)).sup_norm() <= 1e-9);
  }
}
