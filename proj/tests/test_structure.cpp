#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <random>
#include <vector>

#include "kh/builders.hpp"
#include "kh/errors.hpp"
#include "kh/gsystem.hpp"
#include "kh/shift.hpp"
#include "kh/structure.hpp"

using namespace kh;

namespace {

std::mt19937_64& rng() {
  static std::mt19937_64 gen(83117u);
  return gen;
}

Eigen::VectorXcd random_function(std::size_t n) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd f(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = Complex(g(rng()), g(rng()));
  return f;
}

bool factor_is_bijective(const FiniteExtension& ext) {
  return ext.top().space().size() == ext.bottom().space().size();
}

}  // namespace

TEST_CASE("skew products have a full discrete part with rank one generators") {
  for (std::size_t n : {4u, 6u, 8u}) {
    CAPTURE(n);
    auto ext = skew_torus(n);
    auto report = kronecker_subspace(ext);

    CHECK(report.is_full);
    CHECK(report.families.size() == n);
    CHECK(report.rank_one_generators == n);
    for (const auto& fam : report.families) CHECK(fam.size() == 1);

    CHECK(report.char_gap <= 1e-9);
    CHECK(report.family_gap <= 1e-9);
    CHECK(report.sons_residual <= 1e-10);
    CHECK(report.wm_norm <= 1e-9);

    // One homogeneous block of full rank over the whole base.
    REQUIRE(report.rank_histogram.size() == 1);
    CHECK(report.rank_histogram[0].first == static_cast<Eigen::Index>(n));
    CHECK(report.rank_histogram[0].second == n);

    // Full discrete part separates all atoms.
    CHECK(report.partition.size() == n * n);
    CHECK(report.embedding.top().space().size() == n * n);
    CHECK(report.factor.top().space().size() == n * n);
  }
}

TEST_CASE("identity extensions are already their own discrete part") {
  auto ext = identity_extension(cyclic_rotation(5));
  auto report = kronecker_subspace(ext);
  CHECK(report.is_full);
  CHECK(report.partition.size() == 5);
  // One full-support generator spans all the dimension-one fibers over the
  // algebra.
  CHECK(report.ds_basis.size() == 1);
  REQUIRE(report.rank_histogram.size() == 1);
  CHECK(report.rank_histogram[0].first == 1);
  CHECK(report.rank_histogram[0].second == 5);

  auto tower = furstenberg_tower(ext);
  CHECK(tower.levels.size() == 1);
  CHECK(tower.stabilized_at == 0);
  CHECK(tower.is_full);
}

TEST_CASE("towers of genuine extensions stabilize after one step") {
  auto ext = skew_torus(6);
  auto tower = furstenberg_tower(ext);
  REQUIRE(tower.levels.size() == 2);
  CHECK(tower.stabilized_at == 1);
  CHECK(tower.is_full);
  // First level: the six rows; second level: all atoms split.
  CHECK(tower.levels[0].size() == 6);
  CHECK(tower.levels[1].size() == 36);

  auto ft = four_two();
  auto tower2 = furstenberg_tower(ft);
  REQUIRE(tower2.levels.size() == 2);
  CHECK(tower2.levels[0].size() == 2);
  CHECK(tower2.levels[1].size() == 4);
  CHECK(tower2.is_full);
}

TEST_CASE("weak mixing holds exactly for isomorphism extensions") {
  auto id = identity_extension(cyclic_rotation(4));
  auto wm = is_weakly_mixing(id);
  CHECK(wm.weakly_mixing);
  CHECK(wm.joint_fixed_dim == wm.bottom_fixed_dim);
  CHECK(wm.witness_residual <= 1e-9);

  auto ft = is_weakly_mixing(four_two());
  CHECK_FALSE(ft.weakly_mixing);
  CHECK(ft.joint_fixed_dim > ft.bottom_fixed_dim);
  CHECK(ft.witness_residual > 1e-3);
  CHECK(ft.witness.size() == 8);

  auto sk = is_weakly_mixing(skew_torus(6));
  CHECK_FALSE(sk.weakly_mixing);
}

TEST_CASE("dichotomy across random extensions") {
  for (int it = 0; it < 100; ++it) {
    CAPTURE(it);
    auto ext = random_extension(rng(), 4, 3, it % 4 == 0);
    auto wm = is_weakly_mixing(ext);
    auto report = kronecker_subspace(ext, 1 + static_cast<std::uint64_t>(it));
    auto tower = furstenberg_tower(ext, 1 + static_cast<std::uint64_t>(it));

    CHECK(report.is_full);
    CHECK(report.char_gap <= 1e-8);
    CHECK(report.family_gap <= 1e-8);
    CHECK(report.sons_residual <= 1e-9);

    // Weak mixing exactly when the discrete part adds nothing over the base,
    // which for full discrete parts means the factor map is a bijection.
    const bool strictly_extends = report.partition.size() > ext.bottom().space().size();
    CHECK(wm.weakly_mixing != strictly_extends);
    CHECK(wm.weakly_mixing == factor_is_bijective(ext));
    CHECK((wm.weakly_mixing || wm.witness_residual > 1e-6));

    CHECK(tower.is_full);
    CHECK(tower.levels.size() <= 2);
    CHECK(tower.stabilized_at + 1 == tower.levels.size());
  }
}

TEST_CASE("orthogonality criteria agree on finite systems") {
  auto ext = four_two();
  const std::size_t n = 4;

  auto zero = orthogonality_criteria(ext, Eigen::VectorXcd::Zero(n));
  CHECK(zero.orthogonal);
  CHECK(zero.agree);
  CHECK(zero.a_span_residual <= 1e-12);
  CHECK(zero.d_norm <= 1e-12);
  CHECK(zero.e_infimum <= 1e-12);

  auto one = orthogonality_criteria(ext, Eigen::VectorXcd::Ones(n));
  CHECK_FALSE(one.orthogonal);
  CHECK(one.agree);
  // The invariant part of the tensor square of the constant is the constant.
  CHECK(one.b_pairing == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(one.d_norm == doctest::Approx(1.0).epsilon(1e-10));

  for (int it = 0; it < 10; ++it) {
    auto f = random_function(n);
    auto rep = orthogonality_criteria(ext, f);
    CHECK(rep.agree);
    CHECK_FALSE(rep.orthogonal);
    // The word search cannot fall below zero and stays positive whenever the
    // invariant pairing is positive.
    CHECK(rep.e_infimum > 1e-6);
  }

  // The same checks on a skew product, where the test family is supplied.
  auto sk = skew_torus(4);
  std::vector<Eigen::VectorXcd> family;
  family.push_back(Eigen::VectorXcd::Ones(16));
  family.push_back(random_function(16));
  auto rep = orthogonality_criteria(sk, random_function(16), family, 3);
  CHECK(rep.agree);
  CHECK_FALSE(rep.orthogonal);
}

TEST_CASE("window averages reach the joining limit at the period") {
  auto ext = skew_torus(6);
  const std::size_t n = 36;
  auto f = random_function(n);
  auto g = random_function(n);

  auto probe = folner_diagnostic(ext, f, g, 2);
  REQUIRE(probe.period >= 1);
  auto full = folner_diagnostic(ext, f, g, probe.period);
  CHECK(full.period == probe.period);
  CHECK(full.curve[full.period - 1] == doctest::Approx(full.limit).epsilon(1e-12));

  // The limit agrees with the invariant-pairing route.
  auto rep = orthogonality_criteria(ext, f);
  auto self = folner_diagnostic(ext, f, f, probe.period);
  CHECK(std::abs(self.limit - rep.b_pairing) <= 1e-10 * std::max(1.0, rep.b_pairing));

  // Centered lifts of base functions leave no invariant part over the base
  // rotation fibers, so the curve decays toward a zero limit.
  auto ft = four_two();
  Eigen::VectorXcd centered(4);
  centered << 1.0, -1.0, 1.0, -1.0;
  auto fc = folner_diagnostic(ft, centered, centered, 8);
  CHECK(fc.period == 2);
  CHECK(fc.curve[1] == doctest::Approx(fc.limit).epsilon(1e-12));
  CHECK(fc.curve[3] == doctest::Approx(fc.limit).epsilon(1e-12));

  CHECK_THROWS_AS(
      folner_diagnostic(extension_over_point(MpSystem(
                            FiniteProbSpace::uniform({"a", "b"}), {"t", "u"},
                            {{1, 0}, {0, 1}}, GroupKind::FreeOnGenerators)),
                        Eigen::VectorXcd::Ones(2), Eigen::VectorXcd::Ones(2), 4),
      NotSingleGenerator);
}

TEST_CASE("window averages on plain rotations are exact at the order") {
  auto ext = extension_over_point(cyclic_rotation(5));
  Eigen::VectorXcd f(5);
  f << 1.0, -1.0, 2.0, -2.0, 0.0;
  // Centered against the point base: conditional mean is the full mean.
  Eigen::VectorXcd centered = f.array() - f.mean();
  auto curve = folner_diagnostic(ext, centered, centered, 10);
  CHECK(curve.period == 5);
  CHECK(curve.curve[4] == doctest::Approx(curve.limit).epsilon(1e-12));
  CHECK(curve.curve[9] == doctest::Approx(curve.limit).epsilon(1e-12));
}

TEST_CASE("bernoulli correlations vanish exactly beyond the overlap") {
  std::vector<Rat> uniform{Rat(1, 2), Rat(1, 2)};

  // Centered single-coordinate indicator.
  CylinderFunction f{{0, {0}, Rat(1)}, {0, {}, Rat(-1, 2)}};
  auto report = shift_correlations(uniform, f, f, 256);
  CHECK(report.mean_f == Rat(0));
  CHECK(report.correlations[0] == Rat(1, 4));
  for (std::size_t n = 1; n < 256; ++n) CHECK(report.correlations[n] == Rat(0));
  for (std::size_t k = 1; k <= 256; ++k)
    CHECK(report.cesaro[k - 1] == Rat(1, 4) / Rat(static_cast<unsigned long>(k)));

  // The constant function has correlation one forever.
  CylinderFunction one{{0, {}, Rat(1)}};
  auto flat = shift_correlations(uniform, one, one, 16);
  for (const auto& c : flat.correlations) CHECK(c == Rat(1));
  for (const auto& c : flat.cesaro) CHECK(c == Rat(0));

  // A two-coordinate cylinder decorrelates once the supports separate.
  CylinderFunction pairc{{0, {0, 1}, Rat(1)}, {0, {}, Rat(-1, 4)}};
  auto two = shift_correlations(uniform, pairc, pairc, 64);
  CHECK(two.mean_f == Rat(0));
  CHECK(two.correlations[0] == Rat(1, 4) - Rat(1, 16));
  CHECK(two.correlations[1] != Rat(0));
  for (std::size_t n = 2; n < 64; ++n) CHECK(two.correlations[n] == Rat(0));

  // Cesaro curve dominated by the exact overlap constant.
  Rat overlap(0);
  for (std::size_t n = 0; n < 2; ++n) overlap += abs(two.correlations[n]);
  for (std::size_t k = 1; k <= 64; ++k)
    CHECK(two.cesaro[k - 1] <= overlap / Rat(static_cast<unsigned long>(k)));

  // Uneven symbols stay exact as well.
  std::vector<Rat> skewed{Rat(1, 3), Rat(2, 3)};
  CylinderFunction h{{0, {1}, Rat(1)}, {0, {}, Rat(-2, 3)}};
  auto sk = shift_correlations(skewed, h, h, 32);
  CHECK(sk.correlations[0] == Rat(2, 3) - Rat(4, 9));
  for (std::size_t n = 1; n < 32; ++n) CHECK(sk.correlations[n] == Rat(0));

  CHECK_THROWS_AS(shift_correlations(uniform, {{0, {2}, Rat(1)}}, f, 4), NotCylinder);
  CHECK_THROWS_AS(shift_correlations({Rat(1, 2), Rat(1, 3)}, f, f, 4), DomainError);
}

TEST_CASE("offset cylinders shift correctly") {
  std::vector<Rat> uniform{Rat(1, 2), Rat(1, 2)};
  // f constrains coordinate 0, g constrains coordinate 3: the three-step
  // shift of f lands exactly on g.
  CylinderFunction f{{0, {0}, Rat(1)}, {0, {}, Rat(-1, 2)}};
  CylinderFunction g{{3, {0}, Rat(1)}, {0, {}, Rat(-1, 2)}};
  auto rep = shift_correlations(uniform, f, g, 8);
  CHECK(rep.correlations[3] == Rat(1, 4));
  for (std::size_t n : {0u, 1u, 2u, 4u, 5u, 6u, 7u})
    CHECK(rep.correlations[n] == Rat(0));
}
