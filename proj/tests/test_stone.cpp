#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "kh/stone.hpp"

using namespace kh;

namespace {

std::mt19937_64 rng(20240817u);

StoneElement random_element(const BasePtr& base, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(base->size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(d(rng), d(rng));
  return StoneElement(base, v);
}

Idempotent random_idempotent(const BasePtr& base) {
  std::bernoulli_distribution d(0.5);
  std::vector<bool> m(base->size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = d(rng);
  return Idempotent(base, m);
}

}  // namespace

TEST_CASE("base set construction and lookup") {
  auto base = make_base({"a", "b", "c"});
  CHECK(base->size() == 3);
  CHECK(base->index_of("b") == 1);
  CHECK(base->has("c"));
  CHECK_FALSE(base->has("d"));
  CHECK_THROWS_AS(make_base({"a", "a"}), Error);
  CHECK_THROWS_AS(make_base({""}), Error);
}

TEST_CASE("pointwise arithmetic and modulus") {
  auto base = make_base({"a", "b"});
  StoneElement f(base, (Eigen::VectorXcd(2) << Complex(3, 4), Complex(0, 0)).finished());
  auto a = f.abs();
  CHECK(a[0] == Complex(5, 0));
  CHECK(a[1] == Complex(0, 0));
  CHECK(a.is_real(0.0));

  StoneElement g(base, (Eigen::VectorXcd(2) << Complex(1, 0), Complex(2, 0)).finished());
  StoneElement h(base, (Eigen::VectorXcd(2) << Complex(2, 0), Complex(1, 0)).finished());
  auto s = sup(g, h);
  CHECK(s[0] == Complex(2, 0));
  CHECK(s[1] == Complex(2, 0));
  auto i = inf(g, h);
  CHECK(i[0] == Complex(1, 0));
  CHECK(i[1] == Complex(1, 0));

  StoneElement q(base, (Eigen::VectorXcd(2) << Complex(4, 0), Complex(0, 0)).finished());
  auto r = sqrt_positive(q);
  CHECK(r[0] == Complex(2, 0));
  CHECK(r[1] == Complex(0, 0));
  CHECK((r * r).approx_equal(q, 1e-12));

  StoneElement neg(base, (Eigen::VectorXcd(2) << Complex(-1, 0), Complex(0, 0)).finished());
  CHECK_THROWS_AS(sqrt_positive(neg), DomainError);

  auto other = make_base({"x", "y"});
  CHECK_THROWS_AS(f + StoneElement::one(other), BaseMismatch);
}

TEST_CASE("support thresholding") {
  auto base = make_base({"a", "b"});
  StoneElement f(base, (Eigen::VectorXcd(2) << Complex(2, 0), Complex(0, 0)).finished());
  auto p = f.support(1e-9);
  CHECK(p[0]);
  CHECK_FALSE(p[1]);

  CHECK(StoneElement::zero(base).support().none());

  StoneElement g(base, (Eigen::VectorXcd(2) << Complex(1e-12, 0), Complex(1, 0)).finished());
  auto q = g.support(1e-9);
  CHECK_FALSE(q[0]);
  CHECK(q[1]);
}

TEST_CASE("invert on support") {
  auto base = make_base({"a", "b"});
  StoneElement f(base, (Eigen::VectorXcd(2) << Complex(2, 0), Complex(0, 0)).finished());
  auto g = f.invert_on_support();
  CHECK(g[0] == Complex(0.5, 0));
  CHECK(g[1] == Complex(0, 0));

  auto one = StoneElement::one(base);
  CHECK(one.invert_on_support().approx_equal(one, 0.0));

  StoneElement h(base, (Eigen::VectorXcd(2) << Complex(4, 0), Complex(1e-12, 0)).finished());
  auto hi = h.invert_on_support(1e-9);
  CHECK(hi[0] == Complex(0.25, 0));
  CHECK(hi[1] == Complex(0, 0));
}

TEST_CASE("boolean laws on random idempotents") {
  auto base = numbered_base(7);
  for (int k = 0; k < 200; ++k) {
    auto p = random_idempotent(base);
    auto q = random_idempotent(base);
    auto meet = p & q;
    auto join = p | q;
    CHECK((meet.to_element()).approx_equal(p.to_element() * q.to_element(), 0.0));
    auto join_alg = p.to_element() + q.to_element() - p.to_element() * q.to_element();
    CHECK(join.to_element().approx_equal(join_alg, 0.0));
    CHECK(p.complement().complement() == p);
    CHECK((p & p.complement()).none());
    CHECK((p | p.complement()).all());
  }
}

TEST_CASE("support is multiplicative away from the threshold") {
  auto base = numbered_base(6);
  std::bernoulli_distribution zero(0.3);
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXcd fv(6), gv(6);
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    for (Eigen::Index i = 0; i < 6; ++i) {
      fv(i) = zero(rng) ? Complex(0, 0) : Complex(mag(rng), mag(rng));
      gv(i) = zero(rng) ? Complex(0, 0) : Complex(mag(rng), mag(rng));
    }
    StoneElement f(base, fv), g(base, gv);
    CHECK((f * g).support() == (f.support() & g.support()));
  }
}

TEST_CASE("inverse on support reproduces the support idempotent") {
  auto base = numbered_base(8);
  for (int k = 0; k < 200; ++k) {
    auto f = random_element(base);
    auto prod = f * f.invert_on_support();
    CHECK(prod.approx_equal(f.support().to_element(), 10 * kDefaultTol));
  }
}

TEST_CASE("koopman permutation action") {
  auto base = make_base({"a", "b", "c"});
  StoneElement f(base, (Eigen::VectorXcd(3) << Complex(1, 0), Complex(2, 0), Complex(3, 0)).finished());
  std::vector<std::size_t> sigma = {1, 2, 0};
  auto g = f.permuted(sigma);
  CHECK(g[1] == Complex(1, 0));
  CHECK(g[2] == Complex(2, 0));
  CHECK(g[0] == Complex(3, 0));
  auto back = g.permuted(inverse_permutation(sigma));
  CHECK(back.approx_equal(f, 0.0));
}
