#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kh/errors.hpp"

namespace kh {

using Complex = std::complex<double>;

// Default tolerance for support and rank decisions. Every tolerance-consuming
// operation takes it as an explicit parameter with this default.
inline constexpr double kDefaultTol = 1e-9;

// Finite Stonean base space: an ordered list of distinct, non-empty point
// labels. The order is fixed at construction and indexes every vector and
// matrix built over the base. Order convergence degenerates to pointwise
// equality on a finite base, so no net machinery appears anywhere.
class BaseSet {
 public:
  explicit BaseSet(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  bool has(const std::string& l) const noexcept;
  std::size_t index_of(const std::string& l) const;  // throws Error if absent

  friend bool operator==(const BaseSet& a, const BaseSet& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
};

using BasePtr = std::shared_ptr<const BaseSet>;

BasePtr make_base(std::vector<std::string> labels);
// Labels prefix0 .. prefix{n-1}.
BasePtr numbered_base(std::size_t n, const std::string& prefix = "w");

bool same_base(const BasePtr& a, const BasePtr& b);
void require_same_base(const BasePtr& a, const BasePtr& b);

// Checks sigma is a bijection of {0..n-1}; throws Error otherwise.
void require_permutation(const std::vector<std::size_t>& sigma, std::size_t n);
std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& sigma);

class Idempotent;

// Element of the finite Stone algebra C(base): one complex value per point.
// Immutable after construction; all operations are pointwise and pure.
class StoneElement {
 public:
  StoneElement(BasePtr base, Eigen::VectorXcd values);

  static StoneElement zero(BasePtr base);
  static StoneElement one(BasePtr base);
  static StoneElement constant(BasePtr base, Complex c);

  const BasePtr& base() const noexcept { return base_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(v_.size()); }
  Complex operator[](std::size_t i) const { return v_(static_cast<Eigen::Index>(i)); }
  const Eigen::VectorXcd& values() const noexcept { return v_; }

  StoneElement operator-() const;
  StoneElement conj() const;
  // Pointwise modulus; the result has exactly zero imaginary parts.
  StoneElement abs() const;
  bool is_real(double tol = kDefaultTol) const;

  double sup_norm() const;
  bool approx_equal(const StoneElement& other, double tol) const;

  Idempotent support(double tol = kDefaultTol) const;
  // g with g = 1/f where |f| > tol and 0 elsewhere, so f*g = support(f).
  StoneElement invert_on_support(double tol = kDefaultTol) const;

  // Koopman image under a base permutation sigma: out[sigma[i]] = f[i].
  StoneElement permuted(const std::vector<std::size_t>& sigma) const;

  friend StoneElement operator+(const StoneElement& f, const StoneElement& g);
  friend StoneElement operator-(const StoneElement& f, const StoneElement& g);
  friend StoneElement operator*(const StoneElement& f, const StoneElement& g);
  friend StoneElement operator*(Complex c, const StoneElement& f);
  friend StoneElement operator*(const StoneElement& f, Complex c) { return c * f; }

 private:
  BasePtr base_;
  Eigen::VectorXcd v_;
};

// Pointwise supremum and infimum of the real parts; results are exactly real.
StoneElement sup(const StoneElement& f, const StoneElement& g);
StoneElement inf(const StoneElement& f, const StoneElement& g);
// Pointwise square root of a positive element. Values with real part below
// -tol raise DomainError; small negatives are clamped to zero.
StoneElement sqrt_positive(const StoneElement& f, double tol = kDefaultTol);

// Idempotent of the algebra: a 0/1-valued element stored as a boolean mask.
// Meet, join and complement follow the Boolean-algebra laws exactly.
class Idempotent {
 public:
  Idempotent(BasePtr base, std::vector<bool> mask);

  static Idempotent all_of(BasePtr base);
  static Idempotent none_of(BasePtr base);

  const BasePtr& base() const noexcept { return base_; }
  std::size_t size() const noexcept { return mask_.size(); }
  bool operator[](std::size_t i) const { return mask_.at(i); }
  const std::vector<bool>& mask() const noexcept { return mask_; }

  std::size_t count() const;
  bool none() const;
  bool all() const;
  // True when this mask contains every point of other.
  bool covers(const Idempotent& other) const;

  Idempotent complement() const;
  friend Idempotent operator&(const Idempotent& p, const Idempotent& q);
  friend Idempotent operator|(const Idempotent& p, const Idempotent& q);
  friend bool operator==(const Idempotent& p, const Idempotent& q);

  StoneElement to_element() const;
  Idempotent permuted(const std::vector<std::size_t>& sigma) const;

 private:
  BasePtr base_;
  std::vector<bool> mask_;
};

StoneElement operator*(const Idempotent& p, const StoneElement& f);

}  // namespace kh
