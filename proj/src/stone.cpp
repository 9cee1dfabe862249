#include "kh/stone.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace kh {

BaseSet::BaseSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw Error("BaseSet: empty label");
    if (!seen.insert(l).second) throw Error("BaseSet: duplicate label '" + l + "'");
  }
}

bool BaseSet::has(const std::string& l) const noexcept {
  return std::find(labels_.begin(), labels_.end(), l) != labels_.end();
}

std::size_t BaseSet::index_of(const std::string& l) const {
  auto it = std::find(labels_.begin(), labels_.end(), l);
  if (it == labels_.end()) throw Error("BaseSet: unknown label '" + l + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

BasePtr make_base(std::vector<std::string> labels) {
  return std::make_shared<const BaseSet>(std::move(labels));
}

BasePtr numbered_base(std::size_t n, const std::string& prefix) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
  return make_base(std::move(labels));
}

bool same_base(const BasePtr& a, const BasePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

void require_same_base(const BasePtr& a, const BasePtr& b) {
  if (!same_base(a, b)) throw BaseMismatch("operands live over different base sets");
}

void require_permutation(const std::vector<std::size_t>& sigma, std::size_t n) {
  if (sigma.size() != n) throw Error("permutation has wrong length");
  std::vector<bool> hit(n, false);
  for (std::size_t v : sigma) {
    if (v >= n || hit[v]) throw Error("not a permutation");
    hit[v] = true;
  }
}

std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& sigma) {
  std::vector<std::size_t> inv(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) inv[sigma[i]] = i;
  return inv;
}

StoneElement::StoneElement(BasePtr base, Eigen::VectorXcd values)
    : base_(std::move(base)), v_(std::move(values)) {
  if (!base_) throw Error("StoneElement: null base");
  if (static_cast<std::size_t>(v_.size()) != base_->size())
    throw Error("StoneElement: value count does not match base size");
}

StoneElement StoneElement::zero(BasePtr base) {
  Eigen::Index n = static_cast<Eigen::Index>(base->size());
  return StoneElement(std::move(base), Eigen::VectorXcd::Zero(n));
}

StoneElement StoneElement::one(BasePtr base) { return constant(std::move(base), Complex(1.0, 0.0)); }

StoneElement StoneElement::constant(BasePtr base, Complex c) {
  Eigen::Index n = static_cast<Eigen::Index>(base->size());
  return StoneElement(std::move(base), Eigen::VectorXcd::Constant(n, c));
}

StoneElement StoneElement::operator-() const { return StoneElement(base_, -v_); }

StoneElement StoneElement::conj() const { return StoneElement(base_, v_.conjugate()); }

StoneElement StoneElement::abs() const {
  Eigen::VectorXcd out = v_.cwiseAbs().cast<Complex>();
  return StoneElement(base_, std::move(out));
}

bool StoneElement::is_real(double tol) const {
  return v_.imag().cwiseAbs().maxCoeff() <= tol || v_.size() == 0;
}

double StoneElement::sup_norm() const {
  return v_.size() == 0 ? 0.0 : v_.cwiseAbs().maxCoeff();
}

bool StoneElement::approx_equal(const StoneElement& other, double tol) const {
  if (!same_base(base_, other.base_)) return false;
  return v_.size() == 0 || (v_ - other.v_).cwiseAbs().maxCoeff() <= tol;
}

Idempotent StoneElement::support(double tol) const {
  std::vector<bool> mask(size());
  for (std::size_t i = 0; i < size(); ++i) mask[i] = std::abs(v_(static_cast<Eigen::Index>(i))) > tol;
  return Idempotent(base_, std::move(mask));
}

StoneElement StoneElement::invert_on_support(double tol) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v_.size());
  for (Eigen::Index i = 0; i < v_.size(); ++i)
    if (std::abs(v_(i)) > tol) out(i) = 1.0 / v_(i);
  return StoneElement(base_, std::move(out));
}

StoneElement StoneElement::permuted(const std::vector<std::size_t>& sigma) const {
  require_permutation(sigma, size());
  Eigen::VectorXcd out(v_.size());
  for (std::size_t i = 0; i < size(); ++i)
    out(static_cast<Eigen::Index>(sigma[i])) = v_(static_cast<Eigen::Index>(i));
  return StoneElement(base_, std::move(out));
}

StoneElement operator+(const StoneElement& f, const StoneElement& g) {
  require_same_base(f.base_, g.base_);
  return StoneElement(f.base_, f.v_ + g.v_);
}

StoneElement operator-(const StoneElement& f, const StoneElement& g) {
  require_same_base(f.base_, g.base_);
  return StoneElement(f.base_, f.v_ - g.v_);
}

StoneElement operator*(const StoneElement& f, const StoneElement& g) {
  require_same_base(f.base_, g.base_);
  return StoneElement(f.base_, f.v_.cwiseProduct(g.v_));
}

StoneElement operator*(Complex c, const StoneElement& f) {
  return StoneElement(f.base_, c * f.v_);
}

StoneElement sup(const StoneElement& f, const StoneElement& g) {
  require_same_base(f.base(), g.base());
  Eigen::VectorXcd out = f.values().real().cwiseMax(g.values().real()).cast<Complex>();
  return StoneElement(f.base(), std::move(out));
}

StoneElement inf(const StoneElement& f, const StoneElement& g) {
  require_same_base(f.base(), g.base());
  Eigen::VectorXcd out = f.values().real().cwiseMin(g.values().real()).cast<Complex>();
  return StoneElement(f.base(), std::move(out));
}

StoneElement sqrt_positive(const StoneElement& f, double tol) {
  Eigen::VectorXcd out(f.values().size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    Complex v = f[i];
    if (v.real() < -tol || std::abs(v.imag()) > tol)
      throw DomainError("sqrt_positive: value off the positive axis at point " +
                        f.base()->label(i));
    out(static_cast<Eigen::Index>(i)) = std::sqrt(std::max(v.real(), 0.0));
  }
  return StoneElement(f.base(), std::move(out));
}

Idempotent::Idempotent(BasePtr base, std::vector<bool> mask)
    : base_(std::move(base)), mask_(std::move(mask)) {
  if (!base_) throw Error("Idempotent: null base");
  if (mask_.size() != base_->size()) throw Error("Idempotent: mask size does not match base");
}

Idempotent Idempotent::all_of(BasePtr base) {
  std::vector<bool> m(base->size(), true);
  return Idempotent(std::move(base), std::move(m));
}

Idempotent Idempotent::none_of(BasePtr base) {
  std::vector<bool> m(base->size(), false);
  return Idempotent(std::move(base), std::move(m));
}

std::size_t Idempotent::count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true));
}

bool Idempotent::none() const { return count() == 0; }
bool Idempotent::all() const { return count() == mask_.size(); }

bool Idempotent::covers(const Idempotent& other) const {
  require_same_base(base_, other.base_);
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (other.mask_[i] && !mask_[i]) return false;
  return true;
}

Idempotent Idempotent::complement() const {
  std::vector<bool> m(mask_.size());
  for (std::size_t i = 0; i < mask_.size(); ++i) m[i] = !mask_[i];
  return Idempotent(base_, std::move(m));
}

Idempotent operator&(const Idempotent& p, const Idempotent& q) {
  require_same_base(p.base_, q.base_);
  std::vector<bool> m(p.mask_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = p.mask_[i] && q.mask_[i];
  return Idempotent(p.base_, std::move(m));
}

Idempotent operator|(const Idempotent& p, const Idempotent& q) {
  require_same_base(p.base_, q.base_);
  std::vector<bool> m(p.mask_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = p.mask_[i] || q.mask_[i];
  return Idempotent(p.base_, std::move(m));
}

bool operator==(const Idempotent& p, const Idempotent& q) {
  return same_base(p.base_, q.base_) && p.mask_ == q.mask_;
}

StoneElement Idempotent::to_element() const {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(mask_.size()));
  for (std::size_t i = 0; i < mask_.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = mask_[i] ? 1.0 : 0.0;
  return StoneElement(base_, std::move(out));
}

Idempotent Idempotent::permuted(const std::vector<std::size_t>& sigma) const {
  require_permutation(sigma, mask_.size());
  std::vector<bool> m(mask_.size());
  for (std::size_t i = 0; i < mask_.size(); ++i) m[sigma[i]] = mask_[i];
  return Idempotent(base_, std::move(m));
}

StoneElement operator*(const Idempotent& p, const StoneElement& f) {
  return p.to_element() * f;
}

}  // namespace kh
