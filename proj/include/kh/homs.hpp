#pragma once

#include <vector>

#include "kh/khmod.hpp"

namespace kh {

// Bounded module homomorphism between two bundles over a common base, stored
// as one codomain_dim(w) x domain_dim(w) block per base point.
class ModuleHom {
 public:
  ModuleHom(KhShape domain, KhShape codomain, std::vector<Eigen::MatrixXcd> blocks);

  static ModuleHom zero(const KhShape& domain, const KhShape& codomain);
  static ModuleHom identity(const KhShape& shape);

  const KhShape& domain() const { return domain_; }
  const KhShape& codomain() const { return codomain_; }
  const BasePtr& base() const { return domain_.base(); }
  std::size_t points() const { return blocks_.size(); }

  const Eigen::MatrixXcd& block(std::size_t i) const { return blocks_[i]; }
  Eigen::MatrixXcd& block(std::size_t i) { return blocks_[i]; }

  ModuleHom operator-() const;

  friend ModuleHom operator+(const ModuleHom& a, const ModuleHom& b);
  friend ModuleHom operator-(const ModuleHom& a, const ModuleHom& b);
  friend ModuleHom operator*(Complex c, const ModuleHom& a);
  friend ModuleHom operator*(const StoneElement& f, const ModuleHom& a);

 private:
  KhShape domain_;
  KhShape codomain_;
  std::vector<Eigen::MatrixXcd> blocks_;
};

void require_same_hom_shape(const ModuleHom& a, const ModuleHom& b);

KhVector apply(const ModuleHom& t, const KhVector& x);

// Unique map with (Tx|y) = (x|T*y); swaps domain and codomain.
ModuleHom adjoint(const ModuleHom& t);

// compose(s, t) = s after t.
ModuleHom compose(const ModuleHom& s, const ModuleHom& t);
ModuleHom operator*(const ModuleHom& s, const ModuleHom& t);

// Pointwise spectral norm, |T|(w) = largest singular value of the block at w.
StoneElement op_lattice_norm(const ModuleHom& t);
double sup_op_norm(const ModuleHom& t);

// Pointwise Frobenius pairing (A|B)(w) = tr(B_w^* A_w), linear in A.
StoneElement hs_inner(const ModuleHom& a, const ModuleHom& b);
StoneElement hs_norm(const ModuleHom& a);
double sup_hs_norm(const ModuleHom& a);

// An HS element together with its cached pointwise norm.
class HsElement {
 public:
  explicit HsElement(ModuleHom hom) : hom_(std::move(hom)), norm_(hs_norm(hom_)) {}
  const ModuleHom& hom() const { return hom_; }
  const StoneElement& norm() const { return norm_; }

 private:
  ModuleHom hom_;
  StoneElement norm_;
};

// x -> (x|z) y, with blocks y_w z_w^*.
ModuleHom rank_one(const KhVector& y, const KhVector& z);

// Formal sum of elementary tensors left_i (x) conj(right_i).
struct TensorPair {
  KhVector left;
  KhVector right;
};
using TensorSum = std::vector<TensorPair>;

ModuleHom tensor_to_hs(const TensorSum& pairs, const KhShape& domain, const KhShape& codomain);
ModuleHom tensor_to_hs(const TensorSum& pairs);

// Minimal pair list reproducing a hom, via fiberwise singular value
// decomposition truncated relative to the largest singular value overall.
TensorSum hs_to_tensor(const ModuleHom& a, double tol = kDefaultTol);

StoneElement tensor_inner(const TensorSum& u, const TensorSum& v, const BasePtr& base);
StoneElement tensor_inner(const TensorSum& u, const TensorSum& v);

}  // namespace kh
