#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "kh/stone.hpp"

namespace kh {

// Shape of a finite Hilbert bundle: one nonnegative fiber dimension per base
// point. A module over the finite base is exactly a family of fibers, so the
// shape pins down the module up to isomorphism.
class KhShape {
 public:
  KhShape(BasePtr base, std::vector<Eigen::Index> dims);
  static KhShape constant(BasePtr base, Eigen::Index d);

  const BasePtr& base() const noexcept { return base_; }
  std::size_t points() const noexcept { return dims_.size(); }
  Eigen::Index dim(std::size_t i) const { return dims_.at(i); }
  const std::vector<Eigen::Index>& dims() const noexcept { return dims_; }
  Eigen::Index total_dim() const;
  Eigen::Index max_dim() const;

  friend bool operator==(const KhShape& a, const KhShape& b) {
    return same_base(a.base_, b.base_) && a.dims_ == b.dims_;
  }

 private:
  BasePtr base_;
  std::vector<Eigen::Index> dims_;
};

void require_same_shape(const KhShape& a, const KhShape& b);

// Section of the bundle: one complex vector per base point, the fiber lengths
// matching the shape exactly. Immutable; all operations are pure.
class KhVector {
 public:
  KhVector(KhShape shape, std::vector<Eigen::VectorXcd> fibers);

  static KhVector zero(const KhShape& shape);
  // Delta section: e_k at base point omega, zero elsewhere.
  static KhVector basis_vector(const KhShape& shape, std::size_t omega, Eigen::Index k);

  const KhShape& shape() const noexcept { return shape_; }
  const Eigen::VectorXcd& fiber(std::size_t i) const { return fib_.at(i); }
  std::size_t points() const noexcept { return fib_.size(); }

  KhVector operator-() const;
  KhVector conjugated() const;

  friend KhVector operator+(const KhVector& x, const KhVector& y);
  friend KhVector operator-(const KhVector& x, const KhVector& y);
  friend KhVector operator*(Complex c, const KhVector& x);
  friend KhVector operator*(const KhVector& x, Complex c) { return c * x; }
  // Module action f.x, pointwise scaling of the fiber by f's value.
  friend KhVector operator*(const StoneElement& f, const KhVector& x);

 private:
  KhShape shape_;
  std::vector<Eigen::VectorXcd> fib_;
};

// Algebra-valued inner product (x|y), linear in x and conjugate-linear in y.
StoneElement inner_product(const KhVector& x, const KhVector& y);
// |x| = (x|x)^(1/2), the pointwise Euclidean norm of the fibers.
StoneElement lattice_norm(const KhVector& x);
// Scalar norm: the sup over the base of the lattice-norm.
double sup_norm(const KhVector& x);

struct Normalized {
  KhVector unit;       // x / |x| on the support, zero elsewhere
  Idempotent support;  // support of |x| at the given tolerance
};
Normalized normalize(const KhVector& x, double tol = kDefaultTol);

// True when the vectors are pairwise orthogonal and every lattice-norm is
// idempotent-valued, both up to tol.
bool is_suborthonormal(const std::vector<KhVector>& es, double tol = kDefaultTol);
void require_suborthonormal(const std::vector<KhVector>& es, double tol = kDefaultTol);

// Module Gram-Schmidt with support-aware normalization. Vectors whose
// post-projection lattice-norm is at most tol everywhere are dropped; partial
// supports survive. A second projection pass guards orthogonality.
std::vector<KhVector> gram_schmidt(const std::vector<KhVector>& xs, double tol = kDefaultTol);

// Extends a suborthonormal system to a suborthonormal basis of the whole
// module by completing every fiber's orthonormal system, greedily giving each
// appended vector the largest support still available.
std::vector<KhVector> extend_to_basis(const std::vector<KhVector>& partial, const KhShape& shape,
                                      double tol = kDefaultTol);

// Suborthonormal basis of the full module with nested supports.
std::vector<KhVector> standard_basis(const KhShape& shape);

// Orthogonal projection onto the span: Px = sum (x|e) e.
KhVector project_onto(const KhVector& x, const std::vector<KhVector>& basis,
                      double tol = kDefaultTol);

// Integer-valued dimension function sum |e|^2 of the spanned submodule. The
// shape-taking overload also covers the empty basis (the zero submodule).
StoneElement dimension_function(const std::vector<KhVector>& basis, const KhShape& shape,
                                double tol = kDefaultTol);
StoneElement dimension_function(const std::vector<KhVector>& basis, double tol = kDefaultTol);

struct HomogeneousComponent {
  Eigen::Index rank;             // fiber dimension on this component
  Idempotent where;              // level idempotent of the dimension function
  std::vector<KhVector> basis;   // rank vectors, each with lattice-norm = where
};

// Splits the spanned submodule along the level sets of its dimension
// function. The input basis is re-based fiberwise first so that supports are
// nested; the span is unchanged.
std::vector<HomogeneousComponent> homogeneous_components(const std::vector<KhVector>& basis,
                                                         const KhShape& shape,
                                                         double tol = kDefaultTol);
std::vector<HomogeneousComponent> homogeneous_components(const std::vector<KhVector>& basis,
                                                         double tol = kDefaultTol);

}  // namespace kh
