#include "kh/khmod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace kh {

namespace {

// Orthonormal basis of the column space (first r columns) and its orthogonal
// complement (remaining columns) of a d x m matrix, ordered by singular value.
struct FiberSplit {
  Eigen::MatrixXcd range;
  Eigen::MatrixXcd complement;
};

FiberSplit fiber_split(const Eigen::MatrixXcd& m, double tol) {
  Eigen::Index d = m.rows();
  FiberSplit out;
  if (d == 0) {
    out.range = out.complement = Eigen::MatrixXcd(0, 0);
    return out;
  }
  if (m.cols() == 0) {
    out.range = Eigen::MatrixXcd(d, 0);
    out.complement = Eigen::MatrixXcd::Identity(d, d);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  double thresh = tol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > thresh) ++r;
  out.range = svd.matrixU().leftCols(r);
  out.complement = svd.matrixU().rightCols(d - r);
  return out;
}

}  // namespace

KhShape::KhShape(BasePtr base, std::vector<Eigen::Index> dims)
    : base_(std::move(base)), dims_(std::move(dims)) {
  if (!base_) throw Error("KhShape: null base");
  if (dims_.size() != base_->size()) throw Error("KhShape: dimension count does not match base");
  for (Eigen::Index d : dims_)
    if (d < 0) throw Error("KhShape: negative fiber dimension");
}

KhShape KhShape::constant(BasePtr base, Eigen::Index d) {
  std::vector<Eigen::Index> dims(base->size(), d);
  return KhShape(std::move(base), std::move(dims));
}

Eigen::Index KhShape::total_dim() const {
  return std::accumulate(dims_.begin(), dims_.end(), Eigen::Index(0));
}

Eigen::Index KhShape::max_dim() const {
  return dims_.empty() ? 0 : *std::max_element(dims_.begin(), dims_.end());
}

void require_same_shape(const KhShape& a, const KhShape& b) {
  if (!(a == b)) throw ShapeMismatch("operands live in modules of different shape");
}

KhVector::KhVector(KhShape shape, std::vector<Eigen::VectorXcd> fibers)
    : shape_(std::move(shape)), fib_(std::move(fibers)) {
  if (fib_.size() != shape_.points()) throw Error("KhVector: fiber count does not match shape");
  for (std::size_t i = 0; i < fib_.size(); ++i)
    if (fib_[i].size() != shape_.dim(i)) throw Error("KhVector: fiber length does not match shape");
}

KhVector KhVector::zero(const KhShape& shape) {
  std::vector<Eigen::VectorXcd> f;
  f.reserve(shape.points());
  for (std::size_t i = 0; i < shape.points(); ++i) f.push_back(Eigen::VectorXcd::Zero(shape.dim(i)));
  return KhVector(shape, std::move(f));
}

KhVector KhVector::basis_vector(const KhShape& shape, std::size_t omega, Eigen::Index k) {
  if (omega >= shape.points() || k < 0 || k >= shape.dim(omega))
    throw Error("KhVector::basis_vector: index out of range");
  KhVector x = zero(shape);
  x.fib_[omega](k) = 1.0;
  return x;
}

KhVector KhVector::operator-() const {
  std::vector<Eigen::VectorXcd> f(fib_);
  for (auto& v : f) v = -v;
  return KhVector(shape_, std::move(f));
}

KhVector KhVector::conjugated() const {
  std::vector<Eigen::VectorXcd> f(fib_);
  for (auto& v : f) v = v.conjugate();
  return KhVector(shape_, std::move(f));
}

KhVector operator+(const KhVector& x, const KhVector& y) {
  require_same_shape(x.shape_, y.shape_);
  std::vector<Eigen::VectorXcd> f(x.fib_);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += y.fib_[i];
  return KhVector(x.shape_, std::move(f));
}

KhVector operator-(const KhVector& x, const KhVector& y) {
  require_same_shape(x.shape_, y.shape_);
  std::vector<Eigen::VectorXcd> f(x.fib_);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] -= y.fib_[i];
  return KhVector(x.shape_, std::move(f));
}

KhVector operator*(Complex c, const KhVector& x) {
  std::vector<Eigen::VectorXcd> f(x.fib_);
  for (auto& v : f) v *= c;
  return KhVector(x.shape_, std::move(f));
}

KhVector operator*(const StoneElement& f, const KhVector& x) {
  require_same_base(f.base(), x.shape().base());
  std::vector<Eigen::VectorXcd> out;
  out.reserve(x.points());
  for (std::size_t i = 0; i < x.points(); ++i) out.push_back(f[i] * x.fiber(i));
  return KhVector(x.shape(), std::move(out));
}

StoneElement inner_product(const KhVector& x, const KhVector& y) {
  require_same_shape(x.shape(), y.shape());
  Eigen::VectorXcd v(static_cast<Eigen::Index>(x.points()));
  for (std::size_t i = 0; i < x.points(); ++i)
    v(static_cast<Eigen::Index>(i)) = y.fiber(i).dot(x.fiber(i));
  return StoneElement(x.shape().base(), std::move(v));
}

StoneElement lattice_norm(const KhVector& x) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(x.points()));
  for (std::size_t i = 0; i < x.points(); ++i) v(static_cast<Eigen::Index>(i)) = x.fiber(i).norm();
  return StoneElement(x.shape().base(), std::move(v));
}

double sup_norm(const KhVector& x) { return lattice_norm(x).sup_norm(); }

Normalized normalize(const KhVector& x, double tol) {
  StoneElement n = lattice_norm(x);
  Idempotent supp = n.support(tol);
  KhVector unit = n.invert_on_support(tol) * x;
  // Zero out fibers below the threshold so |unit| is exactly supported.
  return Normalized{std::move(unit), std::move(supp)};
}

bool is_suborthonormal(const std::vector<KhVector>& es, double tol) {
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (!(es[i].shape() == es[0].shape())) return false;
    StoneElement n = lattice_norm(es[i]);
    for (std::size_t w = 0; w < n.size(); ++w) {
      double v = n[w].real();
      if (std::min(std::abs(v), std::abs(v - 1.0)) > tol) return false;
    }
    for (std::size_t j = i + 1; j < es.size(); ++j)
      if (inner_product(es[i], es[j]).sup_norm() > tol) return false;
  }
  return true;
}

void require_suborthonormal(const std::vector<KhVector>& es, double tol) {
  if (!is_suborthonormal(es, tol))
    throw NotSuborthonormal("vector system is not suborthonormal at the given tolerance");
}

std::vector<KhVector> gram_schmidt(const std::vector<KhVector>& xs, double tol) {
  std::vector<KhVector> es;
  for (const KhVector& x : xs) {
    if (!es.empty()) require_same_shape(x.shape(), es[0].shape());
    KhVector r = x;
    for (int pass = 0; pass < 2; ++pass)
      for (const KhVector& e : es) r = r - inner_product(r, e) * e;
    if (sup_norm(r) <= tol) continue;
    es.push_back(normalize(r, tol).unit);
  }
  return es;
}

std::vector<KhVector> extend_to_basis(const std::vector<KhVector>& partial, const KhShape& shape,
                                      double tol) {
  require_suborthonormal(partial, tol);
  for (const auto& e : partial) require_same_shape(e.shape(), shape);

  std::size_t n = shape.points();
  std::vector<Eigen::MatrixXcd> complement(n);
  Eigen::Index extra = 0;
  for (std::size_t w = 0; w < n; ++w) {
    Eigen::MatrixXcd m(shape.dim(w), static_cast<Eigen::Index>(partial.size()));
    for (std::size_t j = 0; j < partial.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = partial[j].fiber(w);
    complement[w] = fiber_split(m, tol).complement;
    extra = std::max(extra, complement[w].cols());
  }

  std::vector<KhVector> out = partial;
  for (Eigen::Index j = 0; j < extra; ++j) {
    std::vector<Eigen::VectorXcd> fibers;
    fibers.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
      if (j < complement[w].cols())
        fibers.push_back(complement[w].col(j));
      else
        fibers.push_back(Eigen::VectorXcd::Zero(shape.dim(w)));
    }
    out.emplace_back(shape, std::move(fibers));
  }
  return out;
}

std::vector<KhVector> standard_basis(const KhShape& shape) {
  return extend_to_basis({}, shape);
}

KhVector project_onto(const KhVector& x, const std::vector<KhVector>& basis, double tol) {
  require_suborthonormal(basis, tol);
  KhVector p = KhVector::zero(x.shape());
  for (const KhVector& e : basis) p = p + inner_product(x, e) * e;
  return p;
}

StoneElement dimension_function(const std::vector<KhVector>& basis, const KhShape& shape,
                                double tol) {
  require_suborthonormal(basis, tol);
  for (const auto& e : basis) require_same_shape(e.shape(), shape);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(shape.points()));
  for (const KhVector& e : basis) {
    StoneElement n = lattice_norm(e);
    for (std::size_t w = 0; w < n.size(); ++w) {
      double nv = n[w].real();
      v(static_cast<Eigen::Index>(w)) += nv * nv;
    }
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::round(v(i).real());
  return StoneElement(shape.base(), std::move(v));
}

StoneElement dimension_function(const std::vector<KhVector>& basis, double tol) {
  if (basis.empty()) throw Error("dimension_function: empty basis carries no shape; use the shape overload");
  return dimension_function(basis, basis[0].shape(), tol);
}

std::vector<HomogeneousComponent> homogeneous_components(const std::vector<KhVector>& basis,
                                                         const KhShape& shape, double tol) {
  require_suborthonormal(basis, tol);
  for (const auto& e : basis) require_same_shape(e.shape(), shape);
  std::size_t n = shape.points();

  // Fiberwise re-basing: orthonormalize the spanned fiber subspaces so that
  // vector j is supported exactly where the fiber dimension exceeds j.
  std::vector<Eigen::MatrixXcd> range(n);
  std::vector<Eigen::Index> rank(n);
  Eigen::Index max_rank = 0;
  for (std::size_t w = 0; w < n; ++w) {
    Eigen::MatrixXcd m(shape.dim(w), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = basis[j].fiber(w);
    range[w] = fiber_split(m, tol).range;
    rank[w] = range[w].cols();
    max_rank = std::max(max_rank, rank[w]);
  }

  std::vector<KhVector> nested;
  for (Eigen::Index j = 0; j < max_rank; ++j) {
    std::vector<Eigen::VectorXcd> fibers;
    fibers.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
      if (j < rank[w])
        fibers.push_back(range[w].col(j));
      else
        fibers.push_back(Eigen::VectorXcd::Zero(shape.dim(w)));
    }
    nested.emplace_back(shape, std::move(fibers));
  }

  std::vector<HomogeneousComponent> out;
  for (Eigen::Index k = 0; k <= max_rank; ++k) {
    std::vector<bool> mask(n);
    bool nonempty = false;
    for (std::size_t w = 0; w < n; ++w) {
      mask[w] = rank[w] == k;
      nonempty = nonempty || mask[w];
    }
    if (!nonempty) continue;
    Idempotent where(shape.base(), mask);
    StoneElement cut = where.to_element();
    std::vector<KhVector> comp;
    for (Eigen::Index j = 0; j < k; ++j) comp.push_back(cut * nested[static_cast<std::size_t>(j)]);
    out.push_back(HomogeneousComponent{k, std::move(where), std::move(comp)});
  }
  return out;
}

std::vector<HomogeneousComponent> homogeneous_components(const std::vector<KhVector>& basis,
                                                         double tol) {
  if (basis.empty()) throw Error("homogeneous_components: empty basis carries no shape; use the shape overload");
  return homogeneous_components(basis, basis[0].shape(), tol);
}

}  // namespace kh
