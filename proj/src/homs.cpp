#include "kh/homs.hpp"

#include <Eigen/SVD>

#include "kh/errors.hpp"

namespace kh {

ModuleHom::ModuleHom(KhShape domain, KhShape codomain, std::vector<Eigen::MatrixXcd> blocks)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), blocks_(std::move(blocks)) {
  require_same_base(domain_.base(), codomain_.base());
  if (blocks_.size() != domain_.points())
    throw ShapeMismatch("ModuleHom: one block per base point required");
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].rows() != codomain_.dim(i) || blocks_[i].cols() != domain_.dim(i))
      throw ShapeMismatch("ModuleHom: block dimensions do not match shapes");
  }
}

ModuleHom ModuleHom::zero(const KhShape& domain, const KhShape& codomain) {
  std::vector<Eigen::MatrixXcd> blocks;
  blocks.reserve(domain.points());
  for (std::size_t i = 0; i < domain.points(); ++i)
    blocks.push_back(Eigen::MatrixXcd::Zero(codomain.dim(i), domain.dim(i)));
  return ModuleHom(domain, codomain, std::move(blocks));
}

ModuleHom ModuleHom::identity(const KhShape& shape) {
  std::vector<Eigen::MatrixXcd> blocks;
  blocks.reserve(shape.points());
  for (std::size_t i = 0; i < shape.points(); ++i)
    blocks.push_back(Eigen::MatrixXcd::Identity(shape.dim(i), shape.dim(i)));
  return ModuleHom(shape, shape, std::move(blocks));
}

ModuleHom ModuleHom::operator-() const {
  auto blocks = blocks_;
  for (auto& b : blocks) b = -b;
  return ModuleHom(domain_, codomain_, std::move(blocks));
}

void require_same_hom_shape(const ModuleHom& a, const ModuleHom& b) {
  if (!(a.domain() == b.domain()) || !(a.codomain() == b.codomain()))
    throw ShapeMismatch("hom shapes differ");
}

ModuleHom operator+(const ModuleHom& a, const ModuleHom& b) {
  require_same_hom_shape(a, b);
  auto blocks = a.blocks_;
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] += b.blocks_[i];
  return ModuleHom(a.domain_, a.codomain_, std::move(blocks));
}

ModuleHom operator-(const ModuleHom& a, const ModuleHom& b) {
  require_same_hom_shape(a, b);
  auto blocks = a.blocks_;
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] -= b.blocks_[i];
  return ModuleHom(a.domain_, a.codomain_, std::move(blocks));
}

ModuleHom operator*(Complex c, const ModuleHom& a) {
  auto blocks = a.blocks_;
  for (auto& b : blocks) b *= c;
  return ModuleHom(a.domain_, a.codomain_, std::move(blocks));
}

ModuleHom operator*(const StoneElement& f, const ModuleHom& a) {
  require_same_base(f.base(), a.base());
  auto blocks = a.blocks_;
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] *= f[i];
  return ModuleHom(a.domain_, a.codomain_, std::move(blocks));
}

KhVector apply(const ModuleHom& t, const KhVector& x) {
  require_same_shape(t.domain(), x.shape());
  std::vector<Eigen::VectorXcd> fibers;
  fibers.reserve(t.points());
  for (std::size_t i = 0; i < t.points(); ++i) fibers.push_back(t.block(i) * x.fiber(i));
  return KhVector(t.codomain(), std::move(fibers));
}

ModuleHom adjoint(const ModuleHom& t) {
  std::vector<Eigen::MatrixXcd> blocks;
  blocks.reserve(t.points());
  for (std::size_t i = 0; i < t.points(); ++i) blocks.push_back(t.block(i).adjoint());
  return ModuleHom(t.codomain(), t.domain(), std::move(blocks));
}

ModuleHom compose(const ModuleHom& s, const ModuleHom& t) {
  require_same_shape(s.domain(), t.codomain());
  std::vector<Eigen::MatrixXcd> blocks;
  blocks.reserve(s.points());
  for (std::size_t i = 0; i < s.points(); ++i) blocks.push_back(s.block(i) * t.block(i));
  return ModuleHom(t.domain(), s.codomain(), std::move(blocks));
}

ModuleHom operator*(const ModuleHom& s, const ModuleHom& t) { return compose(s, t); }

StoneElement op_lattice_norm(const ModuleHom& t) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(t.points()));
  for (std::size_t i = 0; i < t.points(); ++i) {
    const auto& b = t.block(i);
    if (b.size() == 0) {
      v(static_cast<Eigen::Index>(i)) = 0.0;
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(b);
      v(static_cast<Eigen::Index>(i)) = svd.singularValues()(0);
    }
  }
  return StoneElement(t.base(), std::move(v));
}

double sup_op_norm(const ModuleHom& t) { return op_lattice_norm(t).sup_norm(); }

StoneElement hs_inner(const ModuleHom& a, const ModuleHom& b) {
  require_same_hom_shape(a, b);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(a.points()));
  for (std::size_t i = 0; i < a.points(); ++i)
    v(static_cast<Eigen::Index>(i)) = (b.block(i).conjugate().cwiseProduct(a.block(i))).sum();
  return StoneElement(a.base(), std::move(v));
}

StoneElement hs_norm(const ModuleHom& a) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(a.points()));
  for (std::size_t i = 0; i < a.points(); ++i) v(static_cast<Eigen::Index>(i)) = a.block(i).norm();
  return StoneElement(a.base(), std::move(v));
}

double sup_hs_norm(const ModuleHom& a) { return hs_norm(a).sup_norm(); }

ModuleHom rank_one(const KhVector& y, const KhVector& z) {
  require_same_base(y.shape().base(), z.shape().base());
  std::vector<Eigen::MatrixXcd> blocks;
  blocks.reserve(y.points());
  for (std::size_t i = 0; i < y.points(); ++i)
    blocks.push_back(y.fiber(i) * z.fiber(i).adjoint());
  return ModuleHom(z.shape(), y.shape(), std::move(blocks));
}

ModuleHom tensor_to_hs(const TensorSum& pairs, const KhShape& domain, const KhShape& codomain) {
  auto acc = ModuleHom::zero(domain, codomain);
  for (const auto& p : pairs) acc = acc + rank_one(p.left, p.right);
  return acc;
}

ModuleHom tensor_to_hs(const TensorSum& pairs) {
  if (pairs.empty()) throw Error("tensor_to_hs: empty list carries no shapes; use the shape overload");
  return tensor_to_hs(pairs, pairs[0].right.shape(), pairs[0].left.shape());
}

TensorSum hs_to_tensor(const ModuleHom& a, double tol) {
  std::vector<Eigen::JacobiSVD<Eigen::MatrixXcd>> svds;
  svds.reserve(a.points());
  double sigma_max = 0.0;
  for (std::size_t i = 0; i < a.points(); ++i) {
    svds.emplace_back(a.block(i), Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svds.back().singularValues().size() > 0)
      sigma_max = std::max(sigma_max, svds.back().singularValues()(0));
  }
  const double cut = tol * sigma_max;
  Eigen::Index count = 0;
  std::vector<Eigen::Index> ranks(a.points(), 0);
  for (std::size_t i = 0; i < a.points(); ++i) {
    const auto& s = svds[i].singularValues();
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > cut && s(r) > 0.0) ++r;
    ranks[i] = r;
    count = std::max(count, r);
  }
  TensorSum out;
  for (Eigen::Index j = 0; j < count; ++j) {
    std::vector<Eigen::VectorXcd> lf, rf;
    for (std::size_t i = 0; i < a.points(); ++i) {
      if (j < ranks[i]) {
        lf.push_back(svds[i].singularValues()(j) * svds[i].matrixU().col(j));
        rf.push_back(svds[i].matrixV().col(j));
      } else {
        lf.push_back(Eigen::VectorXcd::Zero(a.codomain().dim(i)));
        rf.push_back(Eigen::VectorXcd::Zero(a.domain().dim(i)));
      }
    }
    out.push_back({KhVector(a.codomain(), std::move(lf)), KhVector(a.domain(), std::move(rf))});
  }
  return out;
}

StoneElement tensor_inner(const TensorSum& u, const TensorSum& v, const BasePtr& base) {
  auto acc = StoneElement::zero(base);
  for (const auto& p : u)
    for (const auto& q : v)
      acc = acc + inner_product(p.left, q.left) * inner_product(q.right, p.right);
  return acc;
}

StoneElement tensor_inner(const TensorSum& u, const TensorSum& v) {
  const TensorSum& w = u.empty() ? v : u;
  if (w.empty()) throw Error("tensor_inner: empty lists carry no base; use the base overload");
  return tensor_inner(u, v, w[0].left.shape().base());
}

}  // namespace kh
