#include "kh/gsystem.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

#include "kh/errors.hpp"

namespace kh {

namespace {

// Orthonormal basis of the nullspace of m, as columns.
Eigen::MatrixXcd nullspace_basis(const Eigen::MatrixXcd& m, double tol) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0 || n == 0) return Eigen::MatrixXcd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = tol * (s.size() > 0 ? s(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cut && s(rank) > 0.0) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

}  // namespace

BaseAction::BaseAction(BasePtr base, std::vector<std::string> names,
                       std::vector<std::vector<std::size_t>> perms, GroupKind kind)
    : base_(std::move(base)), names_(std::move(names)), perms_(std::move(perms)), kind_(kind) {
  if (names_.size() != perms_.size())
    throw Error("BaseAction: one permutation per generator name required");
  for (std::size_t g = 0; g < names_.size(); ++g) {
    if (names_[g].empty()) throw Error("BaseAction: empty generator name");
    for (std::size_t h = 0; h < g; ++h)
      if (names_[h] == names_[g]) throw Error("BaseAction: duplicate generator name " + names_[g]);
    require_permutation(perms_[g], base_->size());
  }
  if (kind_ == GroupKind::SingleGeneratorZ && names_.size() != 1)
    throw NotSingleGenerator("BaseAction: single-generator group with " +
                             std::to_string(names_.size()) + " generators");
}

std::size_t BaseAction::index_of(const std::string& name) const {
  for (std::size_t g = 0; g < names_.size(); ++g)
    if (names_[g] == name) return g;
  throw UnknownGenerator("unknown generator " + name);
}

std::vector<std::vector<std::size_t>> base_orbits(const BaseAction& act) {
  const std::size_t n = act.base()->size();
  std::vector<bool> seen(n, false);
  std::vector<std::vector<std::size_t>> orbits;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::vector<std::size_t> orbit;
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
      std::size_t w = stack.back();
      stack.pop_back();
      orbit.push_back(w);
      for (std::size_t g = 0; g < act.generator_count(); ++g) {
        for (std::size_t v : {act.perm(g)[w], inverse_permutation(act.perm(g))[w]}) {
          if (!seen[v]) {
            seen[v] = true;
            stack.push_back(v);
          }
        }
      }
    }
    std::sort(orbit.begin(), orbit.end());
    orbits.push_back(std::move(orbit));
  }
  return orbits;
}

StoneElement koopman(const BaseAction& act, std::size_t g, const StoneElement& f, bool inverse) {
  require_same_base(act.base(), f.base());
  const auto& sigma = act.perm(g);
  return inverse ? f.permuted(inverse_permutation(sigma)) : f.permuted(sigma);
}

GSystem::GSystem(BaseAction action, KhShape shape,
                 std::vector<std::vector<Eigen::MatrixXcd>> unitaries, double tol)
    : action_(std::move(action)), shape_(std::move(shape)), unitaries_(std::move(unitaries)) {
  require_same_base(action_.base(), shape_.base());
  if (unitaries_.size() != action_.generator_count())
    throw ShapeMismatch("GSystem: one unitary family per generator required");
  for (std::size_t g = 0; g < unitaries_.size(); ++g) {
    if (unitaries_[g].size() != shape_.points())
      throw ShapeMismatch("GSystem: one unitary per base point required");
    const auto& sigma = action_.perm(g);
    for (std::size_t w = 0; w < shape_.points(); ++w) {
      const Eigen::Index d = shape_.dim(w);
      if (shape_.dim(sigma[w]) != d)
        throw ShapeMismatch("GSystem: fiber dimensions differ along the base motion");
      const auto& u = unitaries_[g][w];
      if (u.rows() != d || u.cols() != d) throw ShapeMismatch("GSystem: unitary block size");
      if (d > 0 && (u.adjoint() * u - Eigen::MatrixXcd::Identity(d, d)).norm() >
                       tol * std::max<double>(1.0, static_cast<double>(d)))
        throw DomainError("GSystem: generator block is not unitary");
    }
  }
}

GSystem GSystem::trivial(KhShape shape, GroupKind kind) {
  BaseAction act(shape.base(), {}, {}, kind);
  return GSystem(std::move(act), std::move(shape), {});
}

KhVector apply_generator(const GSystem& sys, std::size_t g, const KhVector& x, bool inverse) {
  require_same_shape(sys.shape(), x.shape());
  const auto& sigma = sys.action().perm(g);
  std::vector<Eigen::VectorXcd> fibers(x.points());
  if (!inverse) {
    for (std::size_t w = 0; w < x.points(); ++w) fibers[sigma[w]] = sys.unitary(g, w) * x.fiber(w);
  } else {
    for (std::size_t w = 0; w < x.points(); ++w)
      fibers[w] = sys.unitary(g, w).adjoint() * x.fiber(sigma[w]);
  }
  return KhVector(sys.shape(), std::move(fibers));
}

KhVector apply_group(const GSystem& sys, const Word& word, const KhVector& x) {
  KhVector out = x;
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    const std::size_t g = sys.action().index_of(it->first);
    const bool inv = it->second < 0;
    for (int k = std::abs(it->second); k > 0; --k) out = apply_generator(sys, g, out, inv);
  }
  return out;
}

ModuleHom conjugate_by_generator(const GSystem& sys, std::size_t g, const ModuleHom& a) {
  require_same_shape(sys.shape(), a.domain());
  require_same_shape(sys.shape(), a.codomain());
  const auto& sigma = sys.action().perm(g);
  std::vector<Eigen::MatrixXcd> blocks(a.points());
  for (std::size_t w = 0; w < a.points(); ++w) {
    const auto& u = sys.unitary(g, w);
    blocks[sigma[w]] = u * a.block(w) * u.adjoint();
  }
  return ModuleHom(a.domain(), a.codomain(), std::move(blocks));
}

double intertwining_residual(const GSystem& sys, const ModuleHom& a) {
  double r = 0.0;
  for (std::size_t g = 0; g < sys.action().generator_count(); ++g)
    r = std::max(r, sup_op_norm(conjugate_by_generator(sys, g, a) - a));
  return r;
}

std::vector<KhVector> fixed_submodule(const GSystem& sys, double tol) {
  const auto& shape = sys.shape();
  std::vector<KhVector> out;
  for (const auto& orbit : base_orbits(sys.action())) {
    std::vector<Eigen::Index> offset(orbit.size());
    Eigen::Index total = 0;
    for (std::size_t k = 0; k < orbit.size(); ++k) {
      offset[k] = total;
      total += shape.dim(orbit[k]);
    }
    if (total == 0) continue;
    std::vector<Eigen::Index> slot(shape.points(), -1);
    for (std::size_t k = 0; k < orbit.size(); ++k) slot[orbit[k]] = static_cast<Eigen::Index>(k);

    Eigen::Index rows = 0;
    for (std::size_t g = 0; g < sys.action().generator_count(); ++g)
      for (std::size_t w : orbit) rows += shape.dim(sys.action().perm(g)[w]);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows, total);
    Eigen::Index row = 0;
    for (std::size_t g = 0; g < sys.action().generator_count(); ++g) {
      const auto& sigma = sys.action().perm(g);
      for (std::size_t w : orbit) {
        const Eigen::Index d = shape.dim(w);
        m.block(row, offset[static_cast<std::size_t>(slot[w])], d, d) = sys.unitary(g, w);
        m.block(row, offset[static_cast<std::size_t>(slot[sigma[w]])], d, d) -=
            Eigen::MatrixXcd::Identity(d, d);
        row += d;
      }
    }

    Eigen::MatrixXcd null = nullspace_basis(m, tol);
    const double rescale = std::sqrt(static_cast<double>(orbit.size()));
    for (Eigen::Index j = 0; j < null.cols(); ++j) {
      std::vector<Eigen::VectorXcd> fibers;
      for (std::size_t w = 0; w < shape.points(); ++w) {
        if (slot[w] >= 0) {
          fibers.push_back(rescale *
                           null.col(j).segment(offset[static_cast<std::size_t>(slot[w])],
                                               shape.dim(w)));
        } else {
          fibers.push_back(Eigen::VectorXcd::Zero(shape.dim(w)));
        }
      }
      out.emplace_back(shape, std::move(fibers));
    }
  }
  return out;
}

std::vector<ModuleHom> intertwiner_basis(const GSystem& sys, double tol) {
  const auto& shape = sys.shape();
  std::vector<ModuleHom> out;
  for (const auto& orbit : base_orbits(sys.action())) {
    std::vector<Eigen::Index> offset(orbit.size());
    Eigen::Index total = 0;
    for (std::size_t k = 0; k < orbit.size(); ++k) {
      offset[k] = total;
      const Eigen::Index d = shape.dim(orbit[k]);
      total += d * d;
    }
    if (total == 0) continue;
    std::vector<Eigen::Index> slot(shape.points(), -1);
    for (std::size_t k = 0; k < orbit.size(); ++k) slot[orbit[k]] = static_cast<Eigen::Index>(k);

    Eigen::Index rows = 0;
    for (std::size_t g = 0; g < sys.action().generator_count(); ++g) {
      (void)g;
      for (std::size_t w : orbit) {
        const Eigen::Index d = shape.dim(w);
        rows += d * d;
      }
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows, total);
    Eigen::Index row = 0;
    for (std::size_t g = 0; g < sys.action().generator_count(); ++g) {
      const auto& sigma = sys.action().perm(g);
      for (std::size_t w : orbit) {
        const Eigen::Index d = shape.dim(w);
        const auto& u = sys.unitary(g, w);
        const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
        // Column-major vectorization: the equation at w reads
        // A(sigma w) u - u A(w) = 0.
        Eigen::MatrixXcd lhs = Eigen::kroneckerProduct(u.transpose(), id).eval();
        Eigen::MatrixXcd rhs = Eigen::kroneckerProduct(id, u).eval();
        m.block(row, offset[static_cast<std::size_t>(slot[sigma[w]])], d * d, d * d) = lhs;
        m.block(row, offset[static_cast<std::size_t>(slot[w])], d * d, d * d) -= rhs;
        row += d * d;
      }
    }

    Eigen::MatrixXcd null = nullspace_basis(m, tol);
    const double rescale = std::sqrt(static_cast<double>(orbit.size()));
    for (Eigen::Index j = 0; j < null.cols(); ++j) {
      std::vector<Eigen::MatrixXcd> blocks;
      for (std::size_t w = 0; w < shape.points(); ++w) {
        const Eigen::Index d = shape.dim(w);
        if (slot[w] >= 0 && d > 0) {
          Eigen::VectorXcd v =
              null.col(j).segment(offset[static_cast<std::size_t>(slot[w])], d * d);
          blocks.push_back(rescale * Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d));
        } else {
          blocks.push_back(Eigen::MatrixXcd::Zero(d, d));
        }
      }
      out.emplace_back(shape, shape, std::move(blocks));
    }
  }
  return out;
}

DsWmSplit ds_wm_decomposition(const GSystem& sys, double tol) {
  const auto& shape = sys.shape();
  auto inters = intertwiner_basis(sys, tol);
  std::vector<KhVector> generators;
  for (const auto& a : inters)
    for (const auto& e : standard_basis(shape)) generators.push_back(apply(a, e));
  DsWmSplit split;
  split.ds_basis = gram_schmidt(generators, tol);
  std::vector<KhVector> residuals;
  for (const auto& e : standard_basis(shape))
    residuals.push_back(e - project_onto(e, split.ds_basis, tol));
  split.wm_basis = gram_schmidt(residuals, tol);
  return split;
}

EquivariantSpectral equivariant_spectral(const GSystem& sys, const ModuleHom& a, int max_terms,
                                         double tol) {
  const double scale = std::max(1.0, sup_op_norm(a));
  if (intertwining_residual(sys, a) > tol * scale)
    throw NotIntertwining("equivariant_spectral: input does not intertwine the representation");
  EquivariantSpectral out{spectral_decompose(a, max_terms, tol), 0.0, 0.0};
  for (std::size_t g = 0; g < sys.action().generator_count(); ++g) {
    for (std::size_t j = 0; j < out.decomposition.terms(); ++j) {
      out.lambda_equivariance =
          std::max(out.lambda_equivariance,
                   (koopman(sys.action(), g, out.decomposition.lambdas[j]) -
                    out.decomposition.lambdas[j])
                       .sup_norm());
      for (const auto* p :
           {&out.decomposition.pos_projections[j], &out.decomposition.neg_projections[j]}) {
        out.commutation_residual = std::max(
            out.commutation_residual, sup_op_norm(conjugate_by_generator(sys, g, *p) - *p));
      }
    }
  }
  return out;
}

}  // namespace kh
