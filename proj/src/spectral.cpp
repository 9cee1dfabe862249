#include "kh/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "kh/errors.hpp"

namespace kh {

namespace {

void require_square(const ModuleHom& t, const char* who) {
  if (!(t.domain() == t.codomain()))
    throw ShapeMismatch(std::string(who) + ": endomorphism required");
}

// One merged eigenvalue level of a single fiber.
struct FiberLevel {
  double value = 0.0;                 // cluster representative, largest member
  std::vector<Eigen::Index> pos;      // eigenvector columns at +value
  std::vector<Eigen::Index> neg;      // eigenvector columns at -value
};

}  // namespace

ModuleHom reconstruct(const SpectralDecomposition& d, const KhShape& shape) {
  auto acc = ModuleHom::zero(shape, shape);
  for (std::size_t j = 0; j < d.terms(); ++j)
    acc = acc + d.lambdas[j] * (d.pos_projections[j] - d.neg_projections[j]);
  return acc;
}

ModuleHom mean_ergodic_projection(const ModuleHom& t, MeanErgodicMode mode, int n_steps,
                                  double tol) {
  require_square(t, "mean_ergodic_projection");
  if (sup_op_norm(t) > 1.0 + tol) throw NotContraction("mean_ergodic_projection: |T| exceeds 1");
  if (mode == MeanErgodicMode::Cesaro) {
    if (n_steps < 1) throw Error("mean_ergodic_projection: n_steps must be positive");
    auto acc = ModuleHom::identity(t.domain());
    auto power = ModuleHom::identity(t.domain());
    for (int j = 1; j < n_steps; ++j) {
      power = t * power;
      acc = acc + power;
    }
    return (Complex(1.0 / n_steps, 0.0)) * acc;
  }
  std::vector<Eigen::MatrixXcd> blocks;
  blocks.reserve(t.points());
  for (std::size_t i = 0; i < t.points(); ++i) {
    const Eigen::Index d = t.domain().dim(i);
    if (d == 0) {
      blocks.push_back(Eigen::MatrixXcd::Zero(0, 0));
      continue;
    }
    Eigen::MatrixXcd m = t.block(i) - Eigen::MatrixXcd::Identity(d, d);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cut = tol * std::max(1.0, s.size() > 0 ? s(0) : 0.0);
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > cut) ++rank;
    Eigen::MatrixXcd null_basis = svd.matrixV().rightCols(d - rank);
    blocks.push_back(null_basis * null_basis.adjoint());
  }
  return ModuleHom(t.domain(), t.domain(), std::move(blocks));
}

SpectralDecomposition spectral_decompose(const ModuleHom& a, int max_terms, double tol) {
  require_square(a, "spectral_decompose");
  const double scale = sup_op_norm(a);
  if (sup_op_norm(a - adjoint(a)) > tol * std::max(1.0, scale))
    throw NotSelfAdjoint("spectral_decompose: input is not self-adjoint");

  const double cluster_tol = tol * scale;
  const double zero_cut = tol * scale;

  std::vector<std::vector<FiberLevel>> levels(a.points());
  std::vector<Eigen::MatrixXcd> vectors(a.points());
  std::size_t max_levels = 0;
  for (std::size_t i = 0; i < a.points(); ++i) {
    const Eigen::Index d = a.domain().dim(i);
    if (d == 0) {
      vectors[i] = Eigen::MatrixXcd::Zero(0, 0);
      continue;
    }
    Eigen::MatrixXcd h = 0.5 * (a.block(i) + a.block(i).adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    vectors[i] = es.eigenvectors();
    const Eigen::VectorXd ev = es.eigenvalues();

    // Order eigenvalue indices by decreasing absolute value, then walk the
    // chain merging entries closer than cluster_tol into one level.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) order[static_cast<std::size_t>(k)] = k;
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index x, Eigen::Index y) { return std::abs(ev(x)) > std::abs(ev(y)); });
    for (auto k : order) {
      const double mag = std::abs(ev(k));
      if (mag <= zero_cut) break;
      if (levels[i].empty() || levels[i].back().value - mag > cluster_tol) {
        levels[i].push_back(FiberLevel{mag, {}, {}});
      }
      if (ev(k) >= 0)
        levels[i].back().pos.push_back(k);
      else
        levels[i].back().neg.push_back(k);
    }
    max_levels = std::max(max_levels, levels[i].size());
  }

  SpectralDecomposition out;
  const std::size_t keep = std::min<std::size_t>(max_levels, static_cast<std::size_t>(max_terms));
  for (std::size_t j = 0; j < keep; ++j) {
    Eigen::VectorXcd lam(static_cast<Eigen::Index>(a.points()));
    std::vector<Eigen::MatrixXcd> pos, neg;
    for (std::size_t i = 0; i < a.points(); ++i) {
      const Eigen::Index d = a.domain().dim(i);
      Eigen::MatrixXcd pp = Eigen::MatrixXcd::Zero(d, d);
      Eigen::MatrixXcd pn = Eigen::MatrixXcd::Zero(d, d);
      double value = 0.0;
      if (j < levels[i].size()) {
        const auto& lev = levels[i][j];
        value = lev.value;
        for (auto k : lev.pos) pp += vectors[i].col(k) * vectors[i].col(k).adjoint();
        for (auto k : lev.neg) pn += vectors[i].col(k) * vectors[i].col(k).adjoint();
      }
      lam(static_cast<Eigen::Index>(i)) = value;
      pos.push_back(std::move(pp));
      neg.push_back(std::move(pn));
    }
    out.lambdas.emplace_back(a.base(), std::move(lam));
    out.pos_projections.emplace_back(a.domain(), a.domain(), std::move(pos));
    out.neg_projections.emplace_back(a.domain(), a.domain(), std::move(neg));
  }

  out.residual_norm = sup_hs_norm(a - reconstruct(out, a.domain()));
  if (max_levels > keep && out.residual_norm > tol * std::max(1.0, scale))
    throw ConvergenceFailure("spectral_decompose: level budget exhausted before the residual target");
  return out;
}

}  // namespace kh
