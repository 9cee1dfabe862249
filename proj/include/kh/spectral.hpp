#pragma once

#include <vector>

#include "kh/homs.hpp"

namespace kh {

// Levelwise data of a self-adjoint hom: A = sum_j lambda_j (P_j^+ - P_j^-)
// with lambda_1 >= lambda_2 >= ... >= 0 pointwise and pairwise orthogonal
// projection ranges.
struct SpectralDecomposition {
  std::vector<StoneElement> lambdas;
  std::vector<ModuleHom> pos_projections;
  std::vector<ModuleHom> neg_projections;
  double residual_norm = 0.0;

  std::size_t terms() const { return lambdas.size(); }
};

ModuleHom reconstruct(const SpectralDecomposition& d, const KhShape& shape);

enum class MeanErgodicMode { Exact, Cesaro };

// Orthogonal projection onto the fixed space of a contraction. Exact mode
// solves the fiberwise fixed-point equations directly; Cesaro mode averages
// the first n_steps powers and agrees with exact mode in the limit, exactly
// so when the contraction has finite order dividing n_steps.
ModuleHom mean_ergodic_projection(const ModuleHom& t, MeanErgodicMode mode, int n_steps = 1,
                                  double tol = kDefaultTol);

SpectralDecomposition spectral_decompose(const ModuleHom& a, int max_terms = 64,
                                         double tol = kDefaultTol);

}  // namespace kh
