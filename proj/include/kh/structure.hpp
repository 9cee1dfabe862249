#pragma once

#include <cstdint>
#include <vector>

#include "kh/measure.hpp"

namespace kh {

// Discrete part of an extension, with the invariant families that generate
// it and the factor system carved out of their level sets.
struct KroneckerReport {
  ConditionalModule module;
  // Suborthonormal basis of the span of all intertwiner ranges.
  std::vector<KhVector> ds_basis;
  // Minimal invariant families harvested from a generic intertwiner; the
  // members of one family span a single invariant submodule.
  std::vector<std::vector<KhVector>> families;
  // (local rank, number of base atoms) for the homogeneous pieces of the span.
  std::vector<std::pair<Eigen::Index, std::size_t>> rank_histogram;
  // Partition of the top atoms by joint level sets of the spanning functions.
  std::vector<std::vector<std::size_t>> partition;
  FiniteExtension factor;     // partition system over the bottom
  FiniteExtension embedding;  // top system over the partition system
  bool is_full = false;
  std::size_t rank_one_generators = 0;
  double char_gap = 0.0;       // range span versus family span, largest fiber gap
  double family_gap = 0.0;     // family outer products versus their projections
  double sons_residual = 0.0;  // base invariance defect of the family square sums
  double wm_norm = 0.0;        // size of the weakly mixing complement
};

KroneckerReport kronecker_subspace(const FiniteExtension& ext, std::uint64_t seed = 1,
                                   double tol = kDefaultTol);

struct TowerReport {
  // Partitions of the top atoms, from the bottom fibers up to stabilization.
  std::vector<std::vector<std::vector<std::size_t>>> levels;
  std::size_t stabilized_at = 0;
  bool is_full = false;
};

TowerReport furstenberg_tower(const FiniteExtension& ext, std::uint64_t seed = 1,
                              double tol = kDefaultTol);

struct WeakMixingReport {
  bool weakly_mixing = false;
  std::size_t joint_fixed_dim = 0;
  std::size_t bottom_fixed_dim = 0;
  double witness_residual = 0.0;
  // Function on the joining atoms witnessing a fixed vector outside the
  // lifted bottom invariants; empty when the extension is weakly mixing.
  Eigen::VectorXcd witness;
};

WeakMixingReport is_weakly_mixing(const FiniteExtension& ext, double tol = kDefaultTol);

struct OrthogonalityReport {
  double a_span_residual = 0.0;  // size of the projection onto the discrete part
  double b_pairing = 0.0;        // invariant part of f x conj f paired with itself
  double c_max_pairing = 0.0;    // largest pairing against the joint fixed basis
  double d_norm = 0.0;           // norm of the invariant part of f x conj f
  double e_infimum = 0.0;        // word search over conditioned correlations
  bool orthogonal = false;
  bool agree = false;
};

// Test functions default to the atom indicators when no family is supplied.
OrthogonalityReport orthogonality_criteria(const FiniteExtension& ext,
                                           const Eigen::VectorXcd& f,
                                           const std::vector<Eigen::VectorXcd>& test_family = {},
                                           std::size_t max_word_len = 4,
                                           double tol = kDefaultTol);

struct FolnerCurve {
  std::vector<double> curve;  // entry k-1 holds the window average up to k
  double limit = 0.0;
  std::size_t period = 1;  // order of the joint atom permutation
};

// Window averages of the squared conditioned correlations of f against g,
// with the exact limit computed on the relatively independent self joining.
FolnerCurve folner_diagnostic(const FiniteExtension& ext, const Eigen::VectorXcd& f,
                              const Eigen::VectorXcd& g, std::size_t n_max);

}  // namespace kh
