#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kh/spectral.hpp"

namespace kh {

enum class GroupKind { FreeOnGenerators, SingleGeneratorZ, FinitePresentedUnchecked };

// Named permutation action of a group's generators on a finite base.
class BaseAction {
 public:
  BaseAction(BasePtr base, std::vector<std::string> names,
             std::vector<std::vector<std::size_t>> perms, GroupKind kind);

  const BasePtr& base() const { return base_; }
  std::size_t generator_count() const { return names_.size(); }
  const std::string& name(std::size_t g) const { return names_[g]; }
  const std::vector<std::size_t>& perm(std::size_t g) const { return perms_[g]; }
  std::size_t index_of(const std::string& name) const;
  GroupKind kind() const { return kind_; }

 private:
  BasePtr base_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> perms_;
  GroupKind kind_;
};

// Partition of the base into orbits of the generated group.
std::vector<std::vector<std::size_t>> base_orbits(const BaseAction& act);

StoneElement koopman(const BaseAction& act, std::size_t g, const StoneElement& f,
                     bool inverse = false);

// Unitary representation covariant over a base action: one unitary per
// generator and base point, mapping the fiber at w to the fiber at sigma(w).
class GSystem {
 public:
  GSystem(BaseAction action, KhShape shape, std::vector<std::vector<Eigen::MatrixXcd>> unitaries,
          double tol = kDefaultTol);

  static GSystem trivial(KhShape shape, GroupKind kind = GroupKind::FreeOnGenerators);

  const BaseAction& action() const { return action_; }
  const KhShape& shape() const { return shape_; }
  const Eigen::MatrixXcd& unitary(std::size_t g, std::size_t w) const { return unitaries_[g][w]; }

 private:
  BaseAction action_;
  KhShape shape_;
  std::vector<std::vector<Eigen::MatrixXcd>> unitaries_;
};

using Word = std::vector<std::pair<std::string, int>>;

KhVector apply_generator(const GSystem& sys, std::size_t g, const KhVector& x,
                         bool inverse = false);
KhVector apply_group(const GSystem& sys, const Word& word, const KhVector& x);

// Conjugation A -> T_g A T_g^{-1}, acting blockwise along the base motion.
ModuleHom conjugate_by_generator(const GSystem& sys, std::size_t g, const ModuleHom& a);

// Largest commutation defect of a over all generators.
double intertwining_residual(const GSystem& sys, const ModuleHom& a);

// Suborthonormal basis of the common fixed space of all generators, one
// block of mutually orthonormal vectors per base orbit.
std::vector<KhVector> fixed_submodule(const GSystem& sys, double tol = kDefaultTol);

// Spanning set of the intertwining endomorphisms, organized per base orbit
// and pointwise orthonormal for the Hilbert-Schmidt pairing.
std::vector<ModuleHom> intertwiner_basis(const GSystem& sys, double tol = kDefaultTol);

struct DsWmSplit {
  std::vector<KhVector> ds_basis;
  std::vector<KhVector> wm_basis;
};

// Splits the module into the part generated by ranges of intertwiners and
// its orthocomplement.
DsWmSplit ds_wm_decomposition(const GSystem& sys, double tol = kDefaultTol);

struct EquivariantSpectral {
  SpectralDecomposition decomposition;
  double lambda_equivariance = 0.0;
  double commutation_residual = 0.0;
};

// Spectral data of a self-adjoint intertwiner; level functions are fixed
// under the base action and level projections intertwine.
EquivariantSpectral equivariant_spectral(const GSystem& sys, const ModuleHom& a,
                                         int max_terms = 64, double tol = kDefaultTol);

}  // namespace kh
