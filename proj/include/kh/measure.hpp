#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <utility>
#include <vector>

#include "kh/gsystem.hpp"

namespace kh {

using Rat = boost::multiprecision::cpp_rational;

double to_double(const Rat& r);

// Finite probability space with exact rational masses summing to one.
class FiniteProbSpace {
 public:
  FiniteProbSpace(std::vector<std::string> atoms, std::vector<Rat> masses);

  static FiniteProbSpace uniform(std::vector<std::string> atoms);
  // Accepts doubles summing to one within tol, then normalizes exactly.
  static FiniteProbSpace from_doubles(std::vector<std::string> atoms,
                                      const std::vector<double>& masses, double tol = 1e-9);

  std::size_t size() const { return masses_.size(); }
  const std::string& atom(std::size_t i) const;
  std::size_t index_of(const std::string& label) const;
  const Rat& mass(std::size_t i) const { return masses_[i]; }
  double massd(std::size_t i) const { return massd_[i]; }
  const BasePtr& base() const { return base_; }

  bool operator==(const FiniteProbSpace& o) const;

 private:
  BasePtr base_;
  std::vector<Rat> masses_;
  std::vector<double> massd_;
};

// Measure-preserving generator permutations on a finite probability space.
class MpSystem {
 public:
  MpSystem(FiniteProbSpace space, std::vector<std::string> names,
           std::vector<std::vector<std::size_t>> perms, GroupKind kind);

  const FiniteProbSpace& space() const { return space_; }
  std::size_t generator_count() const { return names_.size(); }
  const std::string& name(std::size_t g) const { return names_[g]; }
  const std::vector<std::size_t>& perm(std::size_t g) const { return perms_[g]; }
  std::size_t index_of(const std::string& name) const;
  GroupKind kind() const { return kind_; }

  BaseAction base_action() const;

  // T_g f = f after the inverse atom motion.
  Eigen::VectorXcd koopman(std::size_t g, const Eigen::VectorXcd& f, bool inverse = false) const;

  bool same_generators(const MpSystem& o) const;

 private:
  FiniteProbSpace space_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> perms_;
  GroupKind kind_;
};

// Factor map between two systems sharing generator names.
class FiniteExtension {
 public:
  FiniteExtension(MpSystem top, MpSystem bottom, std::vector<std::size_t> factor);

  const MpSystem& top() const { return top_; }
  const MpSystem& bottom() const { return bottom_; }
  const std::vector<std::size_t>& factor() const { return factor_; }
  // Per bottom atom, the top atoms above it in top order.
  const std::vector<std::vector<std::size_t>>& fibers() const { return fibers_; }

 private:
  MpSystem top_;
  MpSystem bottom_;
  std::vector<std::size_t> factor_;
  std::vector<std::vector<std::size_t>> fibers_;
};

Eigen::VectorXcd conditional_expectation(const FiniteExtension& ext, const Eigen::VectorXcd& f);
std::vector<Rat> conditional_expectation(const FiniteExtension& ext, const std::vector<Rat>& f);

// Lift of a bottom function along the factor map.
Eigen::VectorXcd factor_lift(const FiniteExtension& ext, const Eigen::VectorXcd& g);

// The top function algebra bundled fiberwise over the bottom atoms, with
// coordinates weighted so that plain fiber inner products compute the
// conditional pairing and the dynamics acts by permutation blocks.
struct ConditionalModule {
  KhShape shape;
  GSystem system;
  std::vector<std::vector<std::size_t>> fibers;
  std::vector<std::size_t> fiber_of;
  std::vector<std::size_t> pos_in_fiber;
  std::vector<double> weight;

  KhVector to_module(const Eigen::VectorXcd& f) const;
  Eigen::VectorXcd to_function(const KhVector& v) const;
};

ConditionalModule conditional_module(const FiniteExtension& ext);

// Positive unital operator compatible with the two measures; entries are
// exact rationals, rows indexed by target atoms.
class MarkovOperator {
 public:
  MarkovOperator(FiniteProbSpace source, FiniteProbSpace target,
                 std::vector<std::vector<Rat>> entries);

  static MarkovOperator identity(const FiniteProbSpace& space);
  static MarkovOperator forget(const FiniteProbSpace& source, const FiniteProbSpace& target);
  static MarkovOperator factor_embedding(const FiniteExtension& ext);
  static MarkovOperator factor_expectation(const FiniteExtension& ext);
  static MarkovOperator koopman(const MpSystem& sys, std::size_t g, bool inverse = false);

  const FiniteProbSpace& source() const { return source_; }
  const FiniteProbSpace& target() const { return target_; }
  const Rat& entry(std::size_t t, std::size_t s) const { return entries_[t][s]; }
  double entryd(std::size_t t, std::size_t s) const { return to_double(entries_[t][s]); }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& f) const;
  std::vector<Rat> apply_exact(const std::vector<Rat>& f) const;

  // Adjoint for the mass-weighted pairings; swaps source and target.
  MarkovOperator adjoint() const;

  bool equals_exact(const MarkovOperator& o) const;
  double max_abs_diff(const MarkovOperator& o) const;

 private:
  FiniteProbSpace source_;
  FiniteProbSpace target_;
  std::vector<std::vector<Rat>> entries_;
};

MarkovOperator compose(const MarkovOperator& a, const MarkovOperator& b);

// Joint space on pairs carrying both marginals, with lift and expectation
// helpers; pairs of zero mass are never materialized.
struct Coupling {
  FiniteProbSpace left;
  FiniteProbSpace right;
  FiniteProbSpace joint;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  Eigen::VectorXcd lift_left(const Eigen::VectorXcd& f) const;
  Eigen::VectorXcd lift_right(const Eigen::VectorXcd& g) const;
  std::vector<Rat> marginal_left() const;
  std::vector<Rat> marginal_right() const;
  // Conditional expectation of a joint function onto the right space.
  std::vector<Rat> expect_right(const std::vector<Rat>& h) const;
  // The operator x -> distribution of the left atom given the right one.
  MarkovOperator recovered() const;
};

Coupling coupling_from_markov(const MarkovOperator& p);

// Mass-preserving matching of two couplings of the same pair of spaces.
bool couplings_isomorphic(const Coupling& a, const Coupling& b);

// Largest defect of the joint-motion criterion over shared generators; zero
// exactly when the two dynamics lift to the coupled space.
double lift_residual(const MarkovOperator& p, const MpSystem& left, const MpSystem& right);

// Joint dynamics on the coupled space; rejects pairs whose motion does not
// preserve the coupling.
MpSystem lift_dynamics(const Coupling& c, const MpSystem& left, const MpSystem& right);

struct Joining {
  FiniteExtension extension;
  // Per joint top atom, the contributing top atoms of the two factors.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

// Fiber product over the shared bottom with mass m(x) m(x') / m(y).
Joining rel_indep_joining(const FiniteExtension& a, const FiniteExtension& b);

// Reshaping unitary between fiberwise matrices over the two conditional
// modules and the conditional module of the relatively independent joining.
struct TensorJoiningIso {
  ConditionalModule left;
  ConditionalModule right;
  Joining joining;
  ConditionalModule joint;
  GSystem tensor_system;
  std::vector<std::vector<std::vector<std::size_t>>> pair_slot;

  ModuleHom elementary(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g) const;
  KhVector forward(const ModuleHom& m) const;
  ModuleHom backward(const KhVector& v) const;
  KhVector vectorize(const ModuleHom& m) const;
  ModuleHom matricize(const KhVector& v) const;
  ModuleHom tensor_apply(std::size_t g, const ModuleHom& m) const;
};

TensorJoiningIso tensor_joining_iso(const FiniteExtension& a, const FiniteExtension& b);

}  // namespace kh
