#include "kh/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unsupported/Eigen/KroneckerProduct>

#include "kh/errors.hpp"

namespace kh {

double to_double(const Rat& r) { return r.convert_to<double>(); }

FiniteProbSpace::FiniteProbSpace(std::vector<std::string> atoms, std::vector<Rat> masses)
    : base_(make_base(std::move(atoms))), masses_(std::move(masses)) {
  if (masses_.size() != base_->size())
    throw Error("FiniteProbSpace: one mass per atom required");
  Rat total = 0;
  for (const auto& m : masses_) {
    if (m <= 0) throw Error("FiniteProbSpace: masses must be positive");
    total += m;
  }
  if (total != 1) throw Error("FiniteProbSpace: masses must sum to one");
  massd_.reserve(masses_.size());
  for (const auto& m : masses_) massd_.push_back(to_double(m));
}

FiniteProbSpace FiniteProbSpace::uniform(std::vector<std::string> atoms) {
  const std::size_t n = atoms.size();
  if (n == 0) throw Error("FiniteProbSpace: at least one atom required");
  return FiniteProbSpace(std::move(atoms), std::vector<Rat>(n, Rat(1, n)));
}

FiniteProbSpace FiniteProbSpace::from_doubles(std::vector<std::string> atoms,
                                              const std::vector<double>& masses, double tol) {
  double sum = 0.0;
  for (double m : masses) {
    if (!(m > 1e-12)) throw Error("FiniteProbSpace: masses must exceed 1e-12");
    sum += m;
  }
  if (std::abs(sum - 1.0) > tol) throw Error("FiniteProbSpace: masses do not sum to one");
  std::vector<Rat> exact;
  exact.reserve(masses.size());
  Rat total = 0;
  for (double m : masses) {
    exact.emplace_back(m);
    total += exact.back();
  }
  for (auto& r : exact) r /= total;
  return FiniteProbSpace(std::move(atoms), std::move(exact));
}

const std::string& FiniteProbSpace::atom(std::size_t i) const { return base_->label(i); }

std::size_t FiniteProbSpace::index_of(const std::string& label) const {
  return base_->index_of(label);
}

bool FiniteProbSpace::operator==(const FiniteProbSpace& o) const {
  return *base_ == *o.base_ && masses_ == o.masses_;
}

MpSystem::MpSystem(FiniteProbSpace space, std::vector<std::string> names,
                   std::vector<std::vector<std::size_t>> perms, GroupKind kind)
    : space_(std::move(space)), names_(std::move(names)), perms_(std::move(perms)), kind_(kind) {
  if (names_.size() != perms_.size()) throw Error("MpSystem: one permutation per name required");
  for (std::size_t g = 0; g < names_.size(); ++g) {
    if (names_[g].empty()) throw Error("MpSystem: empty generator name");
    for (std::size_t h = 0; h < g; ++h)
      if (names_[h] == names_[g]) throw Error("MpSystem: duplicate generator name " + names_[g]);
    require_permutation(perms_[g], space_.size());
    for (std::size_t i = 0; i < space_.size(); ++i)
      if (space_.mass(perms_[g][i]) != space_.mass(i))
        throw Error("MpSystem: generator " + names_[g] + " does not preserve masses");
  }
  if (kind_ == GroupKind::SingleGeneratorZ && names_.size() != 1)
    throw NotSingleGenerator("MpSystem: single-generator group with " +
                             std::to_string(names_.size()) + " generators");
}

std::size_t MpSystem::index_of(const std::string& name) const {
  for (std::size_t g = 0; g < names_.size(); ++g)
    if (names_[g] == name) return g;
  throw UnknownGenerator("unknown generator " + name);
}

BaseAction MpSystem::base_action() const { return BaseAction(space_.base(), names_, perms_, kind_); }

Eigen::VectorXcd MpSystem::koopman(std::size_t g, const Eigen::VectorXcd& f, bool inverse) const {
  if (f.size() != static_cast<Eigen::Index>(space_.size()))
    throw ShapeMismatch("koopman: function length");
  const auto& sigma = perms_[g];
  Eigen::VectorXcd out(f.size());
  if (!inverse) {
    for (std::size_t i = 0; i < sigma.size(); ++i) out(sigma[i]) = f(i);
  } else {
    for (std::size_t i = 0; i < sigma.size(); ++i) out(i) = f(sigma[i]);
  }
  return out;
}

bool MpSystem::same_generators(const MpSystem& o) const {
  return names_ == o.names_ && perms_ == o.perms_ && kind_ == o.kind_;
}

FiniteExtension::FiniteExtension(MpSystem top, MpSystem bottom, std::vector<std::size_t> factor)
    : top_(std::move(top)), bottom_(std::move(bottom)), factor_(std::move(factor)) {
  if (factor_.size() != top_.space().size())
    throw Error("FiniteExtension: factor map must cover the top atoms");
  for (std::size_t x : factor_)
    if (x >= bottom_.space().size()) throw Error("FiniteExtension: factor image out of range");
  if (top_.generator_count() != bottom_.generator_count() || top_.kind() != bottom_.kind())
    throw Error("FiniteExtension: generator families differ");
  for (std::size_t g = 0; g < top_.generator_count(); ++g)
    if (top_.name(g) != bottom_.name(g))
      throw Error("FiniteExtension: generator names differ at position " + std::to_string(g));

  std::vector<Rat> push(bottom_.space().size(), Rat(0));
  for (std::size_t x = 0; x < factor_.size(); ++x) push[factor_[x]] += top_.space().mass(x);
  for (std::size_t y = 0; y < push.size(); ++y)
    if (push[y] != bottom_.space().mass(y))
      throw Error("FiniteExtension: factor map does not push the measure forward");

  for (std::size_t g = 0; g < top_.generator_count(); ++g)
    for (std::size_t x = 0; x < factor_.size(); ++x)
      if (factor_[top_.perm(g)[x]] != bottom_.perm(g)[factor_[x]])
        throw EquivarianceViolation("FiniteExtension: generator " + top_.name(g) +
                                    " does not commute with the factor map");

  fibers_.resize(bottom_.space().size());
  for (std::size_t x = 0; x < factor_.size(); ++x) fibers_[factor_[x]].push_back(x);
}

Eigen::VectorXcd conditional_expectation(const FiniteExtension& ext, const Eigen::VectorXcd& f) {
  if (f.size() != static_cast<Eigen::Index>(ext.top().space().size()))
    throw ShapeMismatch("conditional_expectation: function length");
  Eigen::VectorXcd out(static_cast<Eigen::Index>(ext.bottom().space().size()));
  for (std::size_t y = 0; y < ext.fibers().size(); ++y) {
    Complex acc = 0.0;
    for (std::size_t x : ext.fibers()[y])
      acc += to_double(ext.top().space().mass(x) / ext.bottom().space().mass(y)) * f(x);
    out(static_cast<Eigen::Index>(y)) = acc;
  }
  return out;
}

std::vector<Rat> conditional_expectation(const FiniteExtension& ext, const std::vector<Rat>& f) {
  if (f.size() != ext.top().space().size())
    throw ShapeMismatch("conditional_expectation: function length");
  std::vector<Rat> out(ext.bottom().space().size(), Rat(0));
  for (std::size_t y = 0; y < ext.fibers().size(); ++y) {
    for (std::size_t x : ext.fibers()[y]) out[y] += ext.top().space().mass(x) * f[x];
    out[y] /= ext.bottom().space().mass(y);
  }
  return out;
}

Eigen::VectorXcd factor_lift(const FiniteExtension& ext, const Eigen::VectorXcd& g) {
  if (g.size() != static_cast<Eigen::Index>(ext.bottom().space().size()))
    throw ShapeMismatch("factor_lift: function length");
  Eigen::VectorXcd out(static_cast<Eigen::Index>(ext.top().space().size()));
  for (std::size_t x = 0; x < ext.factor().size(); ++x) out(x) = g(ext.factor()[x]);
  return out;
}

KhVector ConditionalModule::to_module(const Eigen::VectorXcd& f) const {
  if (f.size() != static_cast<Eigen::Index>(weight.size()))
    throw ShapeMismatch("to_module: function length");
  std::vector<Eigen::VectorXcd> out;
  out.reserve(fibers.size());
  for (const auto& fiber : fibers) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(fiber.size()));
    for (std::size_t k = 0; k < fiber.size(); ++k)
      v(static_cast<Eigen::Index>(k)) = f(fiber[k]) * weight[fiber[k]];
    out.push_back(std::move(v));
  }
  return KhVector(shape, std::move(out));
}

Eigen::VectorXcd ConditionalModule::to_function(const KhVector& v) const {
  require_same_shape(shape, v.shape());
  Eigen::VectorXcd out(static_cast<Eigen::Index>(weight.size()));
  for (std::size_t x = 0; x < weight.size(); ++x)
    out(x) = v.fiber(fiber_of[x])(static_cast<Eigen::Index>(pos_in_fiber[x])) / weight[x];
  return out;
}

ConditionalModule conditional_module(const FiniteExtension& ext) {
  const auto& bottom = ext.bottom().space();
  const auto& top = ext.top().space();
  ConditionalModule cm{
      KhShape(bottom.base(), [&] {
        std::vector<Eigen::Index> dims;
        for (const auto& fiber : ext.fibers())
          dims.push_back(static_cast<Eigen::Index>(fiber.size()));
        return dims;
      }()),
      GSystem::trivial(KhShape(bottom.base(), {std::vector<Eigen::Index>(bottom.size(), 0)})),
      ext.fibers(),
      std::vector<std::size_t>(top.size(), 0),
      std::vector<std::size_t>(top.size(), 0),
      std::vector<double>(top.size(), 0.0)};
  for (std::size_t y = 0; y < ext.fibers().size(); ++y) {
    for (std::size_t k = 0; k < ext.fibers()[y].size(); ++k) {
      const std::size_t x = ext.fibers()[y][k];
      cm.fiber_of[x] = y;
      cm.pos_in_fiber[x] = k;
      cm.weight[x] = std::sqrt(to_double(top.mass(x) / bottom.mass(y)));
    }
  }
  std::vector<std::vector<Eigen::MatrixXcd>> unitaries;
  for (std::size_t g = 0; g < ext.top().generator_count(); ++g) {
    std::vector<Eigen::MatrixXcd> per_point;
    for (std::size_t y = 0; y < ext.fibers().size(); ++y) {
      const std::size_t ty = ext.bottom().perm(g)[y];
      const auto& src = ext.fibers()[y];
      Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(src.size()),
                                                  static_cast<Eigen::Index>(src.size()));
      for (std::size_t k = 0; k < src.size(); ++k) {
        const std::size_t tx = ext.top().perm(g)[src[k]];
        if (cm.fiber_of[tx] != ty)
          throw EquivarianceViolation("conditional_module: fiber motion mismatch");
        u(static_cast<Eigen::Index>(cm.pos_in_fiber[tx]), static_cast<Eigen::Index>(k)) = 1.0;
      }
      per_point.push_back(std::move(u));
    }
    unitaries.push_back(std::move(per_point));
  }
  cm.system = GSystem(ext.bottom().base_action(), cm.shape, std::move(unitaries));
  return cm;
}

MarkovOperator::MarkovOperator(FiniteProbSpace source, FiniteProbSpace target,
                               std::vector<std::vector<Rat>> entries)
    : source_(std::move(source)), target_(std::move(target)), entries_(std::move(entries)) {
  if (entries_.size() != target_.size())
    throw InvalidMarkov("MarkovOperator: one row per target atom required");
  for (const auto& row : entries_)
    if (row.size() != source_.size())
      throw InvalidMarkov("MarkovOperator: one column per source atom required");
  for (std::size_t t = 0; t < entries_.size(); ++t) {
    Rat row_sum = 0;
    for (const auto& e : entries_[t]) {
      if (e < 0) throw InvalidMarkov("MarkovOperator: negative entry");
      row_sum += e;
    }
    if (row_sum != 1) throw InvalidMarkov("MarkovOperator: rows must sum to one");
  }
  for (std::size_t s = 0; s < source_.size(); ++s) {
    Rat col = 0;
    for (std::size_t t = 0; t < target_.size(); ++t) col += target_.mass(t) * entries_[t][s];
    if (col != source_.mass(s))
      throw InvalidMarkov("MarkovOperator: incompatible with the two measures");
  }
}

MarkovOperator MarkovOperator::identity(const FiniteProbSpace& space) {
  std::vector<std::vector<Rat>> e(space.size(), std::vector<Rat>(space.size(), Rat(0)));
  for (std::size_t i = 0; i < space.size(); ++i) e[i][i] = 1;
  return MarkovOperator(space, space, std::move(e));
}

MarkovOperator MarkovOperator::forget(const FiniteProbSpace& source,
                                      const FiniteProbSpace& target) {
  std::vector<std::vector<Rat>> e(target.size(), std::vector<Rat>(source.size(), Rat(0)));
  for (std::size_t t = 0; t < target.size(); ++t)
    for (std::size_t s = 0; s < source.size(); ++s) e[t][s] = source.mass(s);
  return MarkovOperator(source, target, std::move(e));
}

MarkovOperator MarkovOperator::factor_embedding(const FiniteExtension& ext) {
  const auto& top = ext.top().space();
  const auto& bottom = ext.bottom().space();
  std::vector<std::vector<Rat>> e(top.size(), std::vector<Rat>(bottom.size(), Rat(0)));
  for (std::size_t x = 0; x < top.size(); ++x) e[x][ext.factor()[x]] = 1;
  return MarkovOperator(bottom, top, std::move(e));
}

MarkovOperator MarkovOperator::factor_expectation(const FiniteExtension& ext) {
  const auto& top = ext.top().space();
  const auto& bottom = ext.bottom().space();
  std::vector<std::vector<Rat>> e(bottom.size(), std::vector<Rat>(top.size(), Rat(0)));
  for (std::size_t x = 0; x < top.size(); ++x)
    e[ext.factor()[x]][x] = top.mass(x) / bottom.mass(ext.factor()[x]);
  return MarkovOperator(top, bottom, std::move(e));
}

MarkovOperator MarkovOperator::koopman(const MpSystem& sys, std::size_t g, bool inverse) {
  const auto& space = sys.space();
  std::vector<std::vector<Rat>> e(space.size(), std::vector<Rat>(space.size(), Rat(0)));
  for (std::size_t i = 0; i < space.size(); ++i) {
    const std::size_t j = sys.perm(g)[i];
    if (!inverse)
      e[j][i] = 1;
    else
      e[i][j] = 1;
  }
  return MarkovOperator(space, space, std::move(e));
}

Eigen::VectorXcd MarkovOperator::apply(const Eigen::VectorXcd& f) const {
  if (f.size() != static_cast<Eigen::Index>(source_.size()))
    throw ShapeMismatch("MarkovOperator: function length");
  Eigen::VectorXcd out(static_cast<Eigen::Index>(target_.size()));
  for (std::size_t t = 0; t < target_.size(); ++t) {
    Complex acc = 0.0;
    for (std::size_t s = 0; s < source_.size(); ++s) acc += to_double(entries_[t][s]) * f(s);
    out(static_cast<Eigen::Index>(t)) = acc;
  }
  return out;
}

std::vector<Rat> MarkovOperator::apply_exact(const std::vector<Rat>& f) const {
  if (f.size() != source_.size()) throw ShapeMismatch("MarkovOperator: function length");
  std::vector<Rat> out(target_.size(), Rat(0));
  for (std::size_t t = 0; t < target_.size(); ++t)
    for (std::size_t s = 0; s < source_.size(); ++s) out[t] += entries_[t][s] * f[s];
  return out;
}

MarkovOperator MarkovOperator::adjoint() const {
  std::vector<std::vector<Rat>> e(source_.size(), std::vector<Rat>(target_.size(), Rat(0)));
  for (std::size_t s = 0; s < source_.size(); ++s)
    for (std::size_t t = 0; t < target_.size(); ++t)
      e[s][t] = target_.mass(t) * entries_[t][s] / source_.mass(s);
  return MarkovOperator(target_, source_, std::move(e));
}

bool MarkovOperator::equals_exact(const MarkovOperator& o) const {
  return source_ == o.source_ && target_ == o.target_ && entries_ == o.entries_;
}

double MarkovOperator::max_abs_diff(const MarkovOperator& o) const {
  if (source_.size() != o.source_.size() || target_.size() != o.target_.size())
    throw ShapeMismatch("max_abs_diff: operator shapes");
  double m = 0.0;
  for (std::size_t t = 0; t < target_.size(); ++t)
    for (std::size_t s = 0; s < source_.size(); ++s)
      m = std::max(m, std::abs(to_double(entries_[t][s] - o.entries_[t][s])));
  return m;
}

MarkovOperator compose(const MarkovOperator& a, const MarkovOperator& b) {
  if (!(a.source() == b.target())) throw ShapeMismatch("compose: intermediate spaces differ");
  std::vector<std::vector<Rat>> e(a.target().size(), std::vector<Rat>(b.source().size(), Rat(0)));
  for (std::size_t t = 0; t < a.target().size(); ++t)
    for (std::size_t s = 0; s < b.source().size(); ++s)
      for (std::size_t m = 0; m < a.source().size(); ++m)
        e[t][s] += a.entry(t, m) * b.entry(m, s);
  return MarkovOperator(b.source(), a.target(), std::move(e));
}

Eigen::VectorXcd Coupling::lift_left(const Eigen::VectorXcd& f) const {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t z = 0; z < pairs.size(); ++z) out(z) = f(pairs[z].first);
  return out;
}

Eigen::VectorXcd Coupling::lift_right(const Eigen::VectorXcd& g) const {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t z = 0; z < pairs.size(); ++z) out(z) = g(pairs[z].second);
  return out;
}

std::vector<Rat> Coupling::marginal_left() const {
  std::vector<Rat> out(left.size(), Rat(0));
  for (std::size_t z = 0; z < pairs.size(); ++z) out[pairs[z].first] += joint.mass(z);
  return out;
}

std::vector<Rat> Coupling::marginal_right() const {
  std::vector<Rat> out(right.size(), Rat(0));
  for (std::size_t z = 0; z < pairs.size(); ++z) out[pairs[z].second] += joint.mass(z);
  return out;
}

std::vector<Rat> Coupling::expect_right(const std::vector<Rat>& h) const {
  if (h.size() != pairs.size()) throw ShapeMismatch("expect_right: function length");
  std::vector<Rat> out(right.size(), Rat(0));
  for (std::size_t z = 0; z < pairs.size(); ++z) out[pairs[z].second] += joint.mass(z) * h[z];
  for (std::size_t t = 0; t < out.size(); ++t) out[t] /= right.mass(t);
  return out;
}

MarkovOperator Coupling::recovered() const {
  std::vector<std::vector<Rat>> e(right.size(), std::vector<Rat>(left.size(), Rat(0)));
  for (std::size_t z = 0; z < pairs.size(); ++z)
    e[pairs[z].second][pairs[z].first] += joint.mass(z) / right.mass(pairs[z].second);
  return MarkovOperator(left, right, std::move(e));
}

Coupling coupling_from_markov(const MarkovOperator& p) {
  std::vector<std::string> labels;
  std::vector<Rat> masses;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t s = 0; s < p.source().size(); ++s) {
    for (std::size_t t = 0; t < p.target().size(); ++t) {
      Rat m = p.target().mass(t) * p.entry(t, s);
      if (m == 0) continue;
      labels.push_back("(" + p.source().atom(s) + "," + p.target().atom(t) + ")");
      masses.push_back(std::move(m));
      pairs.emplace_back(s, t);
    }
  }
  return Coupling{p.source(), p.target(), FiniteProbSpace(std::move(labels), std::move(masses)),
                  std::move(pairs)};
}

bool couplings_isomorphic(const Coupling& a, const Coupling& b) {
  if (!(a.left == b.left) || !(a.right == b.right)) return false;
  using Key = std::pair<std::pair<std::size_t, std::size_t>, Rat>;
  auto keys = [](const Coupling& c) {
    std::vector<Key> out;
    for (std::size_t z = 0; z < c.pairs.size(); ++z) out.push_back({c.pairs[z], c.joint.mass(z)});
    std::sort(out.begin(), out.end());
    return out;
  };
  return keys(a) == keys(b);
}

double lift_residual(const MarkovOperator& p, const MpSystem& left, const MpSystem& right) {
  if (!(left.space() == p.source()) || !(right.space() == p.target()))
    throw ShapeMismatch("lift_residual: systems do not match the operator");
  double worst = 0.0;
  for (std::size_t g = 0; g < left.generator_count(); ++g) {
    const std::size_t h = right.index_of(left.name(g));
    auto moved = compose(MarkovOperator::koopman(right, h).adjoint(),
                         compose(p, MarkovOperator::koopman(left, g)));
    worst = std::max(worst, moved.max_abs_diff(p));
  }
  return worst;
}

MpSystem lift_dynamics(const Coupling& c, const MpSystem& left, const MpSystem& right) {
  if (!(left.space() == c.left) || !(right.space() == c.right))
    throw ShapeMismatch("lift_dynamics: systems do not match the coupling");
  if (left.kind() != right.kind()) throw Error("lift_dynamics: group kinds differ");
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> at;
  for (std::size_t z = 0; z < c.pairs.size(); ++z) at[c.pairs[z]] = z;
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> perms;
  for (std::size_t g = 0; g < left.generator_count(); ++g) {
    const std::size_t h = right.index_of(left.name(g));
    std::vector<std::size_t> perm(c.pairs.size());
    for (std::size_t z = 0; z < c.pairs.size(); ++z) {
      auto moved = std::make_pair(left.perm(g)[c.pairs[z].first], right.perm(h)[c.pairs[z].second]);
      auto it = at.find(moved);
      if (it == at.end() || c.joint.mass(it->second) != c.joint.mass(z))
        throw EquivarianceViolation("lift_dynamics: the pair motion does not preserve the coupling");
      perm[z] = it->second;
    }
    names.push_back(left.name(g));
    perms.push_back(std::move(perm));
  }
  return MpSystem(c.joint, std::move(names), std::move(perms), left.kind());
}

Joining rel_indep_joining(const FiniteExtension& a, const FiniteExtension& b) {
  if (!(a.bottom().space() == b.bottom().space()) || !a.bottom().same_generators(b.bottom()))
    throw BottomMismatch("rel_indep_joining: the two extensions have different bottoms");
  const auto& bottom = a.bottom().space();

  std::vector<std::string> labels;
  std::vector<Rat> masses;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> factor;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> at;
  for (std::size_t y = 0; y < bottom.size(); ++y) {
    for (std::size_t l : b.fibers()[y]) {
      for (std::size_t k : a.fibers()[y]) {
        at[{k, l}] = pairs.size();
        labels.push_back("(" + a.top().space().atom(k) + "," + b.top().space().atom(l) + ")");
        masses.push_back(a.top().space().mass(k) * b.top().space().mass(l) / bottom.mass(y));
        pairs.emplace_back(k, l);
        factor.push_back(y);
      }
    }
  }
  FiniteProbSpace joint(std::move(labels), std::move(masses));

  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> perms;
  for (std::size_t g = 0; g < a.top().generator_count(); ++g) {
    std::vector<std::size_t> perm(pairs.size());
    for (std::size_t z = 0; z < pairs.size(); ++z)
      perm[z] = at.at({a.top().perm(g)[pairs[z].first], b.top().perm(g)[pairs[z].second]});
    names.push_back(a.top().name(g));
    perms.push_back(std::move(perm));
  }
  MpSystem top(std::move(joint), std::move(names), std::move(perms), a.top().kind());
  return Joining{FiniteExtension(std::move(top), a.bottom(), std::move(factor)), std::move(pairs)};
}

ModuleHom TensorJoiningIso::elementary(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g) const {
  return rank_one(left.to_module(f), right.to_module(g).conjugated());
}

KhVector TensorJoiningIso::forward(const ModuleHom& m) const {
  require_same_shape(m.domain(), right.shape);
  require_same_shape(m.codomain(), left.shape);
  std::vector<Eigen::VectorXcd> fibers;
  for (std::size_t y = 0; y < pair_slot.size(); ++y) {
    Eigen::VectorXcd v(joint.shape.dim(y));
    for (std::size_t k = 0; k < pair_slot[y].size(); ++k)
      for (std::size_t l = 0; l < pair_slot[y][k].size(); ++l)
        v(static_cast<Eigen::Index>(pair_slot[y][k][l])) =
            m.block(y)(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
    fibers.push_back(std::move(v));
  }
  return KhVector(joint.shape, std::move(fibers));
}

ModuleHom TensorJoiningIso::backward(const KhVector& v) const {
  require_same_shape(v.shape(), joint.shape);
  std::vector<Eigen::MatrixXcd> blocks;
  for (std::size_t y = 0; y < pair_slot.size(); ++y) {
    Eigen::MatrixXcd m(left.shape.dim(y), right.shape.dim(y));
    for (std::size_t k = 0; k < pair_slot[y].size(); ++k)
      for (std::size_t l = 0; l < pair_slot[y][k].size(); ++l)
        m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
            v.fiber(y)(static_cast<Eigen::Index>(pair_slot[y][k][l]));
    blocks.push_back(std::move(m));
  }
  return ModuleHom(right.shape, left.shape, std::move(blocks));
}

KhVector TensorJoiningIso::vectorize(const ModuleHom& m) const {
  require_same_shape(m.domain(), right.shape);
  require_same_shape(m.codomain(), left.shape);
  std::vector<Eigen::VectorXcd> fibers;
  for (std::size_t y = 0; y < pair_slot.size(); ++y) {
    const auto& b = m.block(y);
    fibers.push_back(Eigen::Map<const Eigen::VectorXcd>(b.data(), b.size()));
  }
  return KhVector(tensor_system.shape(), std::move(fibers));
}

ModuleHom TensorJoiningIso::matricize(const KhVector& v) const {
  require_same_shape(v.shape(), tensor_system.shape());
  std::vector<Eigen::MatrixXcd> blocks;
  for (std::size_t y = 0; y < pair_slot.size(); ++y)
    blocks.push_back(Eigen::Map<const Eigen::MatrixXcd>(v.fiber(y).data(), left.shape.dim(y),
                                                        right.shape.dim(y)));
  return ModuleHom(right.shape, left.shape, std::move(blocks));
}

ModuleHom TensorJoiningIso::tensor_apply(std::size_t g, const ModuleHom& m) const {
  require_same_shape(m.domain(), right.shape);
  require_same_shape(m.codomain(), left.shape);
  const auto& sigma = joint.system.action().perm(g);
  std::vector<Eigen::MatrixXcd> blocks(m.points());
  for (std::size_t y = 0; y < m.points(); ++y)
    blocks[sigma[y]] =
        left.system.unitary(g, y) * m.block(y) * right.system.unitary(g, y).transpose();
  return ModuleHom(right.shape, left.shape, std::move(blocks));
}

TensorJoiningIso tensor_joining_iso(const FiniteExtension& a, const FiniteExtension& b) {
  auto joining = rel_indep_joining(a, b);
  auto left = conditional_module(a);
  auto right = conditional_module(b);
  auto joint = conditional_module(joining.extension);

  const auto& bottom = a.bottom().space();
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> at;
  for (std::size_t z = 0; z < joining.pairs.size(); ++z) at[joining.pairs[z]] = z;

  std::vector<std::vector<std::vector<std::size_t>>> pair_slot(bottom.size());
  for (std::size_t y = 0; y < bottom.size(); ++y) {
    const auto& fa = a.fibers()[y];
    const auto& fb = b.fibers()[y];
    pair_slot[y].assign(fa.size(), std::vector<std::size_t>(fb.size(), 0));
    for (std::size_t k = 0; k < fa.size(); ++k)
      for (std::size_t l = 0; l < fb.size(); ++l)
        pair_slot[y][k][l] = joint.pos_in_fiber[at.at({fa[k], fb[l]})];
  }

  std::vector<Eigen::Index> dims;
  for (std::size_t y = 0; y < bottom.size(); ++y)
    dims.push_back(left.shape.dim(y) * right.shape.dim(y));
  KhShape tshape(bottom.base(), std::move(dims));
  std::vector<std::vector<Eigen::MatrixXcd>> unitaries;
  for (std::size_t g = 0; g < a.bottom().generator_count(); ++g) {
    std::vector<Eigen::MatrixXcd> per_point;
    for (std::size_t y = 0; y < bottom.size(); ++y)
      per_point.push_back(Eigen::kroneckerProduct(right.system.unitary(g, y),
                                                  left.system.unitary(g, y))
                              .eval());
    unitaries.push_back(std::move(per_point));
  }
  GSystem tensor_system(a.bottom().base_action(), std::move(tshape), std::move(unitaries));

  return TensorJoiningIso{std::move(left),   std::move(right),         std::move(joining),
                          std::move(joint),  std::move(tensor_system), std::move(pair_slot)};
}

}  // namespace kh
