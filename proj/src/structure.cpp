#include "kh/structure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kh/errors.hpp"
#include "kh/homs.hpp"
#include "kh/spectral.hpp"

namespace kh {
namespace {

using Partition = std::vector<std::vector<std::size_t>>;

// Global pairing sum_y m(y) <u_y|v_y>, linear in the first slot.
Complex global_inner(const FiniteProbSpace& bottom, const KhVector& u, const KhVector& v) {
  Complex out = 0.0;
  for (std::size_t y = 0; y < bottom.size(); ++y)
    out += bottom.massd(y) * v.fiber(y).dot(u.fiber(y));
  return out;
}

double global_norm(const FiniteProbSpace& bottom, const KhVector& u) {
  return std::sqrt(std::max(0.0, global_inner(bottom, u, u).real()));
}

KhVector random_global_vector(const KhShape& shape, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<Eigen::VectorXcd> fibers;
  for (std::size_t w = 0; w < shape.points(); ++w) {
    Eigen::VectorXcd v(shape.dim(w));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(g(rng), g(rng));
    fibers.push_back(std::move(v));
  }
  return KhVector(shape, std::move(fibers));
}

ModuleHom family_projection(const std::vector<KhVector>& family, const KhShape& shape) {
  ModuleHom p = ModuleHom::zero(shape, shape);
  for (const auto& e : family) p = p + rank_one(e, e);
  return p;
}

// Spans the range of a fiberwise projection by suborthonormal module
// generators grown from random global seeds; generators keep full support
// wherever the projection has rank left.
std::vector<KhVector> extract_family(const ModuleHom& p, const KhShape& shape,
                                     std::mt19937_64& rng, double tol) {
  std::vector<Eigen::Index> target(shape.points());
  Eigen::Index total = 0;
  for (std::size_t w = 0; w < shape.points(); ++w) {
    target[w] = static_cast<Eigen::Index>(std::lround(p.block(w).trace().real()));
    total += target[w];
  }
  std::vector<KhVector> family;
  if (total == 0) return family;
  Eigen::Index covered = 0;
  const int max_attempts = static_cast<int>(8 + 4 * total);
  for (int attempt = 0; attempt < max_attempts && covered < total; ++attempt) {
    auto seed = apply(p, random_global_vector(shape, rng));
    auto rest = seed - project_onto(seed, family, tol);
    if (sup_norm(rest) <= 1e-7 * std::max(1.0, sup_norm(seed))) continue;
    family.push_back(normalize(rest, tol).unit);
    auto dims = dimension_function(family, shape, tol);
    covered = 0;
    for (std::size_t w = 0; w < shape.points(); ++w)
      covered += static_cast<Eigen::Index>(std::lround(dims[w].real()));
  }
  return family;
}

Partition normalized_partition(Partition p) {
  for (auto& cls : p) std::sort(cls.begin(), cls.end());
  std::sort(p.begin(), p.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return p;
}

// Orbits of the atom set under all generator permutations together.
std::vector<std::vector<std::size_t>> group_orbits(const MpSystem& sys) {
  const std::size_t n = sys.space().size();
  std::vector<std::size_t> root(n);
  std::iota(root.begin(), root.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  for (std::size_t g = 0; g < sys.generator_count(); ++g)
    for (std::size_t x = 0; x < n; ++x) root[find(x)] = find(sys.perm(g)[x]);
  std::map<std::size_t, std::vector<std::size_t>> buckets;
  for (std::size_t x = 0; x < n; ++x) buckets[find(x)].push_back(x);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [k, v] : buckets) out.push_back(std::move(v));
  return out;
}

// Conditional expectation onto the invariant atoms: weighted orbit averages.
Eigen::VectorXcd invariant_part(const MpSystem& sys, const Eigen::VectorXcd& u) {
  Eigen::VectorXcd out(u.size());
  for (const auto& orbit : group_orbits(sys)) {
    Complex num = 0.0;
    double den = 0.0;
    for (std::size_t z : orbit) {
      num += sys.space().massd(z) * u(static_cast<Eigen::Index>(z));
      den += sys.space().massd(z);
    }
    const Complex avg = num / den;
    for (std::size_t z : orbit) out(static_cast<Eigen::Index>(z)) = avg;
  }
  return out;
}

Complex mass_inner(const FiniteProbSpace& space, const Eigen::VectorXcd& u,
                   const Eigen::VectorXcd& v) {
  Complex out = 0.0;
  for (std::size_t z = 0; z < space.size(); ++z)
    out += space.massd(z) * u(static_cast<Eigen::Index>(z)) *
           std::conj(v(static_cast<Eigen::Index>(z)));
  return out;
}

}  // namespace

KroneckerReport kronecker_subspace(const FiniteExtension& ext, std::uint64_t seed, double tol) {
  auto cm = conditional_module(ext);
  const auto& shape = cm.shape;
  const auto& sys = cm.system;
  const std::size_t points = shape.points();

  Eigen::Index max_dim = 0;
  for (std::size_t w = 0; w < points; ++w) max_dim = std::max(max_dim, shape.dim(w));

  // Route one: the span of the ranges of a basis of intertwiners.
  auto homs = intertwiner_basis(sys, tol);
  const auto units = standard_basis(shape);
  std::vector<KhVector> columns;
  for (const auto& b : homs)
    for (const auto& e : units) columns.push_back(apply(b, e));
  auto ds_basis = gram_schmidt(columns, tol);

  // Route two: minimal invariant families from a generic positive
  // intertwiner, retried on a fresh seed when two level functions nearly
  // collide.
  std::vector<std::vector<KhVector>> families;
  std::vector<ModuleHom> projections;
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt));
    std::normal_distribution<double> g;
    ModuleHom a = ModuleHom::zero(shape, shape);
    for (const auto& b : homs) a = a + Complex(g(rng), g(rng)) * b;
    ModuleHom h = Complex(0.5, 0.0) * (a + adjoint(a));
    const double shift = 2.0 * sup_op_norm(h) + 1.0;
    h = h + Complex(shift, 0.0) * ModuleHom::identity(shape);

    auto es = equivariant_spectral(sys, h, static_cast<int>(max_dim) + 2, tol);
    const auto& dec = es.decomposition;

    double min_gap = shift;
    for (std::size_t w = 0; w < points; ++w) {
      for (std::size_t j = 0; j + 1 < dec.lambdas.size(); ++j) {
        const double a0 = dec.lambdas[j][w].real();
        const double a1 = dec.lambdas[j + 1][w].real();
        if (a0 > 0.0 && a1 > 0.0) min_gap = std::min(min_gap, a0 - a1);
      }
    }

    families.clear();
    projections.clear();
    for (std::size_t j = 0; j < dec.lambdas.size(); ++j) {
      for (const auto* side : {&dec.pos_projections[j], &dec.neg_projections[j]}) {
        if (sup_hs_norm(*side) <= tol) continue;
        auto fam = extract_family(*side, shape, rng, tol);
        if (!fam.empty()) {
          families.push_back(std::move(fam));
          projections.push_back(*side);
        }
      }
    }
    if (min_gap > 1e-6 * shift) break;
  }

  double family_gap = 0.0;
  for (std::size_t i = 0; i < families.size(); ++i)
    family_gap = std::max(
        family_gap, sup_hs_norm(projections[i] - family_projection(families[i], shape)));

  ModuleHom route1 = family_projection(ds_basis, shape);
  ModuleHom route4 = ModuleHom::zero(shape, shape);
  for (const auto& fam : families) route4 = route4 + family_projection(fam, shape);
  const double char_gap = sup_hs_norm(route1 - route4);

  // Invariance of the summed squares of each family under the base motion.
  double sons_residual = 0.0;
  for (const auto& fam : families) {
    StoneElement s = StoneElement::zero(shape.base());
    for (const auto& e : fam) s = s + inner_product(e, e);
    for (std::size_t g = 0; g < sys.action().generator_count(); ++g) {
      auto moved = s.permuted(sys.action().perm(g));
      sons_residual = std::max(sons_residual, (moved - s).sup_norm());
    }
  }

  // Residual of the standard basis against the discrete span, and the
  // fullness verdict from the dimension function.
  double wm_norm = 0.0;
  for (const auto& e : units)
    wm_norm = std::max(wm_norm, sup_norm(e - project_onto(e, ds_basis, tol)));
  auto dims = dimension_function(ds_basis, shape, tol);
  bool is_full = true;
  for (std::size_t w = 0; w < points; ++w)
    if (std::lround(dims[w].real()) != shape.dim(w)) is_full = false;

  std::vector<std::pair<Eigen::Index, std::size_t>> rank_histogram;
  for (const auto& comp : homogeneous_components(ds_basis, shape, tol))
    if (comp.rank > 0) rank_histogram.emplace_back(comp.rank, comp.where.count());

  // The factor: top atoms identified when every spanning function (and the
  // bottom fiber) agrees. The span is a module, so fibers always refine.
  const auto& top = ext.top().space();
  const std::size_t n = top.size();
  std::vector<Eigen::VectorXcd> values;
  for (const auto& e : ds_basis) values.push_back(cm.to_function(e));
  std::vector<std::size_t> root(n);
  std::iota(root.begin(), root.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  const double sep = 1e-6;
  for (std::size_t x1 = 0; x1 < n; ++x1) {
    for (std::size_t x2 = x1 + 1; x2 < n; ++x2) {
      if (ext.factor()[x1] != ext.factor()[x2]) continue;
      bool same = true;
      for (const auto& v : values)
        if (std::abs(v(static_cast<Eigen::Index>(x1)) - v(static_cast<Eigen::Index>(x2))) > sep)
          same = false;
      if (same) root[find(x1)] = find(x2);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> buckets;
  for (std::size_t x = 0; x < n; ++x) buckets[find(x)].push_back(x);
  Partition partition;
  for (auto& [k, v] : buckets) partition.push_back(std::move(v));
  partition = normalized_partition(std::move(partition));

  const std::size_t classes = partition.size();
  std::vector<std::size_t> class_of(n);
  for (std::size_t c = 0; c < classes; ++c)
    for (std::size_t x : partition[c]) class_of[x] = c;

  std::vector<std::string> labels(classes);
  std::vector<Rat> masses(classes, Rat(0));
  std::vector<std::size_t> kfactor(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    labels[c] = "c" + std::to_string(c);
    for (std::size_t x : partition[c]) masses[c] += top.mass(x);
    kfactor[c] = ext.factor()[partition[c].front()];
  }
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> perms;
  for (std::size_t g = 0; g < ext.top().generator_count(); ++g) {
    std::vector<std::size_t> perm(classes);
    for (std::size_t c = 0; c < classes; ++c) {
      perm[c] = class_of[ext.top().perm(g)[partition[c].front()]];
      for (std::size_t x : partition[c])
        if (class_of[ext.top().perm(g)[x]] != perm[c])
          throw Error("kronecker_subspace: the level set partition is not invariant");
    }
    names.push_back(ext.top().name(g));
    perms.push_back(std::move(perm));
  }
  MpSystem kro(FiniteProbSpace(std::move(labels), std::move(masses)), std::move(names),
               std::move(perms), ext.top().kind());

  std::size_t rank_one = 0;
  for (const auto& fam : families)
    if (fam.size() == 1) ++rank_one;

  return KroneckerReport{std::move(cm),
                         std::move(ds_basis),
                         std::move(families),
                         std::move(rank_histogram),
                         partition,
                         FiniteExtension(kro, ext.bottom(), std::move(kfactor)),
                         FiniteExtension(ext.top(), std::move(kro), std::move(class_of)),
                         is_full,
                         rank_one,
                         char_gap,
                         family_gap,
                         sons_residual,
                         wm_norm};
}

TowerReport furstenberg_tower(const FiniteExtension& ext, std::uint64_t seed, double tol) {
  TowerReport report;
  Partition current = normalized_partition(ext.fibers());
  report.levels.push_back(current);
  FiniteExtension working = ext;
  for (int step = 0; step < 4; ++step) {
    auto kron = kronecker_subspace(working, seed, tol);
    Partition next = normalized_partition(kron.partition);
    if (next == current) break;
    report.levels.push_back(next);
    current = std::move(next);
    working = kron.embedding;
  }
  report.stabilized_at = report.levels.size() - 1;
  report.is_full = true;
  for (const auto& cls : report.levels.back())
    if (cls.size() != 1) report.is_full = false;
  return report;
}

WeakMixingReport is_weakly_mixing(const FiniteExtension& ext, double tol) {
  auto joining = rel_indep_joining(ext, ext);
  auto jm = conditional_module(joining.extension);
  const auto& bottom = ext.bottom().space();

  auto fixed = fixed_submodule(jm.system, tol);
  auto orbits = base_orbits(ext.bottom().base_action());

  // Lifts of the bottom invariants: indicators of base orbits.
  const std::size_t atoms = joining.extension.top().space().size();
  std::vector<KhVector> lifted;
  for (const auto& orbit : orbits) {
    std::vector<bool> in_orbit(bottom.size(), false);
    for (std::size_t y : orbit) in_orbit[y] = true;
    Eigen::VectorXcd ind = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(atoms));
    for (std::size_t z = 0; z < atoms; ++z)
      if (in_orbit[joining.extension.factor()[z]]) ind(static_cast<Eigen::Index>(z)) = 1.0;
    lifted.push_back(jm.to_module(ind));
  }

  WeakMixingReport report;
  report.joint_fixed_dim = fixed.size();
  report.bottom_fixed_dim = orbits.size();
  report.weakly_mixing = fixed.size() == orbits.size();

  for (const auto& v : fixed) {
    KhVector r = v;
    for (const auto& l : lifted) {
      const Complex c = global_inner(bottom, r, l) / global_inner(bottom, l, l);
      r = r - c * l;
    }
    const double res = global_norm(bottom, r);
    if (res > report.witness_residual) {
      report.witness_residual = res;
      if (res > tol) report.witness = jm.to_function(r);
    }
  }
  return report;
}

OrthogonalityReport orthogonality_criteria(const FiniteExtension& ext, const Eigen::VectorXcd& f,
                                           const std::vector<Eigen::VectorXcd>& test_family,
                                           std::size_t max_word_len, double tol) {
  const auto& top = ext.top();
  const auto& bottom = ext.bottom().space();
  const std::size_t n = top.space().size();
  if (f.size() != static_cast<Eigen::Index>(n))
    throw ShapeMismatch("orthogonality_criteria: function length");

  auto kron = kronecker_subspace(ext);
  auto iso = tensor_joining_iso(ext, ext);
  const auto& joint = iso.joining.extension.top();

  OrthogonalityReport report;
  const double fnorm = std::sqrt(std::abs(mass_inner(top.space(), f, f).real()));
  const double s = std::max(1.0, fnorm);

  // (a) projection of f onto the discrete span.
  auto vf = kron.module.to_module(f);
  report.a_span_residual = global_norm(bottom, project_onto(vf, kron.ds_basis, tol));

  // The tensor square of f as a function on the joining atoms.
  const std::size_t atoms = joint.space().size();
  Eigen::VectorXcd u(static_cast<Eigen::Index>(atoms));
  for (std::size_t z = 0; z < atoms; ++z) {
    const auto [k, l] = iso.joining.pairs[z];
    u(static_cast<Eigen::Index>(z)) =
        f(static_cast<Eigen::Index>(k)) * std::conj(f(static_cast<Eigen::Index>(l)));
  }

  // (b), (d): invariant part by exact orbit averaging on the joining.
  auto pu = invariant_part(joint, u);
  report.b_pairing = std::abs(mass_inner(joint.space(), pu, u));
  report.d_norm = std::sqrt(std::abs(mass_inner(joint.space(), pu, pu).real()));

  // (c): pairings against a module-route basis of the joint invariants.
  auto mu = iso.joint.to_module(u);
  for (const auto& b : fixed_submodule(iso.joint.system, tol)) {
    const double bn = global_norm(bottom, b);
    if (bn <= tol) continue;
    report.c_max_pairing =
        std::max(report.c_max_pairing, std::abs(global_inner(bottom, mu, b)) / bn);
  }

  // (e): word search over conditioned correlations against the test family.
  std::vector<Eigen::VectorXcd> family = test_family;
  if (family.empty())
    for (std::size_t x = 0; x < n; ++x) {
      Eigen::VectorXcd ind = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
      ind(static_cast<Eigen::Index>(x)) = 1.0;
      family.push_back(std::move(ind));
    }
  auto score = [&](const Eigen::VectorXcd& tf) {
    double best = 0.0;
    for (const auto& g : family) {
      Eigen::VectorXcd prod(tf.size());
      for (Eigen::Index i = 0; i < tf.size(); ++i) prod(i) = tf(i) * std::conj(g(i));
      auto cond = conditional_expectation(ext, prod);
      double norm2 = 0.0;
      for (std::size_t y = 0; y < bottom.size(); ++y)
        norm2 += bottom.massd(y) * std::norm(cond(static_cast<Eigen::Index>(y)));
      best = std::max(best, std::sqrt(norm2));
    }
    return best;
  };
  // Breadth-first sweep of group words up to the length bound.
  std::vector<Eigen::VectorXcd> frontier{f};
  report.e_infimum = score(f);
  for (std::size_t len = 1; len <= max_word_len; ++len) {
    std::vector<Eigen::VectorXcd> next;
    for (const auto& h : frontier) {
      for (std::size_t g = 0; g < top.generator_count(); ++g) {
        for (bool inv : {false, true}) {
          auto moved = top.koopman(g, h, inv);
          report.e_infimum = std::min(report.e_infimum, score(moved));
          next.push_back(std::move(moved));
        }
      }
    }
    frontier = std::move(next);
  }

  const bool oa = report.a_span_residual <= tol * s;
  const bool ob = report.b_pairing <= tol * s * s * s * s;
  const bool oc = report.c_max_pairing <= tol * s * s;
  const bool od = report.d_norm <= tol * s * s;
  report.orthogonal = oa;
  report.agree = (oa == ob) && (ob == oc) && (oc == od);
  return report;
}

FolnerCurve folner_diagnostic(const FiniteExtension& ext, const Eigen::VectorXcd& f,
                              const Eigen::VectorXcd& g, std::size_t n_max) {
  if (ext.top().kind() != GroupKind::SingleGeneratorZ || ext.top().generator_count() != 1)
    throw NotSingleGenerator("folner_diagnostic: needs a single generator acting as Z");
  const auto& bottom = ext.bottom().space();
  if (n_max == 0) throw DomainError("folner_diagnostic: empty window");

  FolnerCurve out;
  out.curve.resize(n_max);
  Eigen::VectorXcd h = f;
  double acc = 0.0;
  for (std::size_t k = 1; k <= n_max; ++k) {
    Eigen::VectorXcd prod(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i) prod(i) = h(i) * std::conj(g(i));
    auto cond = conditional_expectation(ext, prod);
    double norm2 = 0.0;
    for (std::size_t y = 0; y < bottom.size(); ++y)
      norm2 += bottom.massd(y) * std::norm(cond(static_cast<Eigen::Index>(y)));
    acc += norm2;
    out.curve[k - 1] = acc / static_cast<double>(k);
    h = ext.top().koopman(0, h);
  }

  // Exact limit on the relatively independent self joining.
  auto joining = rel_indep_joining(ext, ext);
  const auto& joint = joining.extension.top();
  const std::size_t atoms = joint.space().size();
  Eigen::VectorXcd u(static_cast<Eigen::Index>(atoms));
  Eigen::VectorXcd v(static_cast<Eigen::Index>(atoms));
  for (std::size_t z = 0; z < atoms; ++z) {
    const auto [k, l] = joining.pairs[z];
    u(static_cast<Eigen::Index>(z)) =
        f(static_cast<Eigen::Index>(k)) * std::conj(f(static_cast<Eigen::Index>(l)));
    v(static_cast<Eigen::Index>(z)) =
        g(static_cast<Eigen::Index>(k)) * std::conj(g(static_cast<Eigen::Index>(l)));
  }
  auto pu = invariant_part(joint, u);
  out.limit = mass_inner(joint.space(), pu, v).real();

  out.period = 1;
  std::vector<char> visited(atoms, 0);
  for (std::size_t z0 = 0; z0 < atoms; ++z0) {
    if (visited[z0]) continue;
    std::size_t len = 0;
    std::size_t z = z0;
    do {
      visited[z] = 1;
      z = joint.perm(0)[z];
      ++len;
    } while (z != z0);
    out.period = std::lcm(out.period, len);
  }
  return out;
}

}  // namespace kh
