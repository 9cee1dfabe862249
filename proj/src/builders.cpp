#include "kh/builders.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "kh/errors.hpp"

namespace kh {
namespace {

std::vector<std::string> labels(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = prefix + std::to_string(i);
  return out;
}

std::vector<std::size_t> random_permutation(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

std::vector<std::vector<std::size_t>> perm_orbits(const std::vector<std::size_t>& perm) {
  std::vector<std::vector<std::size_t>> orbits;
  std::vector<char> seen(perm.size(), 0);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    std::vector<std::size_t> orbit;
    std::size_t j = i;
    while (!seen[j]) {
      seen[j] = 1;
      orbit.push_back(j);
      j = perm[j];
    }
    orbits.push_back(std::move(orbit));
  }
  return orbits;
}

}  // namespace

MpSystem cyclic_rotation(std::size_t n) {
  if (n == 0) throw Error("cyclic_rotation needs at least one atom");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = (i + 1) % n;
  return MpSystem(FiniteProbSpace::uniform(labels("a", n)), {"t"}, {std::move(perm)},
                  GroupKind::SingleGeneratorZ);
}

FiniteExtension identity_extension(const MpSystem& sys) {
  std::vector<std::size_t> id(sys.space().size());
  std::iota(id.begin(), id.end(), std::size_t{0});
  return FiniteExtension(sys, sys, std::move(id));
}

FiniteExtension extension_over_point(const MpSystem& top) {
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> perms;
  for (std::size_t g = 0; g < top.generator_count(); ++g) {
    names.push_back(top.name(g));
    perms.push_back({0});
  }
  MpSystem bottom(FiniteProbSpace({"pt"}, {Rat(1)}), std::move(names), std::move(perms),
                  top.kind());
  std::vector<std::size_t> factor(top.space().size(), 0);
  return FiniteExtension(top, std::move(bottom), std::move(factor));
}

FiniteExtension four_two() {
  MpSystem top(FiniteProbSpace::uniform(labels("x", 4)), {"t"}, {{1, 0, 3, 2}},
               GroupKind::SingleGeneratorZ);
  MpSystem bottom(FiniteProbSpace::uniform(labels("y", 2)), {"t"}, {{0, 1}},
                  GroupKind::SingleGeneratorZ);
  return FiniteExtension(std::move(top), std::move(bottom), {0, 0, 1, 1});
}

FiniteExtension skew_torus(std::size_t n) {
  if (n == 0) throw Error("skew_torus needs at least one level");
  std::vector<std::string> top_labels(n * n);
  std::vector<Rat> top_masses(n * n);
  std::vector<std::size_t> top_perm(n * n);
  std::vector<std::size_t> factor(n * n);
  const Rat cell(1, static_cast<unsigned long>(n) * static_cast<unsigned long>(n));
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t z = 0; z < n; ++z) {
      const std::size_t x = y * n + z;
      top_labels[x] = "x" + std::to_string(y) + "_" + std::to_string(z);
      top_masses[x] = cell;
      top_perm[x] = ((y + 1) % n) * n + (z + y) % n;
      factor[x] = y;
    }
  }
  std::vector<std::size_t> bottom_perm(n);
  for (std::size_t y = 0; y < n; ++y) bottom_perm[y] = (y + 1) % n;
  MpSystem top(FiniteProbSpace(std::move(top_labels), std::move(top_masses)), {"t"},
               {std::move(top_perm)}, GroupKind::SingleGeneratorZ);
  MpSystem bottom(FiniteProbSpace::uniform(labels("y", n)), {"t"}, {std::move(bottom_perm)},
                  GroupKind::SingleGeneratorZ);
  return FiniteExtension(std::move(top), std::move(bottom), std::move(factor));
}

FiniteProbSpace random_space(std::mt19937_64& rng, std::size_t atoms,
                             const std::string& prefix) {
  if (atoms == 0) throw Error("random_space needs at least one atom");
  std::uniform_int_distribution<int> weight(1, 9);
  std::vector<Rat> w(atoms);
  Rat total(0);
  for (auto& v : w) {
    v = Rat(weight(rng));
    total += v;
  }
  for (auto& v : w) v /= total;
  return FiniteProbSpace(labels(prefix, atoms), std::move(w));
}

FiniteExtension random_extension(std::mt19937_64& rng, std::size_t max_bottom,
                                 std::size_t max_fiber, bool second_generator) {
  std::uniform_int_distribution<std::size_t> nb_dist(1, max_bottom);
  std::uniform_int_distribution<std::size_t> fib_dist(1, max_fiber);
  std::uniform_int_distribution<int> weight(1, 9);

  const std::size_t nb = nb_dist(rng);
  std::vector<std::size_t> sigma = random_permutation(rng, nb);
  const auto orbits = perm_orbits(sigma);

  // One mass weight and one fiber layout per bottom orbit.
  std::vector<Rat> bottom_weight(nb);
  std::vector<std::size_t> fiber_size(nb);
  std::vector<std::vector<int>> slot_weight(nb);
  for (const auto& orbit : orbits) {
    const Rat w(weight(rng));
    const std::size_t k = fib_dist(rng);
    std::vector<int> slots(k);
    for (auto& s : slots) s = weight(rng);
    for (std::size_t y : orbit) {
      bottom_weight[y] = w;
      fiber_size[y] = k;
      slot_weight[y] = slots;
    }
  }

  Rat bottom_total(0);
  for (const Rat& w : bottom_weight) bottom_total += w;
  std::vector<Rat> bottom_masses(nb);
  for (std::size_t y = 0; y < nb; ++y) bottom_masses[y] = bottom_weight[y] / bottom_total;
  FiniteProbSpace bottom_space(labels("y", nb), std::move(bottom_masses));

  // Top atoms ordered by bottom atom, then slot.
  std::vector<std::size_t> first_top(nb + 1, 0);
  for (std::size_t y = 0; y < nb; ++y) first_top[y + 1] = first_top[y] + fiber_size[y];
  const std::size_t nt = first_top[nb];

  std::vector<std::string> top_labels(nt);
  std::vector<Rat> top_masses(nt);
  std::vector<std::size_t> factor(nt);
  for (std::size_t y = 0; y < nb; ++y) {
    Rat slot_total(0);
    for (int s : slot_weight[y]) slot_total += Rat(s);
    for (std::size_t i = 0; i < fiber_size[y]; ++i) {
      const std::size_t x = first_top[y] + i;
      top_labels[x] = "x" + std::to_string(y) + "_" + std::to_string(i);
      top_masses[x] = bottom_space.mass(y) * Rat(slot_weight[y][i]) / slot_total;
      factor[x] = y;
    }
  }

  // The top motion over y -> sigma(y) may permute slots, but only within
  // groups of equal slot weight so that masses are preserved exactly.
  std::vector<std::size_t> top_perm(nt);
  for (std::size_t y = 0; y < nb; ++y) {
    const std::size_t k = fiber_size[y];
    std::vector<std::size_t> tau(k);
    std::iota(tau.begin(), tau.end(), std::size_t{0});
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return slot_weight[y][a] < slot_weight[y][b];
    });
    std::size_t start = 0;
    while (start < k) {
      std::size_t end = start + 1;
      while (end < k && slot_weight[y][order[end]] == slot_weight[y][order[start]]) ++end;
      std::vector<std::size_t> group(order.begin() + start, order.begin() + end);
      std::vector<std::size_t> image = group;
      std::shuffle(image.begin(), image.end(), rng);
      for (std::size_t j = 0; j < group.size(); ++j) tau[group[j]] = image[j];
      start = end;
    }
    for (std::size_t i = 0; i < k; ++i) top_perm[first_top[y] + i] = first_top[sigma[y]] + tau[i];
  }

  std::vector<std::string> names{"t"};
  std::vector<std::vector<std::size_t>> top_perms{top_perm};
  std::vector<std::vector<std::size_t>> bottom_perms{sigma};
  GroupKind kind = GroupKind::SingleGeneratorZ;
  if (second_generator) {
    std::vector<std::size_t> top2(nt);
    std::vector<std::size_t> bot2(nb);
    for (std::size_t x = 0; x < nt; ++x) top2[x] = top_perm[top_perm[x]];
    for (std::size_t y = 0; y < nb; ++y) bot2[y] = sigma[sigma[y]];
    names.push_back("u");
    top_perms.push_back(std::move(top2));
    bottom_perms.push_back(std::move(bot2));
    kind = GroupKind::FreeOnGenerators;
  }

  MpSystem top(FiniteProbSpace(std::move(top_labels), std::move(top_masses)), names,
               std::move(top_perms), kind);
  MpSystem bottom(std::move(bottom_space), names, std::move(bottom_perms), kind);
  return FiniteExtension(std::move(top), std::move(bottom), std::move(factor));
}

MarkovOperator random_markov(std::mt19937_64& rng, const FiniteProbSpace& source,
                             const FiniteProbSpace& target) {
  const std::size_t ns = source.size();
  const std::size_t nt = target.size();

  // Exact transport plan with row marginals = target and column marginals =
  // source, built greedily over shuffled row and column orders.
  std::vector<std::vector<Rat>> plan(nt, std::vector<Rat>(ns, Rat(0)));
  std::vector<Rat> row_left(nt);
  std::vector<Rat> col_left(ns);
  for (std::size_t t = 0; t < nt; ++t) row_left[t] = target.mass(t);
  for (std::size_t s = 0; s < ns; ++s) col_left[s] = source.mass(s);
  const auto row_order = random_permutation(rng, nt);
  const auto col_order = random_permutation(rng, ns);
  std::size_t ci = 0;
  for (std::size_t t : row_order) {
    while (row_left[t] > 0) {
      while (ci < ns && col_left[col_order[ci]] == 0) ++ci;
      if (ci == ns) throw Error("transport plan ran out of column mass");
      const std::size_t s = col_order[ci];
      const Rat take = std::min(row_left[t], col_left[s]);
      plan[t][s] += take;
      row_left[t] -= take;
      col_left[s] -= take;
    }
  }

  // Mix with the product plan; both have the required marginals, so any
  // rational convex combination does too.
  std::uniform_int_distribution<int> ten(1, 9);
  const Rat lambda(ten(rng), 10);
  std::vector<std::vector<Rat>> entries(nt, std::vector<Rat>(ns, Rat(0)));
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t s = 0; s < ns; ++s) {
      const Rat mixed =
          lambda * plan[t][s] + (Rat(1) - lambda) * target.mass(t) * source.mass(s);
      entries[t][s] = mixed / target.mass(t);
    }
  }
  return MarkovOperator(source, target, std::move(entries));
}

}  // namespace kh
