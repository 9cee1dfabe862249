#include "kh/shift.hpp"

#include <map>

#include "kh/errors.hpp"

namespace kh {
namespace {

void check_symbols(const std::vector<Rat>& symbols) {
  if (symbols.empty()) throw DomainError("shift: empty symbol distribution");
  Rat total(0);
  for (const Rat& p : symbols) {
    if (p < 0) throw DomainError("shift: negative symbol mass");
    total += p;
  }
  if (total != 1) throw DomainError("shift: symbol masses must sum to one");
}

void check_cylinders(const std::vector<Rat>& symbols, const CylinderFunction& f) {
  for (const auto& term : f)
    for (int s : term.pattern)
      if (s < 0 || static_cast<std::size_t>(s) >= symbols.size())
        throw NotCylinder("shift: pattern symbol outside the alphabet");
}

// Measure of the intersection of two shifted cylinders; the product measure
// factorizes over coordinates, so only shared constraints interact.
Rat pair_measure(const std::vector<Rat>& symbols, const CylinderTerm& a, long shift_a,
                 const CylinderTerm& b) {
  std::map<long, int> constraints;
  for (std::size_t i = 0; i < a.pattern.size(); ++i)
    constraints[a.offset + shift_a + static_cast<long>(i)] = a.pattern[i];
  Rat out(1);
  for (std::size_t i = 0; i < b.pattern.size(); ++i) {
    const long pos = b.offset + static_cast<long>(i);
    auto it = constraints.find(pos);
    if (it != constraints.end()) {
      if (it->second != b.pattern[i]) return Rat(0);
      constraints.erase(it);
    }
    out *= symbols[static_cast<std::size_t>(b.pattern[i])];
  }
  for (const auto& [pos, sym] : constraints) out *= symbols[static_cast<std::size_t>(sym)];
  return out;
}

}  // namespace

Rat cylinder_integral(const std::vector<Rat>& symbols, const CylinderFunction& f) {
  check_symbols(symbols);
  check_cylinders(symbols, f);
  Rat out(0);
  for (const auto& term : f) {
    Rat m(1);
    for (int s : term.pattern) m *= symbols[static_cast<std::size_t>(s)];
    out += term.coeff * m;
  }
  return out;
}

ShiftReport shift_correlations(const std::vector<Rat>& symbols, const CylinderFunction& f,
                               const CylinderFunction& g, std::size_t n_max) {
  check_symbols(symbols);
  check_cylinders(symbols, f);
  check_cylinders(symbols, g);

  ShiftReport report;
  report.mean_f = cylinder_integral(symbols, f);
  report.mean_g = cylinder_integral(symbols, g);

  report.correlations.reserve(n_max);
  report.cesaro.reserve(n_max);
  Rat acc(0);
  const Rat product = report.mean_f * report.mean_g;
  for (std::size_t n = 0; n < n_max; ++n) {
    Rat corr(0);
    for (const auto& a : f)
      for (const auto& b : g)
        corr += a.coeff * b.coeff * pair_measure(symbols, a, static_cast<long>(n), b);
    report.correlations.push_back(corr);
    acc += abs(corr - product);
    report.cesaro.push_back(acc / Rat(static_cast<unsigned long>(n + 1)));
  }
  return report;
}

}  // namespace kh
