#pragma once

#include <vector>

#include "kh/measure.hpp"

namespace kh {

// One weighted cylinder: coeff times the indicator of the configurations
// whose symbols at offset, offset+1, ... match the pattern. An empty pattern
// is the constant function coeff.
struct CylinderTerm {
  long offset = 0;
  std::vector<int> pattern;
  Rat coeff = Rat(0);
};

using CylinderFunction = std::vector<CylinderTerm>;

struct ShiftReport {
  // correlations[n] is the pairing of the n-step shift of f against g.
  std::vector<Rat> correlations;
  // cesaro[k-1] is the window average of |correlations - mean_f * mean_g|
  // over the first k steps.
  std::vector<Rat> cesaro;
  Rat mean_f = Rat(0);
  Rat mean_g = Rat(0);
};

Rat cylinder_integral(const std::vector<Rat>& symbols, const CylinderFunction& f);

// Exact correlation sequence of two cylinder functions on the product shift
// with the given symbol distribution; everything stays rational.
ShiftReport shift_correlations(const std::vector<Rat>& symbols, const CylinderFunction& f,
                               const CylinderFunction& g, std::size_t n_max);

}  // namespace kh
