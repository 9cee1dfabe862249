#pragma once

#include <random>

#include "kh/measure.hpp"

namespace kh {

// Rotation by one step on n uniform atoms, generator "t".
MpSystem cyclic_rotation(std::size_t n);

FiniteExtension identity_extension(const MpSystem& sys);

// Same system over a one-atom bottom with identity generators.
FiniteExtension extension_over_point(const MpSystem& top);

// Four uniform atoms over two, pairing consecutive atoms, with an in-fiber
// swap on top of the identity below.
FiniteExtension four_two();

// Skew product on Z_n x Z_n over the rotation on Z_n:
// (y, z) -> (y + 1, z + y), both coordinates mod n.
FiniteExtension skew_torus(std::size_t n);

FiniteProbSpace random_space(std::mt19937_64& rng, std::size_t atoms,
                             const std::string& prefix = "x");

// Random extension with exact masses: the bottom permutation fixes orbit
// masses, fibers share a weight pattern along each orbit, and the top motion
// permutes only equal-weight slots.
FiniteExtension random_extension(std::mt19937_64& rng, std::size_t max_bottom = 4,
                                 std::size_t max_fiber = 3, bool second_generator = false);

// Random exact transport plan between the two measures, normalized by the
// target masses into a Markov operator.
MarkovOperator random_markov(std::mt19937_64& rng, const FiniteProbSpace& source,
                             const FiniteProbSpace& target);

}  // namespace kh
