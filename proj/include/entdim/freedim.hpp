#pragma once

#include <vector>

#include "entdim/measure.hpp"

namespace entdim {

struct Atom {
  double position = 0.0;
  double mass = 0.0;
};

/// Atomic part of a measure (sorted by position) and the remaining mass.
struct AtomProfile {
  std::vector<Atom> atoms;
  double continuous_mass = 0.0;
};

/// Positions closer than this are treated as one atom.
inline constexpr double kAtomMergeTolerance = 1e-12;

AtomProfile atom_profile(const Measure& mu);

/// 1 - sum of squared atom masses.
double free_dimension_single(const Measure& mu);

}  // namespace entdim
