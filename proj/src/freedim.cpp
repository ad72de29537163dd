#include "entdim/freedim.hpp"

#include <algorithm>

namespace entdim {

namespace {

void collect(const Measure& mu, double weight, const std::vector<const MapSpec*>& chain, AtomProfile& out) {
  if (weight <= 0.0) return;
  if (const auto* at = mu.as<Atomic>()) {
    for (std::size_t i = 0; i < at->positions.size(); ++i) {
      if (at->weights[i] <= 0.0) continue;
      double x = at->positions[i];
      for (auto it = chain.rbegin(); it != chain.rend(); ++it) x = (**it)(x);
      out.atoms.push_back({x, weight * at->weights[i]});
    }
  } else if (const auto* mix = mu.as<Mixture>()) {
    for (const auto& c : mix->components) collect(*c.measure, weight * c.weight, chain, out);
  } else if (const auto* pf = mu.as<LipschitzPushforward>()) {
    auto inner = chain;
    inner.push_back(&pf->map);
    collect(*pf->base, weight, inner, out);
  } else {
    // Grid densities and Bernoulli convolutions have no atoms, and bi-Lipschitz
    // maps cannot create any.
    out.continuous_mass += weight;
  }
}

}  // namespace

AtomProfile atom_profile(const Measure& mu) {
  AtomProfile raw;
  collect(mu, 1.0, {}, raw);
  std::sort(raw.atoms.begin(), raw.atoms.end(), [](const Atom& a, const Atom& b) { return a.position < b.position; });
  AtomProfile out;
  out.continuous_mass = raw.continuous_mass;
  for (const auto& a : raw.atoms) {
    if (!out.atoms.empty() && a.position - out.atoms.back().position <= kAtomMergeTolerance)
      out.atoms.back().mass += a.mass;
    else
      out.atoms.push_back(a);
  }
  return out;
}

double free_dimension_single(const Measure& mu) {
  double s = 0.0;
  for (const auto& a : atom_profile(mu).atoms) s += a.mass * a.mass;
  return 1.0 - s;
}

}  // namespace entdim
