#include "hamsys/tail.hpp"

#include <cmath>
#include <numbers>

namespace hamsys {

double TailModel::bandwidth() const { return std::numbers::pi / spacing; }

long TailModel::last_inner_index() const {
  return static_cast<long>(std::floor(window / spacing * (1.0 + 1e-12)));
}

TailModel estimate_tail_model(const SpectralMeasure& mu, std::optional<double> type) {
  const auto& atoms = mu.atoms();
  TailModel m;
  m.window = mu.window();
  if (type) {
    if (!(*type > 0.0)) throw ValidationError("tail model: exponential type must be > 0");
    m.spacing = std::numbers::pi / *type;
  } else {
    if (atoms.size() < 3) throw ValidationError("tail model: need at least three atoms to estimate spacing");
    m.spacing = (atoms.back().t - atoms.front().t) / static_cast<double>(atoms.size() - 1);
  }
  // Hann-tapered average over the outer half of the window, each atom
  // standing for its local spacing; exact for periodic mass patterns on a lattice.
  double num = 0.0, den = 0.0;
  const double half = 0.5 * m.window;
  for (std::size_t k = 1; k + 1 < atoms.size(); ++k) {
    const double at = std::abs(atoms[k].t);
    if (at < half || at > m.window) continue;
    const double w = std::pow(std::sin(std::numbers::pi * (at - half) / half), 2);
    num += w * atoms[k].mass;
    den += w * 0.5 * (atoms[k + 1].t - atoms[k - 1].t);
  }
  if (den > 0.0 && num > 0.0) {
    m.density = num / den;
    return m;
  }
  double sum = 0.0;
  int count = 0;
  for (const Atom& a : atoms) {
    if (std::abs(a.t) < kZeroAtomTol) continue;
    sum += a.mass;
    ++count;
  }
  if (count == 0) throw ValidationError("tail model: no atoms away from zero");
  m.density = sum / count / m.spacing;
  return m;
}

}  // namespace hamsys
