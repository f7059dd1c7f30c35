#pragma once

#include <array>
#include <complex>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hamsys {

using Complex = std::complex<double>;

/// Input rejected before any numerics ran (bad file, invariant violation).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical stage failed; `stage()` names the pipeline step.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

inline constexpr double kPsdSlack = 1e-12;
inline constexpr double kZeroAtomTol = 1e-12;
inline constexpr double kDetTol = 1e-10;

/// One constant piece of a Hamiltonian: h = [[h11, h12], [h12, h22]] on [r0, r1].
struct Segment {
  double r0 = 0.0;
  double r1 = 0.0;
  double h11 = 0.0;
  double h12 = 0.0;
  double h22 = 0.0;

  double length() const { return r1 - r0; }
  double trace() const { return h11 + h22; }
  double det() const { return h11 * h22 - h12 * h12; }
};

/// Piecewise-constant nonnegative 2x2 Hamiltonian on [0, ell].
///
/// Construction validates tiling, symmetry/nonnegativity and regularity; the
/// object is immutable afterwards.
class Hamiltonian {
 public:
  explicit Hamiltonian(std::vector<Segment> segments);

  /// H0 = identity on [0, ell], optionally split into equal pieces.
  static Hamiltonian free(double ell, int pieces = 1);
  /// diag(values[i], 1/values[i]) on consecutive intervals of the given lengths.
  static Hamiltonian diagonal(const std::vector<double>& lengths, const std::vector<double>& weights);

  double ell() const { return segments_.back().r1; }
  const std::vector<Segment>& segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }

  /// Index of the segment containing r (right-continuous, last segment closed).
  std::size_t segment_at(double r) const;
  /// Restriction to [r, ell], shifted to start at 0.
  Hamiltonian shifted(double r) const;
  /// Restriction to [0, r].
  Hamiltonian truncated(double r) const;

  /// Integrals of the entries over [0, r].
  std::array<double, 3> integrals(double r) const;

  std::vector<double> boundaries() const;

 private:
  std::vector<Segment> segments_;
};

/// Point mass of a spectral measure.
struct Atom {
  double t = 0.0;
  double mass = 0.0;
};

/// Discrete principal spectral measure restricted to [-window, window],
/// plus the Herglotz constants of the Weyl function.
class SpectralMeasure {
 public:
  SpectralMeasure(std::vector<Atom> atoms, double window, double b = 0.0, double c = 0.0);

  const std::vector<Atom>& atoms() const { return atoms_; }
  double window() const { return window_; }
  double b() const { return b_; }
  double c() const { return c_; }
  std::size_t zero_index() const { return zero_index_; }
  double zero_mass() const { return atoms_[zero_index_].mass; }

  SpectralMeasure with_constants(double b, double c) const;
  /// Copy without the atom at index i (used for frame-bound comparisons).
  SpectralMeasure without(std::size_t i) const;

 private:
  std::vector<Atom> atoms_;
  double window_ = 0.0;
  double b_ = 0.0;
  double c_ = 0.0;
  std::size_t zero_index_ = 0;
};

/// Sort and merge atoms closer than 1e-10 (1 + |t|), summing masses.
std::vector<Atom> merge_atoms(std::vector<Atom> atoms);

struct GridConfig {
  int pw_truncation = 256;
  double measure_window = 200.0;
  std::vector<double> s_grid;  // empty: s_samples uniform points on (0, a]
  int s_samples = 129;
  int r_samples = 257;
  double zero_scan_step = 0.0;  // 0: choose from the exponential type

  /// Uniform grid of `samples` points on (0, a] (s = 0 is implicit: zeta(0) = 0).
  static std::vector<double> uniform_s_grid(double a, int samples);
  void validate() const;
};

/// Samples (r, t(r)) of the monotone time change produced by normalize_trace.
struct TimeChange {
  std::vector<double> r;
  std::vector<double> t;
};

struct NormalizedHamiltonian {
  Hamiltonian hamiltonian;
  TimeChange time_change;
};

/// Reparametrize so that trace H = 2 on every segment.
NormalizedHamiltonian normalize_trace(const Hamiltonian& h);

// JSON formats (floats written with 17 significant digits).
Hamiltonian hamiltonian_from_json(const std::string& text);
std::string hamiltonian_to_json(const Hamiltonian& h);
SpectralMeasure measure_from_json(const std::string& text);
std::string measure_to_json(const SpectralMeasure& mu);

Hamiltonian load_hamiltonian(const std::filesystem::path& path);
SpectralMeasure load_measure(const std::filesystem::path& path);
void save_text(const std::filesystem::path& path, const std::string& text);

}  // namespace hamsys
