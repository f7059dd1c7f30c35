#pragma once

#include <array>
#include <functional>
#include <vector>

#include "hamsys/model.hpp"
#include "hamsys/tail.hpp"

namespace hamsys {

/// 2x2 complex matrix, row-major.
struct Mat2 {
  Complex a{1.0}, b{0.0}, c{0.0}, d{1.0};

  static Mat2 identity() { return {}; }
  Complex det() const { return a * d - b * c; }
  double norm() const;  // Frobenius
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
};

/// Fundamental matrix M(r, z) of J M' = z H M, M(0) = I.
/// Columns are (theta_plus, theta_minus) and (phi_plus, phi_minus).
struct TransferMatrix {
  Mat2 m;
  double r = 0.0;
  Complex z;

  Complex theta_plus() const { return m.a; }
  Complex theta_minus() const { return m.c; }
  Complex phi_plus() const { return m.b; }
  Complex phi_minus() const { return m.d; }
  /// Hermite-Biehler function E = theta_plus + i theta_minus.
  Complex hermite_biehler() const { return m.a + Complex(0.0, 1.0) * m.c; }
};

/// Largest |det M - 1| seen by propagate in this process (absolute, and
/// relative to 1 + |M|^2). Thread-safe.
struct DetRecord {
  double absolute = 0.0;
  double relative = 0.0;
};
DetRecord det_record();
void reset_det_record();

/// Exact exponential of one constant segment of length len.
Mat2 segment_exponential(const Segment& s, double len, Complex z);

TransferMatrix propagate(const Hamiltonian& h, double r, Complex z);

/// Same product, renormalized whenever the norm exceeds 1e100; the true
/// matrix is m * exp(log_scale).
struct ScaledTransfer {
  Mat2 m;
  double log_scale = 0.0;
};
ScaledTransfer propagate_scaled(const Hamiltonian& h, double r, Complex z);

struct ThetaDerivative {
  Complex theta_plus, theta_minus;
  Complex dtheta_plus, dtheta_minus;
};

/// Theta = first column of M and its z-derivative, propagated jointly.
ThetaDerivative theta_and_derivative(const Hamiltonian& h, double r, Complex z);

/// Krein exponential type: integral of sqrt(det H) over [0, r].
double exponential_type(const Hamiltonian& h, double r);
/// Inverse of exponential_type in r (smallest r reaching the given type).
double type_inverse(const Hamiltonian& h, double type);

/// Reproducing kernel k_w^r(z) of B(E_r).
Complex dbranges_kernel(const Hamiltonian& h, double r, Complex w, Complex z);

struct ZeroScan {
  std::vector<double> zeros;
  bool gap_warning = false;  // consecutive zeros further apart than 1.5 pi / type
  double max_gap = 0.0;
};

/// Real zeros of x -> theta_minus(ell, x) in [-window, window].
ZeroScan find_zeros(const Hamiltonian& h, double window, double step);

/// Default scan step: pi / (4 * type).
double default_zero_step(const Hamiltonian& h);

/// Throws ValidationError if H is a multiple of (0,1)(0,1)^T on the first or last segment.
void check_compatible(const Hamiltonian& h);

struct WeylValue {
  Complex z;
  Complex m;
};

WeylValue weyl_function(const Hamiltonian& h, Complex z);

struct HerglotzConstants {
  double b = 0.0;
  double c = 0.0;
  double tail = 0.0;  // estimated (1/pi) sum of mass/(1+t^2) outside the window, already applied
};

HerglotzConstants herglotz_constants(const Hamiltonian& h, const SpectralMeasure& mu);

/// Principal spectral measure on [-window, window] with b, c filled in.
/// step <= 0 picks default_zero_step.
SpectralMeasure spectral_measure(const Hamiltonian& h, double window, double step = 0.0);

/// Gauss-Legendre grid (8 points per panel) aligned with segment boundaries on [0, r].
struct QuadratureGrid {
  double r = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<std::size_t> segment;
};

QuadratureGrid quadrature_grid(const Hamiltonian& h, double r, int panels_per_segment = 4);

/// (1/sqrt(pi)) int_0^r <H X, Theta(t, conj z)> dt, X sampled on `grid`.
Complex weyl_titchmarsh(const Hamiltonian& h, const QuadratureGrid& grid,
                        const std::vector<std::array<Complex, 2>>& x, Complex z);
Complex weyl_titchmarsh(const Hamiltonian& h, double r,
                        const std::function<std::array<Complex, 2>(double)>& x, Complex z,
                        int panels_per_segment = 4);

}  // namespace hamsys
