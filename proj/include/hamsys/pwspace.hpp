#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hamsys/model.hpp"
#include "hamsys/tail.hpp"

namespace hamsys {

/// Reproducing kernel of PW_s: sin(s(x - t)) / (pi (x - t)).
double sinc_kernel(double s, double x, double t);
Complex sinc_kernel(double s, Complex x, Complex t);
/// d/dt of sinc_kernel(s, x, t).
double sinc_kernel_dt(double s, double x, double t);

/// Orthonormal sampling basis phi_k(x) = sqrt(pi/s) sinc_s(x - pi k / s), |k| <= N.
struct PWBasis {
  double s = 1.0;
  int n = 8;

  PWBasis(double s, int n);
  int size() const { return 2 * n + 1; }
  double node(int index) const;  // index in [0, size())
  double phi(int index, double x) const;
  Complex phi(int index, Complex x) const;
  double dphi(int index, double x) const;  // d/dx
};

/// Coefficients of sinc_s(. - t) in the basis: sqrt(pi/s) sinc_s(t_k - t).
Eigen::VectorXd kernel_coefficients(const PWBasis& basis, double t);
Eigen::VectorXcd kernel_coefficients(const PWBasis& basis, Complex t);

double evaluate_pw(const Eigen::VectorXd& coeffs, const PWBasis& basis, double x);
Complex evaluate_pw(const Eigen::VectorXcd& coeffs, const PWBasis& basis, Complex x);

/// Point set carrying the measure minus its tail-model lattice inside the
/// window. On PW_s (s <= tail bandwidth) the Toeplitz form is
///   (T f, f) = density |f|^2_{L2} + sum_p weight_p |f(x_p)|^2.
struct MeasurePoints {
  std::vector<double> x;
  std::vector<double> weight;
  std::vector<double> atom_mass;       // 0 where no atom sits
  std::vector<double> lattice_weight;  // -density * spacing on lattice points, else 0
  double density = 1.0;
};

MeasurePoints measure_points(const SpectralMeasure& mu, const TailModel& tail);

/// Truncated Toeplitz operator T_{mu,s} as a Gram matrix on the sinc basis.
struct PWOperator {
  double s = 1.0;
  PWBasis basis;
  TailModel tail;
  Eigen::MatrixXd gram;
  Eigen::LLT<Eigen::MatrixXd> factor;
  double condition = 0.0;  // lambda_max / lambda_min
};

PWOperator build_operator(const SpectralMeasure& mu, double s, int n,
                          std::optional<TailModel> tail = std::nullopt);

struct SolveResult {
  Eigen::VectorXd x;
  double residual = 0.0;  // |gram x - rhs| / |rhs|
};

SolveResult apply_inverse(const PWOperator& op, const Eigen::VectorXd& rhs);

struct FrameBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  int n = 0;
  double s = 0.0;
};

FrameBounds frame_bounds(const PWOperator& op);
FrameBounds frame_bounds(const SpectralMeasure& mu, double s, int n,
                         std::optional<TailModel> tail = std::nullopt);

/// T_{mu,s}^{-1} without basis truncation. Under the tail model T is a
/// finite-rank perturbation of density * I, so for h in PW_s
///   T^{-1} h = (h - sum_p alpha_p sinc_s(. - x_p)) / density,
///   (density I + W S) alpha = W h(x),  S_pq = sinc_s(x_p - x_q).
class ToeplitzInverse {
 public:
  ToeplitzInverse(const MeasurePoints& points, double s);

  double s() const { return s_; }
  double density() const { return density_; }
  const MeasurePoints& points() const { return points_; }
  /// S_pq = sinc_s(x_p - x_q)
  const Eigen::MatrixXd& kernel() const { return kernel_; }

  Eigen::VectorXd alpha(const Eigen::VectorXd& h_at_points) const;
  Eigen::VectorXcd alpha(const Eigen::VectorXcd& h_at_points) const;
  /// sum_p alpha_p sinc_s(y - x_p)
  double combine(const Eigen::VectorXd& alpha, double y) const;
  Complex combine(const Eigen::VectorXcd& alpha, Complex y) const;
  /// sum_p alpha_p d/dy sinc_s(y - x_p)
  double combine_dy(const Eigen::VectorXd& alpha, double y) const;

 private:
  MeasurePoints points_;
  double s_;
  double density_;
  Eigen::MatrixXd kernel_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace hamsys
