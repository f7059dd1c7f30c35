#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hamsys/model.hpp"
#include "hamsys/pwspace.hpp"
#include "hamsys/tail.hpp"

namespace hamsys {

struct KhatZero {
  double value = 0.0;
  double tail_bound = 0.0;  // (1/pi) sum_{|t| > R} mass / |t|^3 under the tail model
};

/// (1/pi) sum_{t != 0} mass / (t (1 + t^2)), summed in +/- pairs by |t|.
KhatZero khat_zero(const SpectralMeasure& mu);

/// Everything the G-functions share: the measure, its tail model and the
/// merged point set. `type` is the exponential type a when known.
struct InverseSetup {
  SpectralMeasure mu;
  double c = 0.0;
  TailModel tail;
  MeasurePoints points;
  KhatZero khat;

  double a() const { return tail.bandwidth(); }
};

InverseSetup make_setup(const SpectralMeasure& mu, double c, std::optional<double> type = std::nullopt);

/// G_{1,s} = T_{mu,s}^{-1} (sin sx / x).
struct G1Data {
  double s = 0.0;
  std::shared_ptr<const ToeplitzInverse> op;
  Eigen::VectorXd alpha;
  Eigen::VectorXd at_points;
  double at_zero = 0.0;
  double l2_norm2 = 0.0;
  double mu_norm2 = 0.0;

  double value(double t) const;
  double derivative(double t) const;
};

G1Data compute_G1(const InverseSetup& setup, double s);
G1Data compute_G1(const InverseSetup& setup, std::shared_ptr<const ToeplitzInverse> op);

/// G_{2,a} on the point set, weighted by the point weights: atom mass times
/// G_{2,a} at atoms plus the lattice weight times the free continuation
/// (cos at - 1)/t. `at_atoms` holds the plain values at the atoms of mu.
struct G2aData {
  std::vector<double> at_atoms;
  Eigen::VectorXd weighted;
};

G2aData compute_G2a(const InverseSetup& setup, const G1Data& g1a);

/// G_{2,s}(t) = (G_{2,a}, T_{mu,s}^{-1} sinc_s(. - t))_{L2(mu)}.
struct G2sData {
  double s = 0.0;
  Eigen::VectorXd beta;
  Eigen::VectorXd at_points;
  double mu_norm2 = 0.0;
  double cross = 0.0;  // (G_{1,s}, G_{2,s})_{L2(mu)}
};

G2sData compute_G2s(const InverseSetup& setup, const G1Data& g1, const G2aData& g2a);

/// zeta(s) = G_{1,s}(0)/2 + |G_{2,s}|^2 / (2 pi)
double zeta(const G1Data& g1, const G2sData& g2);

/// One s-sample of the pipeline.
struct Slice {
  double s = 0.0;
  double zeta = 0.0;
  double g1_zero = 0.0;
  double g = 0.0;  // (1/pi)(G_1, G_2)_mu
  double norm_residual = 0.0;        // |(1/pi)|G_1|^2_mu - G_1(0)|
  double consistency_residual = 0.0; // |2 zeta - G_1(0) - |G_2|^2 / pi|
};

Slice compute_slice(const InverseSetup& setup, const G2aData& g2a, double s);

struct ReconstructionDiagnostics {
  double a = 0.0;
  double ell = 0.0;
  double density = 0.0;
  double khat = 0.0;
  double khat_tail_bound = 0.0;
  bool b_warning = false;
  std::vector<Slice> slices;
  std::vector<double> r;
  std::vector<double> tau;
  double max_norm_residual = 0.0;
  double max_consistency_residual = 0.0;
  double max_psd_projection = 0.0;
  int projected_cells = 0;
  double krein_residual = 0.0;  // max relative |tau(r) - int_0^r sqrt(det H)|
};

struct ReconstructionResult {
  Hamiltonian hamiltonian;
  ReconstructionDiagnostics diagnostics;
};

struct ReconstructOptions {
  std::optional<double> type;  // exponential type, when known
};

ReconstructionResult reconstruct(const SpectralMeasure& mu, double c, const GridConfig& cfg,
                                 const ReconstructOptions& opts = {});

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;

 private:
  std::vector<double> x_, y_, d_;
};

}  // namespace hamsys
