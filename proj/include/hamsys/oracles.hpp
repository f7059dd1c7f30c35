#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "hamsys/forward.hpp"
#include "hamsys/inverse.hpp"
#include "hamsys/model.hpp"

namespace hamsys {

struct Fixture {
  Hamiltonian hamiltonian;
  SpectralMeasure measure;
  double c = 0.0;
};

/// H0 = I on [0, ell] (split at ell/2), atoms pi k / ell of mass pi / ell.
Fixture free_fixture(double ell, double window = 200.0);

/// diag(1.2, 1/1.2) on [0, 1], diag(1/1.2, 1.2) on [1, 2], trace-normalized.
Hamiltonian step_fixture();

/// Unit masses at k + d_k with d_k = 0, +amplitude, -amplitude by k mod 3,
/// |k| <= kmax; window kmax + 1/2.
SpectralMeasure kadec_measure(double amplitude, long kmax);

struct EntryErrors {
  std::array<double, 3> sup{};  // h11, h12, h22 over the interior
  std::array<double, 3> l1{};
  double sup_max = 0.0;
  double relative_l1 = 0.0;  // sum of entry L1 errors / sum of entry L1 norms
};

/// Compare piecewise-constant `got` with `want` at cell midpoints; sup taken
/// over [margin * ell, (1 - margin) * ell].
EntryErrors compare_hamiltonians(const Hamiltonian& got, const Hamiltonian& want, double margin = 0.02);

struct RoundTripReport {
  Hamiltonian input;  // trace-normalized
  SpectralMeasure measure;
  HerglotzConstants herglotz;
  double type = 0.0;
  ReconstructionResult result;
  EntryErrors errors;
};

RoundTripReport roundtrip(const Hamiltonian& h, const GridConfig& cfg);

struct KernelCheck {
  double residual = 0.0;  // relative sup difference on the test grid
  double xi = 0.0;
};

/// T_{mu,s}^{-1} sinc_s(. - conj w) against k_w^{xi(s)} on 50 points of [-25, 25].
KernelCheck kernel_identity_check(const Hamiltonian& h, const SpectralMeasure& mu, double s, Complex w);

struct TraceCheck {
  double r = 0.0;
  std::array<double, 3> lhs{};  // int h11, int h12, int h22 over [0, r]
  std::array<double, 3> rhs{};
  std::array<double, 3> residual{};
  double tail_bound = 0.0;
};

/// Trace identities int_0^r h = (1/pi) pairings of Theta(r, t)/t in L2(mu);
/// atoms outside the window come from the forward solver out to 10 R.
TraceCheck trace_identity_check(const Hamiltonian& h, const SpectralMeasure& mu, double r);

struct NonPWReport {
  double h = 0.0;
  int j_max = 0;
  std::vector<int> k_list;
  std::vector<double> lambda;
  std::vector<double> partial_error;  // |P_k - diag(h^{-k/2}, h^{k/2})|_F / |.|_F
  std::vector<int> observed_sign;     // sign of P_k(1, 1)
  std::vector<int> printed_sign;      // (-1)^{k/2}
  std::vector<std::array<double, 4>> partial_products;
  std::vector<double> E_values;
  std::vector<double> ratios;        // |E| h^{k/2}
  std::vector<double> lambda_over;   // |E| / lambda
  std::vector<double> tail_factor;   // bound on the neglected segments
};

NonPWReport nonpw_example(double h, int k_max);
Hamiltonian nonpw_hamiltonian(double h, int j_max);

/// (1/a_n(s)) int_0^s e^{(-1)^n phi} (iterated integral)^2, phi = log w.
double diag_necessary_condition(const std::function<double(double)>& w, int n, double s, int panels = 4096);
/// w sampled uniformly on [0, a] (w.front() at 0, w.back() at a), linearly interpolated.
double diag_necessary_condition(const std::vector<double>& w, double a, int n, double s, int panels = 4096);

}  // namespace hamsys
