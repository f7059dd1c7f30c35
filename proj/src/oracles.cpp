#include "hamsys/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hamsys/pwspace.hpp"
#include "hamsys/tail.hpp"

namespace hamsys {

namespace {

constexpr double kPi = std::numbers::pi;

// Theta_minus(r,t)/t and (Theta_plus(r,t) - 1)/t.
std::array<double, 2> theta_quotients(const Hamiltonian& h, double r, double t) {
  if (std::abs(t) < kZeroAtomTol) {
    const auto in = h.integrals(r);
    return {-in[0], in[1]};
  }
  const TransferMatrix m = propagate(h, r, Complex(t, 0.0));
  return {m.theta_minus().real() / t, (m.theta_plus().real() - 1.0) / t};
}

// Running integral of uniformly sampled f (>= 4 samples), cubic interpolation per cell.
std::vector<double> cumulative_integral(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double cell;
    if (i == 0)
      cell = 9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3];
    else if (i + 2 == n)
      cell = f[i - 2] - 5.0 * f[i - 1] + 19.0 * f[i] + 9.0 * f[i + 1];
    else
      cell = -f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2];
    out[i + 1] = out[i] + h / 24.0 * cell;
  }
  return out;
}

}  // namespace

Fixture free_fixture(double ell, double window) {
  if (!(ell > 0.0)) throw ValidationError("free fixture: ell must be > 0");
  const double step = kPi / ell;
  const long kmax = static_cast<long>(std::floor(window / step * (1.0 + 1e-12)));
  std::vector<Atom> atoms;
  for (long k = -kmax; k <= kmax; ++k) atoms.push_back({static_cast<double>(k) * step, step});
  return {Hamiltonian::free(ell, 2), SpectralMeasure(std::move(atoms), window, 0.0, 0.0), 0.0};
}

Hamiltonian step_fixture() { return normalize_trace(Hamiltonian::diagonal({1.0, 1.0}, {1.2, 1.0 / 1.2})).hamiltonian; }

SpectralMeasure kadec_measure(double amplitude, long kmax) {
  if (!(amplitude >= 0.0 && amplitude < 0.25)) throw ValidationError("kadec measure: amplitude must lie in [0, 1/4)");
  if (kmax < 2) throw ValidationError("kadec measure: need kmax >= 2");
  std::vector<Atom> atoms;
  for (long k = -kmax; k <= kmax; ++k) {
    const double kd = static_cast<double>(k);
    // period 3: 0, +amplitude, -amplitude
    const double d = amplitude * std::sin(2.0 * kPi * kd / 3.0) / std::sin(2.0 * kPi / 3.0);
    atoms.push_back({kd + d, 1.0});
  }
  return SpectralMeasure(std::move(atoms), static_cast<double>(kmax) + 0.5);
}

EntryErrors compare_hamiltonians(const Hamiltonian& got, const Hamiltonian& want, double margin) {
  EntryErrors e;
  const double ell = want.ell();
  double norm = 0.0;
  for (const Segment& s : got.segments()) {
    const double mid = std::min(0.5 * (s.r0 + s.r1), ell);
    const Segment& w = want.segments()[want.segment_at(mid)];
    const std::array<double, 3> d{s.h11 - w.h11, s.h12 - w.h12, s.h22 - w.h22};
    const bool inside = mid >= margin * ell && mid <= (1.0 - margin) * ell;
    for (int i = 0; i < 3; ++i) {
      e.l1[i] += std::abs(d[i]) * s.length();
      if (inside) e.sup[i] = std::max(e.sup[i], std::abs(d[i]));
    }
    norm += (std::abs(w.h11) + std::abs(w.h12) + std::abs(w.h22)) * s.length();
  }
  e.sup_max = *std::max_element(e.sup.begin(), e.sup.end());
  e.relative_l1 = (e.l1[0] + e.l1[1] + e.l1[2]) / norm;
  return e;
}

RoundTripReport roundtrip(const Hamiltonian& h, const GridConfig& cfg) {
  cfg.validate();
  Hamiltonian hn = normalize_trace(h).hamiltonian;
  SpectralMeasure mu = spectral_measure(hn, cfg.measure_window, cfg.zero_scan_step);
  const HerglotzConstants hc = herglotz_constants(hn, mu);
  const double type = exponential_type(hn, hn.ell());
  ReconstructionResult res = reconstruct(mu, hc.c, cfg, {type});
  const EntryErrors err = compare_hamiltonians(res.hamiltonian, hn);
  return {std::move(hn), std::move(mu), hc, type, std::move(res), err};
}

KernelCheck kernel_identity_check(const Hamiltonian& h, const SpectralMeasure& mu, double s, Complex w) {
  const TailModel tail = estimate_tail_model(mu, exponential_type(h, h.ell()));
  if (!(s > 0.0) || s > tail.bandwidth() * (1.0 + 1e-9))
    throw ValidationError("kernel check: s must lie in (0, a]");
  const MeasurePoints pts = measure_points(mu, tail);
  const ToeplitzInverse op(pts, s);
  const Complex wb = std::conj(w);
  Eigen::VectorXcd rhs(static_cast<Eigen::Index>(pts.x.size()));
  for (std::size_t p = 0; p < pts.x.size(); ++p) rhs[static_cast<Eigen::Index>(p)] = sinc_kernel(s, Complex(pts.x[p]), wb);
  const Eigen::VectorXcd alpha = op.alpha(rhs);

  KernelCheck out;
  out.xi = type_inverse(h, s);
  double diff = 0.0, scale = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double y = -25.0 + 50.0 * (i + 0.5) / 50.0;
    const Complex got = (sinc_kernel(s, Complex(y), wb) - op.combine(alpha, Complex(y))) / op.density();
    const Complex want = dbranges_kernel(h, out.xi, w, Complex(y));
    diff = std::max(diff, std::abs(got - want));
    scale = std::max(scale, std::abs(want));
  }
  out.residual = diff / scale;
  return out;
}

TraceCheck trace_identity_check(const Hamiltonian& h, const SpectralMeasure& mu, double r) {
  if (!(r > 0.0) || r > h.ell() * (1.0 + 1e-12)) throw ValidationError("trace check: r must lie in (0, ell]");
  TraceCheck out;
  out.r = r;
  out.lhs = h.integrals(r);
  std::array<double, 3> acc{};  // sums of mass * (x1^2, x1 x2, x2^2)
  auto add = [&](double t, double mass) {
    const auto x = theta_quotients(h, r, t);
    acc[0] += mass * x[0] * x[0];
    acc[1] += mass * x[0] * x[1];
    acc[2] += mass * x[1] * x[1];
  };
  for (const Atom& a : mu.atoms()) add(a.t, a.mass);

  // atoms beyond the window straight from the forward solver, out to 10 R
  const double x_end = 10.0 * mu.window();
  const SpectralMeasure wide = spectral_measure(h, x_end);
  std::array<double, 3> far{};
  for (const Atom& a : wide.atoms()) {
    if (std::abs(a.t) <= mu.window() * (1.0 + 1e-9)) continue;
    const auto x = theta_quotients(h, r, a.t);
    const std::array<double, 3> f{x[0] * x[0], x[0] * x[1], x[1] * x[1]};
    for (int i = 0; i < 3; ++i) acc[i] += a.mass * f[i];
    if (std::abs(a.t) > 0.5 * x_end)
      for (int i = 0; i < 3; ++i) far[i] += a.mass * f[i] * a.t * a.t;
  }
  for (int i = 0; i < 3; ++i) {
    const double rem = far[i] / (0.5 * x_end) / x_end;
    acc[i] += rem;
    out.tail_bound = std::max(out.tail_bound, std::abs(rem) / kPi);
  }
  out.rhs = {acc[0] / kPi, -acc[1] / kPi, acc[2] / kPi};
  for (int i = 0; i < 3; ++i) out.residual[i] = std::abs(out.lhs[i] - out.rhs[i]);
  return out;
}

Hamiltonian nonpw_hamiltonian(double h, int j_max) {
  if (!(h > 0.0 && h < 1.0)) throw ValidationError("h must lie in (0, 1)");
  if (j_max < 1) throw ValidationError("need at least one segment");
  std::vector<Segment> segs;
  double r = 0.0;
  for (int j = 1; j <= j_max; ++j) {
    const double r1 = r + std::pow(3.0, -j);
    if (j % 2 == 1)
      segs.push_back({r, r1, 1.0, 0.0, 1.0});
    else
      segs.push_back({r, r1, h, 0.0, 1.0 / h});
    r = r1;
  }
  return Hamiltonian(std::move(segs));
}

NonPWReport nonpw_example(double h, int k_max) {
  if (!(h > 0.0 && h < 1.0 / 9.0)) throw ValidationError("h must be < 1/9 (and > 0)");
  if (k_max < 2 || k_max > 10 || k_max % 2 != 0) throw ValidationError("kmax must be even, between 2 and 10");
  NonPWReport rep;
  rep.h = h;
  rep.j_max = k_max + 12;
  const Hamiltonian ham = nonpw_hamiltonian(h, rep.j_max);
  const auto bounds = ham.boundaries();  // 0, r_1, r_2, ...
  for (int k = 2; k <= k_max; k += 2) {
    const double lambda = kPi * std::pow(3.0, k) / 2.0;
    const TransferMatrix p = propagate(ham, bounds[static_cast<std::size_t>(k)], Complex(lambda, 0.0));
    // M_odd(lambda_k) = [[0, -1], [1, 0]] and M_even(lambda_k) = [[0, 1/h], [-h, 0]] for j <= k,
    // so each pair contributes diag(1/h, h) with sign +1
    const double e11 = std::pow(h, -k / 2), e22 = std::pow(h, k / 2);
    const Mat2 diff{p.m.a - e11, p.m.b, p.m.c, p.m.d - e22};
    rep.k_list.push_back(k);
    rep.lambda.push_back(lambda);
    rep.partial_error.push_back(diff.norm() / std::hypot(e11, e22));
    rep.observed_sign.push_back(p.m.a.real() > 0.0 ? 1 : -1);
    rep.printed_sign.push_back((k / 2) % 2 == 0 ? 1 : -1);
    rep.partial_products.push_back({p.m.a.real(), p.m.b.real(), p.m.c.real(), p.m.d.real()});

    const ScaledTransfer full = propagate_scaled(ham, ham.ell(), Complex(lambda, 0.0));
    const double e = std::hypot(std::abs(full.m.a), std::abs(full.m.c)) * std::exp(full.log_scale);
    rep.E_values.push_back(e);
    rep.ratios.push_back(e * std::pow(h, k / 2));
    rep.lambda_over.push_back(e / lambda);
    rep.tail_factor.push_back(std::exp(lambda * std::pow(3.0, -rep.j_max) / (2.0 * h)));
  }
  return rep;
}

double diag_necessary_condition(const std::function<double(double)>& w, int n, double s, int panels) {
  if (n < 1 || n > 20) throw ValidationError("n must lie in [1, 20]");
  if (!(s > 0.0)) throw ValidationError("s must be > 0");
  if (panels < 3) throw ValidationError("need at least three panels");
  const std::size_t m = static_cast<std::size_t>(panels) + 1;
  const double dt = s / panels;
  std::vector<double> phi(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double v = w(dt * static_cast<double>(i));
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("w must be positive and finite");
    phi[i] = std::log(v);
  }
  // J_n = int e^{phi}; J_k = int e^{(-1)^{n+k} phi} J_{k+1}; cumulative 4th-order rule.
  std::vector<double> inner(m, 1.0), f(m);
  for (int k = n; k >= 1; --k) {
    const double sgn = (n + k) % 2 == 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < m; ++i) f[i] = std::exp(sgn * phi[i]) * inner[i];
    inner = cumulative_integral(f, dt);
  }
  const double sgn = n % 2 == 0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < m; ++i) f[i] = std::exp(sgn * phi[i]) * inner[i] * inner[i];
  const double outer = cumulative_integral(f, dt).back();
  const double log_an = (2.0 * n + 1.0) * std::log(s) - std::log(static_cast<double>(n)) - 2.0 * std::lgamma(n + 1.0);
  return outer / std::exp(log_an);
}

double diag_necessary_condition(const std::vector<double>& w, double a, int n, double s, int panels) {
  if (w.size() < 2) throw ValidationError("w needs at least two samples");
  if (!(a > 0.0)) throw ValidationError("a must be > 0");
  if (!(s > 0.0) || s > a * (1.0 + 1e-12)) throw ValidationError("s must lie in (0, a]");
  const double step = a / static_cast<double>(w.size() - 1);
  auto interp = [&](double t) {
    const double u = std::clamp(t / step, 0.0, static_cast<double>(w.size() - 1));
    const std::size_t i = std::min(static_cast<std::size_t>(u), w.size() - 2);
    const double f = u - static_cast<double>(i);
    return (1.0 - f) * w[i] + f * w[i + 1];
  };
  return diag_necessary_condition(interp, n, s, panels);
}

}  // namespace hamsys
