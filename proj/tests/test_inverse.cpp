#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hamsys/forward.hpp"
#include "hamsys/inverse.hpp"

using namespace hamsys;
constexpr double pi = std::numbers::pi;

namespace {

// H0 on [0, a]: atoms pi k / a with mass pi / a
SpectralMeasure free_measure(double a, double window) {
  std::vector<Atom> atoms;
  const long k = static_cast<long>(std::floor(window * a / pi));
  for (long j = -k; j <= k; ++j) atoms.push_back({pi * j / a, pi / a});
  return SpectralMeasure(atoms, window);
}

Hamiltonian step_h() {
  return normalize_trace(Hamiltonian::diagonal({1.0, 1.0}, {1.2, 1.0 / 1.2})).hamiltonian;
}

}  // namespace

TEST_CASE("khat at zero") {
  const SpectralMeasure one({{0.0, 1.0}, {2.0, 4.0}}, 3.0);
  CHECK(khat_zero(one).value == doctest::Approx(2.0 / (5.0 * pi)).epsilon(1e-15));
  const SpectralMeasure sym({{-2.0, 4.0}, {0.0, 1.0}, {2.0, 4.0}}, 3.0);
  CHECK(std::abs(khat_zero(sym).value) < 1e-16);
  CHECK(khat_zero(free_measure(2.0, 50.0)).tail_bound > 0.0);
}

TEST_CASE("make_setup rejects a non-finite c") {
  CHECK_THROWS_AS(make_setup(free_measure(2.0, 20.0), std::nan(""), 2.0), ValidationError);
}

TEST_CASE("free system: G1 is sin(sx)/x") {
  const double a = 2.0;
  const InverseSetup setup = make_setup(free_measure(a, 60.0), 0.0, a);
  CHECK(setup.a() == doctest::Approx(a));
  for (double s : {0.3, 1.1, 2.0}) {
    const G1Data g = compute_G1(setup, s);
    CHECK(g.at_zero == doctest::Approx(s).epsilon(1e-12));
    CHECK(g.l2_norm2 == doctest::Approx(pi * s).epsilon(1e-12));
    CHECK(g.mu_norm2 == doctest::Approx(pi * s).epsilon(1e-12));
    for (double t : {0.7, -2.4, 9.0}) {
      CHECK(g.value(t) == doctest::Approx(std::sin(s * t) / t).epsilon(1e-12));
      CHECK(g.derivative(t) ==
            doctest::Approx((s * t * std::cos(s * t) - std::sin(s * t)) / (t * t)).epsilon(1e-11));
    }
  }
}

TEST_CASE("free system: G2 is (cos sx - 1)/x and zeta(s) = s") {
  const double a = 2.0;
  const InverseSetup setup = make_setup(free_measure(a, 60.0), 0.0, a);
  const G1Data g1a = compute_G1(setup, a);
  const G2aData g2a = compute_G2a(setup, g1a);
  REQUIRE(g2a.at_atoms.size() == setup.mu.atoms().size());
  for (std::size_t i = 0; i < g2a.at_atoms.size(); ++i) {
    const double t = setup.mu.atoms()[i].t;
    const double want = t == 0.0 ? 0.0 : (std::cos(a * t) - 1.0) / t;
    CHECK(std::abs(g2a.at_atoms[i] - want) < 1e-12);
  }
  for (double s : {0.5, 1.3, 2.0}) {
    const G1Data g1 = compute_G1(setup, s);
    const G2sData g2 = compute_G2s(setup, g1, g2a);
    const auto& x = g1.op->points().x;
    for (std::size_t p = 0; p < x.size(); p += 7) {
      const double want = x[p] == 0.0 ? 0.0 : (std::cos(s * x[p]) - 1.0) / x[p];
      CHECK(std::abs(g2.at_points[static_cast<Eigen::Index>(p)] - want) < 1e-11);
    }
    CHECK(g2.mu_norm2 == doctest::Approx(pi * s).epsilon(1e-11));
    CHECK(std::abs(g2.cross) < 1e-11);
    CHECK(zeta(g1, g2) == doctest::Approx(s).epsilon(1e-11));
    const Slice sl = compute_slice(setup, g2a, s);
    CHECK(sl.zeta == doctest::Approx(s).epsilon(1e-11));
    CHECK(std::abs(sl.g) < 1e-11);
    CHECK(sl.norm_residual < 1e-10);
    CHECK(sl.consistency_residual < 1e-10);
  }
}

TEST_CASE("step system: G-functions follow Theta at the Krein time") {
  const Hamiltonian h = step_h();
  const double a = exponential_type(h, h.ell());
  const SpectralMeasure mu = spectral_measure(h, 200.0);
  const InverseSetup setup = make_setup(mu, mu.c(), a);
  const G1Data g1a = compute_G1(setup, a);
  const G2aData g2a = compute_G2a(setup, g1a);
  for (double s : {0.6, 1.4}) {
    const double xi = type_inverse(h, s);
    const G1Data g1 = compute_G1(setup, s);
    const G2sData g2 = compute_G2s(setup, g1, g2a);
    const ThetaDerivative d0 = theta_and_derivative(h, xi, 0.0);
    CHECK(g1.at_zero == doctest::Approx(-d0.dtheta_minus.real()).epsilon(1e-3));
    for (double t : {0.9, -2.2, 4.1}) {
      const TransferMatrix m = propagate(h, xi, t);
      CHECK(g1.value(t) == doctest::Approx(-m.theta_minus().real() / t).epsilon(1e-3));
    }
    const auto& x = g1.op->points().x;
    for (std::size_t p = 0; p < x.size(); ++p) {
      if (std::abs(x[p]) > 6.0 || std::abs(x[p]) < 1e-9) continue;
      const double want = (propagate(h, xi, x[p]).theta_plus().real() - 1.0) / x[p];
      CHECK(std::abs(g2.at_points[static_cast<Eigen::Index>(p)] - want) < 2e-3 * (1.0 + std::abs(want)));
    }
    CHECK(compute_slice(setup, g2a, s).zeta == doctest::Approx(xi).epsilon(1e-3));
  }
}

TEST_CASE("monotone cubic") {
  const MonotoneCubic lin({0.0, 1.0, 3.0, 4.0}, {1.0, 3.0, 7.0, 9.0});
  for (double x : {0.0, 0.5, 2.2, 4.0}) CHECK(lin(x) == doctest::Approx(1.0 + 2.0 * x).epsilon(1e-15));
  const MonotoneCubic step({0.0, 1.0, 2.0, 3.0}, {0.0, 0.0, 1.0, 1.0});
  double prev = -1.0;
  for (int i = 0; i <= 300; ++i) {
    const double y = step(0.01 * i);
    CHECK(y >= prev);
    CHECK(y >= 0.0);
    CHECK(y <= 1.0);
    prev = y;
  }
  CHECK_THROWS_AS(MonotoneCubic({0.0, 0.0}, {1.0, 2.0}), ValidationError);
}

TEST_CASE("reconstruct the free Hamiltonian") {
  const double a = 2.0;
  GridConfig cfg;
  cfg.measure_window = 60.0;
  cfg.s_samples = 33;
  cfg.r_samples = 65;
  ReconstructOptions opts;
  opts.type = a;
  const ReconstructionResult res = reconstruct(free_measure(a, 60.0), 0.0, cfg, opts);
  CHECK(res.hamiltonian.ell() == doctest::Approx(a).epsilon(1e-10));
  for (const Segment& s : res.hamiltonian.segments()) {
    CHECK(s.h11 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(s.h12) < 1e-10);
    CHECK(s.h22 == doctest::Approx(1.0).epsilon(1e-10));
  }
  const auto& d = res.diagnostics;
  CHECK(d.slices.size() == 33);
  CHECK(d.krein_residual < 1e-10);
  CHECK(d.projected_cells == 0);
  CHECK_FALSE(d.b_warning);
}

TEST_CASE("khat examples") {
  const SpectralMeasure two({{-2.0, 1.0}, {0.0, 1.0}, {1.0, 1.0}}, 3.0);
  CHECK(khat_zero(two).value == doctest::Approx(2.0 / (5.0 * pi)).epsilon(1e-15));
  const SpectralMeasure mirror({{-3.0, 0.7}, {-0.5, 2.0}, {0.0, 1.0}, {0.5, 2.0}, {3.0, 0.7}}, 4.0);
  CHECK(std::abs(khat_zero(mirror).value) < 1e-14);
}

TEST_CASE("free system: G1 derivative at the lattice") {
  const double a = 2.0;
  const InverseSetup setup = make_setup(free_measure(a, 40.0), 0.0, a);
  const G1Data g = compute_G1(setup, a);
  CHECK(std::abs(g.derivative(0.0)) < 1e-12);
  for (int k : {-3, 1, 2, 7}) {
    const double t = pi * k / a;
    CHECK(g.derivative(t) == doctest::Approx((k % 2 == 0 ? 1.0 : -1.0) * a / t).epsilon(1e-12));
  }
}

TEST_CASE("step system: G2a follows Theta_plus at ell and G2s = G2a at s = a") {
  const Hamiltonian h = step_h();
  const double a = exponential_type(h, h.ell());
  const SpectralMeasure mu = spectral_measure(h, 200.0);
  const InverseSetup setup = make_setup(mu, mu.c(), a);
  const G1Data g1a = compute_G1(setup, a);
  const G2aData g2a = compute_G2a(setup, g1a);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < mu.atoms().size(); ++i) {
    const double t = mu.atoms()[i].t;
    if (std::abs(t) > 30.0 || t == 0.0) continue;
    const double want = (propagate(h, h.ell(), t).theta_plus().real() - 1.0) / t;
    CHECK(std::abs(g2a.at_atoms[i] - want) < 1e-3 * std::max(1.0, std::abs(want)));
    ++checked;
  }
  CHECK(checked > 10);
  const G2sData g2 = compute_G2s(setup, g1a, g2a);
  const auto& pts = setup.points;
  std::size_t atom = 0;
  for (std::size_t p = 0; p < pts.x.size(); ++p) {
    if (pts.atom_mass[p] <= 0.0) continue;
    CHECK(std::abs(g2.at_points[static_cast<Eigen::Index>(p)] - g2a.at_atoms[atom]) <
          1e-8 * (1.0 + std::abs(g2a.at_atoms[atom])));
    ++atom;
  }
}

TEST_CASE("zeta is increasing on the step fixture") {
  const Hamiltonian h = step_h();
  const SpectralMeasure mu = spectral_measure(h, 200.0);
  const InverseSetup setup = make_setup(mu, mu.c(), 2.0);
  const G2aData g2a = compute_G2a(setup, compute_G1(setup, 2.0));
  double prev = 0.0;
  for (double s : GridConfig::uniform_s_grid(2.0, 40)) {
    const double z = compute_slice(setup, g2a, s).zeta;
    CHECK(z > prev);
    prev = z;
  }
}

TEST_CASE("reconstruct examples") {
  GridConfig cfg;
  cfg.measure_window = 200.0;
  {
    // H0 on [0, pi]
    ReconstructOptions o;
    o.type = pi;
    const ReconstructionResult r = reconstruct(free_measure(pi, 200.0), 0.0, cfg, o);
    CHECK(r.hamiltonian.ell() == doctest::Approx(pi).epsilon(1e-10));
    double sup = 0.0;
    for (const Segment& s : r.hamiltonian.segments()) {
      sup = std::max({sup, std::abs(s.h11 - 1.0), std::abs(s.h12), std::abs(s.h22 - 1.0)});
      CHECK(s.trace() == doctest::Approx(2.0).epsilon(1e-14));
    }
    CHECK(sup <= 5e-3);
  }
  {
    const Hamiltonian h = step_h();
    const SpectralMeasure mu = spectral_measure(h, 200.0);
    const ReconstructionResult r = reconstruct(mu, mu.c(), cfg);
    // L1 error against the input at cell midpoints
    double err = 0.0, norm = 0.0;
    for (const Segment& s : r.hamiltonian.segments()) {
      const double m = 0.5 * (s.r0 + s.r1);
      if (m > h.ell()) continue;
      const Segment& w = h.segments()[h.segment_at(m)];
      err += s.length() * (std::abs(s.h11 - w.h11) + std::abs(s.h12 - w.h12) + std::abs(s.h22 - w.h22));
      norm += s.length() * (w.h11 + std::abs(w.h12) + w.h22);
      CHECK(s.trace() == doctest::Approx(2.0).epsilon(1e-14));
    }
    CHECK(err / norm <= 0.05);
    CHECK(r.hamiltonian.ell() == doctest::Approx(h.ell()).epsilon(1e-3));
  }
}
