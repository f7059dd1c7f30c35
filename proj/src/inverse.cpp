#include "hamsys/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hamsys {

namespace {

constexpr double kPi = std::numbers::pi;

// (cos(s x) - 1) / x, the PW_s part of the free continuation.
double free_g2(double s, double x) {
  const double u = s * x;
  if (std::abs(u) < 1e-4) return -s * u / 2.0 * (1.0 - u * u / 12.0);
  return (std::cos(u) - 1.0) / x;
}

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

KhatZero khat_zero(const SpectralMeasure& mu) {
  std::vector<double> pos, neg;
  for (const Atom& a : mu.atoms()) {
    if (std::abs(a.t) < kZeroAtomTol) continue;
    const double f = a.mass / (a.t * (1.0 + a.t * a.t));
    (a.t > 0.0 ? pos : neg).push_back(f);
  }
  std::reverse(neg.begin(), neg.end());  // ascending |t|
  double sum = 0.0;
  for (std::size_t i = 0; i < std::max(pos.size(), neg.size()); ++i) {
    double pair = 0.0;
    if (i < pos.size()) pair += pos[i];
    if (i < neg.size()) pair += neg[i];
    sum += pair;
  }
  KhatZero out;
  out.value = sum / kPi;
  if (mu.atoms().size() >= 3 && mu.window() > 0.0) {
    const TailModel tail = estimate_tail_model(mu);
    out.tail_bound = tail.density / (kPi * mu.window() * mu.window());
  }
  return out;
}

InverseSetup make_setup(const SpectralMeasure& mu, double c, std::optional<double> type) {
  if (!std::isfinite(c)) throw ValidationError("c must be finite");
  InverseSetup s{mu, c, estimate_tail_model(mu, type), {}, khat_zero(mu)};
  s.points = measure_points(mu, s.tail);
  return s;
}

double G1Data::value(double t) const {
  return (kPi * sinc_kernel(s, t, 0.0) - op->combine(alpha, t)) / op->density();
}

double G1Data::derivative(double t) const {
  return (-kPi * sinc_kernel_dt(s, t, 0.0) - op->combine_dy(alpha, t)) / op->density();
}

G1Data compute_G1(const InverseSetup& setup, double s) {
  if (!(s > 0.0) || s > setup.a() * (1.0 + 1e-9))
    throw ValidationError("compute_G1: s must lie in (0, a]");
  return compute_G1(setup, std::make_shared<const ToeplitzInverse>(setup.points, s));
}

G1Data compute_G1(const InverseSetup&, std::shared_ptr<const ToeplitzInverse> op) {
  G1Data g;
  g.s = op->s();
  const auto& pts = op->points();
  const double rho = op->density();
  const Eigen::Index np = static_cast<Eigen::Index>(pts.x.size());
  Eigen::VectorXd e(np);
  for (Eigen::Index p = 0; p < np; ++p) e[p] = kPi * sinc_kernel(g.s, pts.x[static_cast<std::size_t>(p)], 0.0);
  g.alpha = op->alpha(e);
  const Eigen::VectorXd s_alpha = op->kernel() * g.alpha;
  g.at_points = (e - s_alpha) / rho;
  g.at_zero = (g.s - g.alpha.dot(e) / kPi) / rho;
  g.l2_norm2 = (kPi * g.s - 2.0 * g.alpha.dot(e) + g.alpha.dot(s_alpha)) / (rho * rho);
  const Eigen::VectorXd w = as_vector(pts.weight);
  g.mu_norm2 = rho * g.l2_norm2 + (w.array() * g.at_points.array().square()).sum();
  g.op = std::move(op);
  return g;
}

G2aData compute_G2a(const InverseSetup& setup, const G1Data& g1a) {
  if (std::abs(g1a.s - setup.a()) > 1e-9 * setup.a())
    throw ValidationError("compute_G2a: G_1 must be computed at s = a");
  const auto& pts = setup.points;
  const double a = setup.a();
  G2aData out;
  out.weighted.resize(static_cast<Eigen::Index>(pts.x.size()));
  for (std::size_t p = 0; p < pts.x.size(); ++p) {
    const double t = pts.x[p];
    double f = 0.0;
    const double m = pts.atom_mass[p];
    if (m > 0.0) {
      const double d = g1a.derivative(t);
      if (std::abs(t) < kZeroAtomTol) {
        f = (setup.khat.value + setup.c) / m - d * m;
      } else {
        if (d == 0.0 || !std::isfinite(d))
          throw NumericalError("compute_G2a", "G'_{1,a} vanishes at atom t = " + std::to_string(t));
        f = (kPi / (t * m * d) - 1.0) / t;
      }
      out.at_atoms.push_back(f);
    }
    out.weighted[static_cast<Eigen::Index>(p)] = m * f + pts.lattice_weight[p] * free_g2(a, t);
  }
  return out;
}

G2sData compute_G2s(const InverseSetup&, const G1Data& g1, const G2aData& g2a) {
  const ToeplitzInverse& op = *g1.op;
  const auto& pts = op.points();
  const double rho = op.density();
  const double s = op.s();
  const Eigen::Index np = static_cast<Eigen::Index>(pts.x.size());
  if (g2a.weighted.size() != np) throw ValidationError("compute_G2s: G_{2,a} built for a different point set");
  Eigen::VectorXd pf(np);
  for (Eigen::Index p = 0; p < np; ++p) pf[p] = free_g2(s, pts.x[static_cast<std::size_t>(p)]);

  G2sData g;
  g.s = s;
  const Eigen::VectorXd m = op.kernel() * g2a.weighted + rho * pf;
  g.beta = op.alpha(m);
  g.at_points = (m - op.kernel() * g.beta) / rho;
  const double pf_m = g2a.weighted.dot(pf) + rho * kPi * s;
  g.mu_norm2 = g2a.weighted.dot(g.at_points) + pf_m - g.beta.dot(pf);
  g.cross = g2a.weighted.dot(g1.at_points) - g1.alpha.dot(pf);
  return g;
}

double zeta(const G1Data& g1, const G2sData& g2) { return 0.5 * g1.at_zero + g2.mu_norm2 / (2.0 * kPi); }

Slice compute_slice(const InverseSetup& setup, const G2aData& g2a, double s) {
  const G1Data g1 = compute_G1(setup, s);
  const G2sData g2 = compute_G2s(setup, g1, g2a);
  Slice out;
  out.s = s;
  out.zeta = zeta(g1, g2);
  out.g1_zero = g1.at_zero;
  out.g = g2.cross / kPi;
  out.norm_residual = std::abs(g1.mu_norm2 / kPi - g1.at_zero);
  out.consistency_residual = std::abs(2.0 * out.zeta - g1.at_zero - g2.mu_norm2 / kPi);
  return out;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw ValidationError("MonotoneCubic: need at least two matching samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw ValidationError("MonotoneCubic: abscissae must be strictly increasing");
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) continue;
    const double w1 = 2.0 * h[i] + h[i - 1];
    const double w2 = h[i] + 2.0 * h[i - 1];
    d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
  }
  auto edge = [](double h0, double h1, double m0, double m1) {
    double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (d * m0 <= 0.0) return 0.0;
    if (m0 * m1 <= 0.0 && std::abs(d) > 3.0 * std::abs(m0)) return 3.0 * m0;
    return d;
  };
  d_[0] = edge(h[0], h[1], delta[0], delta[1]);
  d_[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double MonotoneCubic::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * d_[i] + (-2 * t3 + 3 * t2) * y_[i + 1] +
         (t3 - t2) * h * d_[i + 1];
}

ReconstructionResult reconstruct(const SpectralMeasure& mu, double c, const GridConfig& cfg,
                                 const ReconstructOptions& opts) {
  cfg.validate();
  const InverseSetup setup = make_setup(mu, c, opts.type);
  const double a = setup.a();
  std::vector<double> s_grid = cfg.s_grid.empty() ? GridConfig::uniform_s_grid(a, cfg.s_samples) : cfg.s_grid;
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > 0.0) || s_grid[i] > a * (1.0 + 1e-9))
      throw ValidationError("s_grid must lie in (0, a] with a = " + std::to_string(a));
    if (i > 0 && !(s_grid[i] > s_grid[i - 1])) throw ValidationError("s_grid must be strictly increasing");
  }

  ReconstructionDiagnostics diag;
  diag.a = a;
  diag.density = setup.tail.density;
  diag.khat = setup.khat.value;
  diag.khat_tail_bound = setup.khat.tail_bound;
  diag.b_warning = mu.b() > 1e-4;

  const G1Data g1a = compute_G1(setup, a);
  const G2aData g2a = compute_G2a(setup, g1a);

  std::vector<double> s_tab{0.0}, z_tab{0.0}, g1_tab{0.0}, g_tab{0.0};
  for (double s : s_grid) {
    const Slice sl = compute_slice(setup, g2a, std::min(s, a));
    diag.max_norm_residual = std::max(diag.max_norm_residual, sl.norm_residual);
    diag.max_consistency_residual = std::max(diag.max_consistency_residual, sl.consistency_residual);
    if (!(sl.zeta > z_tab.back()))
      throw NumericalError("reconstruct", "zeta not strictly increasing at s = " + std::to_string(s));
    s_tab.push_back(s);
    z_tab.push_back(sl.zeta);
    g1_tab.push_back(sl.g1_zero);
    g_tab.push_back(sl.g);
    diag.slices.push_back(sl);
  }
  diag.ell = z_tab.back();

  const MonotoneCubic tau_of(z_tab, s_tab);
  const MonotoneCubic g1_of(s_tab, g1_tab);
  const MonotoneCubic g_of(s_tab, g_tab);
  const int nr = cfg.r_samples;
  const double dr = diag.ell / (nr - 1);
  std::vector<double> g1(nr), g(nr);
  for (int i = 0; i < nr; ++i) {
    const double r = i == nr - 1 ? diag.ell : dr * i;
    const double tau = tau_of(r);
    diag.r.push_back(r);
    diag.tau.push_back(tau);
    g1[i] = g1_of(tau);
    g[i] = g_of(tau);
  }

  std::vector<Segment> segs;
  int large = 0;
  double krein = 0.0;
  for (int i = 0; i + 1 < nr; ++i) {
    const double r0 = diag.r[i], r1 = diag.r[i + 1];
    double h11 = (g1[i + 1] - g1[i]) / (r1 - r0);
    double h12 = (g[i + 1] - g[i]) / (r1 - r0);
    double h22 = 2.0 - h11;
    if (h11 * h22 - h12 * h12 < -kPsdSlack) {
      const double half = 0.5 * (h11 - h22);
      const double radius = std::hypot(half, h12);
      const double shift = radius - 1.0;  // magnitude of the negative eigenvalue
      const double scale = 1.0 / radius;
      h11 = 1.0 + half * scale;
      h22 = 1.0 - half * scale;
      h12 *= scale;
      ++diag.projected_cells;
      diag.max_psd_projection = std::max(diag.max_psd_projection, shift);
      if (shift > 1e-2) ++large;
    }
    segs.push_back({r0, r1, h11, h12, h22});
    krein += (r1 - r0) * std::sqrt(std::max(0.0, h11 * h22 - h12 * h12));
    diag.krein_residual = std::max(diag.krein_residual, std::abs(diag.tau[i + 1] - krein) / a);
  }
  if (large > 0.01 * (nr - 1))
    throw NumericalError("reconstruct", "PSD projection above 1e-2 on " + std::to_string(large) + " of " +
                                            std::to_string(nr - 1) + " cells");
  return {Hamiltonian(std::move(segs)), std::move(diag)};
}

}  // namespace hamsys
