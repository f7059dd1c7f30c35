#include "hamsys/forward.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

namespace hamsys {

namespace {

constexpr double kPi = std::numbers::pi;

std::atomic<double> g_det_abs{0.0};
std::atomic<double> g_det_rel{0.0};

void atomic_max(std::atomic<double>& slot, double v) {
  double cur = slot.load(std::memory_order_relaxed);
  while (v > cur && !slot.compare_exchange_weak(cur, v, std::memory_order_relaxed)) {
  }
}

void record_det(const Mat2& m) {
  const double dev = std::abs(m.det() - 1.0);
  const double n = m.norm();
  atomic_max(g_det_abs, dev);
  atomic_max(g_det_rel, dev / (1.0 + n * n));
}

template <class T>
T sinc_of(T w) {
  if (std::abs(w) < 1e-4) {
    const T w2 = w * w;
    return T(1.0) - w2 / 6.0 + w2 * w2 / 120.0;
  }
  return std::sin(w) / w;
}

// Segment propagator E = cos(zLq) I - (sin(zLq)/q) K with K = J H, q = sqrt(det H),
// and its z-derivative, as entries (a, b, c, d).
template <class T>
struct SegProp {
  std::array<T, 4> e;
  std::array<T, 4> de;
};

template <class T>
SegProp<T> segment_prop(const Segment& s, double len, T z, bool want_derivative) {
  const double q = std::sqrt(std::max(0.0, s.det()));
  const T w = z * (len * q);
  const T cw = std::cos(w);
  const T sc = sinc_of(w);
  const T sin_over_q = z * len * sc;  // sin(zLq)/q
  // K = J H = [[-h12, -h22], [h11, h12]]
  const double k11 = -s.h12, k12 = -s.h22, k21 = s.h11, k22 = s.h12;
  SegProp<T> p;
  p.e = {cw - sin_over_q * k11, -sin_over_q * k12, -sin_over_q * k21, cw - sin_over_q * k22};
  if (want_derivative) {
    const T dc = -(len * len * q * q) * z * sc;
    const T ds = len * cw;
    p.de = {dc - ds * k11, -ds * k12, -ds * k21, dc - ds * k22};
  }
  return p;
}

template <class T>
struct ThetaState {
  T tp{1.0}, tm{0.0}, dtp{0.0}, dtm{0.0};
};

template <class T>
ThetaState<T> theta_state(const Hamiltonian& h, double r, T z, bool want_derivative) {
  ThetaState<T> st;
  for (const Segment& s : h.segments()) {
    if (s.r0 >= r) break;
    const double len = std::min(s.r1, r) - s.r0;
    const SegProp<T> p = segment_prop(s, len, z, want_derivative);
    const T tp = p.e[0] * st.tp + p.e[1] * st.tm;
    const T tm = p.e[2] * st.tp + p.e[3] * st.tm;
    if (want_derivative) {
      const T dtp = p.de[0] * st.tp + p.de[1] * st.tm + p.e[0] * st.dtp + p.e[1] * st.dtm;
      const T dtm = p.de[2] * st.tp + p.de[3] * st.tm + p.e[2] * st.dtp + p.e[3] * st.dtm;
      st.dtp = dtp;
      st.dtm = dtm;
    }
    st.tp = tp;
    st.tm = tm;
  }
  return st;
}

void check_r(const Hamiltonian& h, double r) {
  if (!(r >= 0.0) || r > h.ell() * (1.0 + 1e-14))
    throw ValidationError("r = " + std::to_string(r) + " outside [0, ell]");
}

double theta_minus_real(const Hamiltonian& h, double x) { return theta_state<double>(h, h.ell(), x, false).tm; }

double refine_zero(const Hamiltonian& h, double lo, double hi, double flo) {
  for (int i = 0; i < 200 && hi - lo > 1e-9 * (1.0 + std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = theta_minus_real(h, mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  const double a = lo - 1e-9 * (1.0 + std::abs(lo)), b = hi + 1e-9 * (1.0 + std::abs(hi));
  for (int i = 0; i < 20; ++i) {
    const auto st = theta_state<double>(h, h.ell(), x, true);
    if (st.dtm == 0.0) break;
    const double dx = st.tm / st.dtm;
    const double next = x - dx;
    if (next < a || next > b) break;
    x = next;
    if (std::abs(dx) <= 1e-13 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

const std::array<double, 8> kGaussNodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                           -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                           0.7966664774136267,  0.9602898564975363};
const std::array<double, 8> kGaussWeights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                             0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                             0.2223810344533745, 0.1012285362903763};

}  // namespace

double Mat2::norm() const {
  const double big = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
  if (big == 0.0 || !std::isfinite(big)) return big;
  const Complex e[4] = {a / big, b / big, c / big, d / big};
  return big * std::sqrt(std::norm(e[0]) + std::norm(e[1]) + std::norm(e[2]) + std::norm(e[3]));
}

DetRecord det_record() { return {g_det_abs.load(), g_det_rel.load()}; }

void reset_det_record() {
  g_det_abs.store(0.0);
  g_det_rel.store(0.0);
}

Mat2 segment_exponential(const Segment& s, double len, Complex z) {
  const auto p = segment_prop<Complex>(s, len, z, false);
  return {p.e[0], p.e[1], p.e[2], p.e[3]};
}

TransferMatrix propagate(const Hamiltonian& h, double r, Complex z) {
  check_r(h, r);
  Mat2 m;
  for (const Segment& s : h.segments()) {
    if (s.r0 >= r) break;
    m = segment_exponential(s, std::min(s.r1, r) - s.r0, z) * m;
  }
  record_det(m);
  return {m, r, z};
}

ScaledTransfer propagate_scaled(const Hamiltonian& h, double r, Complex z) {
  check_r(h, r);
  ScaledTransfer out;
  for (const Segment& s : h.segments()) {
    if (s.r0 >= r) break;
    const double len = std::min(s.r1, r) - s.r0;
    // growth of one piece is at most exp(|z| len trace); keep it below e^200
    const double growth = std::abs(z) * len * s.trace();
    const int pieces = std::max(1, static_cast<int>(std::ceil(growth / 200.0)));
    const Mat2 step = segment_exponential(s, len / pieces, z);
    for (int p = 0; p < pieces; ++p) {
      out.m = step * out.m;
      const double n = out.m.norm();
      if (n > 1e100) {
        out.m = {out.m.a / n, out.m.b / n, out.m.c / n, out.m.d / n};
        out.log_scale += std::log(n);
      }
    }
  }
  if (out.log_scale == 0.0) record_det(out.m);
  return out;
}

ThetaDerivative theta_and_derivative(const Hamiltonian& h, double r, Complex z) {
  check_r(h, r);
  const auto st = theta_state<Complex>(h, r, z, true);
  return {st.tp, st.tm, st.dtp, st.dtm};
}

double exponential_type(const Hamiltonian& h, double r) {
  double acc = 0.0;
  for (const Segment& s : h.segments()) {
    if (s.r0 >= r) break;
    acc += std::sqrt(std::max(0.0, s.det())) * (std::min(s.r1, r) - s.r0);
  }
  return acc;
}

double type_inverse(const Hamiltonian& h, double type) {
  if (type <= 0.0) return 0.0;
  double acc = 0.0;
  for (const Segment& s : h.segments()) {
    const double q = std::sqrt(std::max(0.0, s.det()));
    const double piece = q * s.length();
    if (acc + piece >= type && q > 0.0) return s.r0 + (type - acc) / q;
    acc += piece;
  }
  return h.ell();
}

Complex dbranges_kernel(const Hamiltonian& h, double r, Complex w, Complex z) {
  const Complex wb = std::conj(w);
  if (std::abs(z - wb) < 1e-7 * (1.0 + std::abs(z))) {
    const auto t = theta_and_derivative(h, r, wb);
    return (t.dtheta_plus * t.theta_minus - t.dtheta_minus * t.theta_plus) / kPi;
  }
  const auto tz = theta_state<Complex>(h, r, z, false);
  const auto tw = theta_state<Complex>(h, r, wb, false);
  return (tz.tp * tw.tm - tz.tm * tw.tp) / (kPi * (z - wb));
}

double default_zero_step(const Hamiltonian& h) {
  return kPi / (4.0 * exponential_type(h, h.ell()));
}

ZeroScan find_zeros(const Hamiltonian& h, double window, double step) {
  if (!(window > 0.0)) throw ValidationError("find_zeros: window must be > 0");
  const double type = exponential_type(h, h.ell());
  if (!(type > 0.0)) throw ValidationError("find_zeros: Hamiltonian has zero exponential type");
  if (!(step > 0.0) || step > kPi / (2.0 * type) * (1.0 + 1e-12))
    throw ValidationError("find_zeros: step must be in (0, pi/(2 type)]");

  const double lo = -window - step;
  const long n = static_cast<long>(std::ceil(2.0 * (window + step) / step));
  std::vector<double> xs(static_cast<std::size_t>(n + 1)), fs(xs.size());
  for (long i = 0; i <= n; ++i) {
    xs[static_cast<std::size_t>(i)] = lo + step * static_cast<double>(i);
    fs[static_cast<std::size_t>(i)] = theta_minus_real(h, xs[static_cast<std::size_t>(i)]);
  }
  std::vector<Atom> found{{0.0, 1.0}};
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (fs[i] == 0.0) {
      found.push_back({xs[i], 1.0});
      continue;
    }
    if ((fs[i] < 0.0) != (fs[i + 1] < 0.0) && fs[i + 1] != 0.0)
      found.push_back({refine_zero(h, xs[i], xs[i + 1], fs[i]), 1.0});
  }
  found = merge_atoms(std::move(found));

  ZeroScan scan;
  const double keep = window * (1.0 + 1e-9);
  for (const Atom& a : found) {
    if (std::abs(a.t) > keep) continue;
    scan.zeros.push_back(std::abs(a.t) < kZeroAtomTol ? 0.0 : a.t);
  }
  for (std::size_t i = 1; i < scan.zeros.size(); ++i)
    scan.max_gap = std::max(scan.max_gap, scan.zeros[i] - scan.zeros[i - 1]);
  scan.gap_warning = scan.max_gap > 1.5 * kPi / type;
  return scan;
}

void check_compatible(const Hamiltonian& h) {
  auto rank_one_01 = [](const Segment& s) { return s.h11 == 0.0 && s.h12 == 0.0; };
  if (rank_one_01(h.segments().front())) throw ValidationError("Hamiltonian not compatible at 0");
  if (rank_one_01(h.segments().back())) throw ValidationError("Hamiltonian not compatible at ell");
}

WeylValue weyl_function(const Hamiltonian& h, Complex z) {
  if (!(z.imag() > 0.0)) throw ValidationError("weyl_function: Im z must be > 0");
  const ScaledTransfer m = propagate_scaled(h, h.ell(), z);
  if (m.m.c == 0.0) throw NumericalError("weyl_function", "theta_minus vanished off the real axis");
  const Complex val = m.m.d / m.m.c;
  if (!(val.imag() > 0.0)) throw NumericalError("weyl_function", "Im m <= 0 (propagation failure)");
  return {z, val};
}

HerglotzConstants herglotz_constants(const Hamiltonian& h, const SpectralMeasure& mu) {
  const Complex mi = weyl_function(h, Complex(0.0, 1.0)).m;
  double sum = 0.0;
  for (const Atom& a : mu.atoms()) sum += a.mass / (1.0 + a.t * a.t);
  sum /= kPi;

  const TailModel tail = estimate_tail_model(mu, exponential_type(h, h.ell()));
  const double hi = mu.atoms().back().t + 0.5 * tail.spacing;
  const double lo = -mu.atoms().front().t + 0.5 * tail.spacing;
  HerglotzConstants out;
  out.tail = tail.density / kPi * (kPi - std::atan(hi) - std::atan(lo));
  out.c = mi.real();
  out.b = mi.imag() - sum - out.tail;
  if (out.b < -std::max(1e-6, 0.05 * out.tail))
    throw NumericalError("herglotz_constants", "estimated b < 0 (measure window too small)");
  return out;
}

SpectralMeasure spectral_measure(const Hamiltonian& h, double window, double step) {
  check_compatible(h);
  if (step <= 0.0) step = default_zero_step(h);
  const ZeroScan scan = find_zeros(h, window, step);
  std::vector<Atom> atoms;
  atoms.reserve(scan.zeros.size());
  for (double t : scan.zeros) {
    const auto d = theta_and_derivative(h, h.ell(), Complex(t, 0.0));
    const double mass = -kPi / (d.theta_plus.real() * d.dtheta_minus.real());
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw NumericalError("spectral_measure", "nonpositive mass at t = " + std::to_string(t));
    atoms.push_back({t, mass});
  }
  SpectralMeasure mu(std::move(atoms), window);
  const HerglotzConstants hc = herglotz_constants(h, mu);
  return mu.with_constants(std::max(hc.b, 0.0), hc.c);
}

QuadratureGrid quadrature_grid(const Hamiltonian& h, double r, int panels_per_segment) {
  check_r(h, r);
  if (panels_per_segment < 1) throw ValidationError("quadrature_grid: need at least one panel");
  QuadratureGrid g;
  g.r = r;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const Segment& s = h.segments()[k];
    if (s.r0 >= r) break;
    const double hi = std::min(s.r1, r);
    const double width = (hi - s.r0) / panels_per_segment;
    for (int p = 0; p < panels_per_segment; ++p) {
      const double mid = s.r0 + (p + 0.5) * width;
      for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
        g.nodes.push_back(mid + 0.5 * width * kGaussNodes[q]);
        g.weights.push_back(0.5 * width * kGaussWeights[q]);
        g.segment.push_back(k);
      }
    }
  }
  return g;
}

Complex weyl_titchmarsh(const Hamiltonian& h, const QuadratureGrid& grid,
                        const std::vector<std::array<Complex, 2>>& x, Complex z) {
  if (x.size() != grid.nodes.size())
    throw ValidationError("weyl_titchmarsh: samples do not match the quadrature grid");
  if (!grid.segment.empty() && grid.segment.back() >= h.size())
    throw ValidationError("weyl_titchmarsh: grid not built for this Hamiltonian");
  Complex acc{0.0};
  const Complex zb = std::conj(z);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Segment& s = h.segments()[grid.segment[i]];
    if (grid.nodes[i] < s.r0 || grid.nodes[i] > s.r1)
      throw ValidationError("weyl_titchmarsh: grid misaligned with segment boundaries");
    const auto th = theta_state<Complex>(h, grid.nodes[i], zb, false);
    const Complex hx0 = s.h11 * x[i][0] + s.h12 * x[i][1];
    const Complex hx1 = s.h12 * x[i][0] + s.h22 * x[i][1];
    acc += grid.weights[i] * (hx0 * std::conj(th.tp) + hx1 * std::conj(th.tm));
  }
  return acc / std::sqrt(kPi);
}

Complex weyl_titchmarsh(const Hamiltonian& h, double r, const std::function<std::array<Complex, 2>(double)>& x,
                        Complex z, int panels_per_segment) {
  const QuadratureGrid g = quadrature_grid(h, r, panels_per_segment);
  std::vector<std::array<Complex, 2>> samples;
  samples.reserve(g.nodes.size());
  for (double t : g.nodes) samples.push_back(x(t));
  return weyl_titchmarsh(h, g, samples, z);
}

}  // namespace hamsys
