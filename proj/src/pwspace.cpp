#include "hamsys/pwspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hamsys {

namespace {

constexpr double kPi = std::numbers::pi;

template <class T>
T sinc_impl(double s, T y) {
  const T u = s * y;
  if (std::abs(u) < 1e-4) {
    const T u2 = u * u;
    return s / kPi * (T(1.0) - u2 / 6.0 + u2 * u2 / 120.0);
  }
  return std::sin(u) / (kPi * y);
}

void check_bandwidth(double s, const TailModel& tail) {
  if (!(s > 0.0)) throw ValidationError("bandwidth s must be > 0");
  if (s > tail.bandwidth() * (1.0 + 1e-9))
    throw ValidationError("bandwidth s exceeds the tail-model lattice bandwidth pi/spacing");
}

}  // namespace

double sinc_kernel(double s, double x, double t) { return sinc_impl(s, x - t); }

Complex sinc_kernel(double s, Complex x, Complex t) { return sinc_impl(s, x - t); }

double sinc_kernel_dt(double s, double x, double t) {
  const double y = x - t;
  const double u = s * y;
  if (std::abs(u) < 1e-3) {
    const double u2 = u * u;
    return s * s * s / kPi * y * (1.0 / 3.0 - u2 / 30.0 + u2 * u2 / 840.0);
  }
  return (std::sin(u) - u * std::cos(u)) / (kPi * y * y);
}

PWBasis::PWBasis(double s_, int n_) : s(s_), n(n_) {
  if (!(s > 0.0)) throw ValidationError("PW basis: s must be > 0");
  if (n < 0) throw ValidationError("PW basis: N must be >= 0");
}

double PWBasis::node(int index) const { return kPi * (index - n) / s; }

double PWBasis::phi(int index, double x) const { return std::sqrt(kPi / s) * sinc_kernel(s, x, node(index)); }

Complex PWBasis::phi(int index, Complex x) const {
  return std::sqrt(kPi / s) * sinc_kernel(s, x, Complex(node(index)));
}

double PWBasis::dphi(int index, double x) const { return -std::sqrt(kPi / s) * sinc_kernel_dt(s, x, node(index)); }

Eigen::VectorXd kernel_coefficients(const PWBasis& basis, double t) {
  Eigen::VectorXd c(basis.size());
  for (int k = 0; k < basis.size(); ++k) c[k] = basis.phi(k, t);
  return c;
}

Eigen::VectorXcd kernel_coefficients(const PWBasis& basis, Complex t) {
  Eigen::VectorXcd c(basis.size());
  for (int k = 0; k < basis.size(); ++k) c[k] = basis.phi(k, t);
  return c;
}

double evaluate_pw(const Eigen::VectorXd& coeffs, const PWBasis& basis, double x) {
  if (coeffs.size() != basis.size()) throw ValidationError("evaluate_pw: coefficient count != 2N+1");
  double acc = 0.0;
  for (int k = 0; k < basis.size(); ++k) acc += coeffs[k] * basis.phi(k, x);
  return acc;
}

Complex evaluate_pw(const Eigen::VectorXcd& coeffs, const PWBasis& basis, Complex x) {
  if (coeffs.size() != basis.size()) throw ValidationError("evaluate_pw: coefficient count != 2N+1");
  Complex acc{0.0};
  for (int k = 0; k < basis.size(); ++k) acc += coeffs[k] * basis.phi(k, x);
  return acc;
}

MeasurePoints measure_points(const SpectralMeasure& mu, const TailModel& tail) {
  struct Raw {
    double x, mass, lattice;
  };
  std::vector<Raw> raw;
  for (const Atom& a : mu.atoms()) raw.push_back({a.t, a.mass, 0.0});
  const long k_max = tail.last_inner_index();
  const double lw = -tail.density * tail.spacing;
  for (long k = -k_max; k <= k_max; ++k) raw.push_back({static_cast<double>(k) * tail.spacing, 0.0, lw});
  std::stable_sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.x < b.x; });

  MeasurePoints out;
  out.density = tail.density;
  for (const Raw& r : raw) {
    if (!out.x.empty() && std::abs(r.x - out.x.back()) <= 1e-9 * (1.0 + std::abs(r.x))) {
      if (r.mass > 0.0) out.x.back() = r.x;  // atoms carry the exact position
      out.atom_mass.back() += r.mass;
      out.lattice_weight.back() += r.lattice;
      out.weight.back() = out.atom_mass.back() + out.lattice_weight.back();
      continue;
    }
    out.x.push_back(r.x);
    out.atom_mass.push_back(r.mass);
    out.lattice_weight.push_back(r.lattice);
    out.weight.push_back(r.mass + r.lattice);
  }
  return out;
}

PWOperator build_operator(const SpectralMeasure& mu, double s, int n, std::optional<TailModel> tail) {
  const TailModel model = tail ? *tail : estimate_tail_model(mu);
  check_bandwidth(s, model);
  if (2 * n + 1 > 4097) throw ValidationError("PW truncation too large: 2N+1 must be <= 4097");
  PWBasis basis(s, n);
  const MeasurePoints pts = measure_points(mu, model);
  const auto np = static_cast<Eigen::Index>(pts.x.size());
  Eigen::MatrixXd phi(np, basis.size());
  for (Eigen::Index p = 0; p < np; ++p)
    for (int k = 0; k < basis.size(); ++k) phi(p, k) = basis.phi(k, pts.x[static_cast<std::size_t>(p)]);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(pts.weight.data(), np);
  Eigen::MatrixXd gram = phi.transpose() * w.asDiagonal() * phi;
  gram.diagonal().array() += pts.density;
  gram = 0.5 * (gram + gram.transpose()).eval();

  PWOperator op{s, basis, model, gram, Eigen::LLT<Eigen::MatrixXd>(gram), 0.0};
  if (op.factor.info() != Eigen::Success)
    throw NumericalError("build_operator", "measure not comparable on PW_s at this truncation");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  if (!(lo > 0.0)) throw NumericalError("build_operator", "measure not comparable on PW_s at this truncation");
  op.condition = eig.eigenvalues().maxCoeff() / lo;
  return op;
}

SolveResult apply_inverse(const PWOperator& op, const Eigen::VectorXd& rhs) {
  if (rhs.size() != op.gram.rows()) throw ValidationError("apply_inverse: rhs size mismatch");
  SolveResult out;
  out.x = op.factor.solve(rhs);
  const double nr = rhs.norm();
  out.residual = nr > 0.0 ? (op.gram * out.x - rhs).norm() / nr : 0.0;
  return out;
}

FrameBounds frame_bounds(const PWOperator& op) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(op.gram, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff(), op.basis.n, op.s};
}

FrameBounds frame_bounds(const SpectralMeasure& mu, double s, int n, std::optional<TailModel> tail) {
  return frame_bounds(build_operator(mu, s, n, tail));
}

ToeplitzInverse::ToeplitzInverse(const MeasurePoints& points, double s)
    : points_(points), s_(s), density_(points.density) {
  if (!(s > 0.0)) throw ValidationError("ToeplitzInverse: s must be > 0");
  if (!(density_ > 0.0)) throw ValidationError("ToeplitzInverse: tail density must be > 0");
  const auto np = static_cast<Eigen::Index>(points_.x.size());
  kernel_.resize(np, np);
  for (Eigen::Index p = 0; p < np; ++p) {
    kernel_(p, p) = s / std::numbers::pi;
    for (Eigen::Index q = 0; q < p; ++q) {
      kernel_(p, q) = sinc_kernel(s, points_.x[static_cast<std::size_t>(p)], points_.x[static_cast<std::size_t>(q)]);
      kernel_(q, p) = kernel_(p, q);
    }
  }
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(points_.weight.data(), np);
  Eigen::MatrixXd a = w.asDiagonal() * kernel_;
  a.diagonal().array() += density_;
  lu_.compute(a);
}

Eigen::VectorXd ToeplitzInverse::alpha(const Eigen::VectorXd& h) const {
  if (h.size() != static_cast<Eigen::Index>(points_.x.size()))
    throw ValidationError("ToeplitzInverse: sample count mismatch");
  if (h.size() == 0) return h;
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(points_.weight.data(), h.size());
  return lu_.solve(w.cwiseProduct(h));
}

Eigen::VectorXcd ToeplitzInverse::alpha(const Eigen::VectorXcd& h) const {
  Eigen::VectorXcd out(h.size());
  out.real() = alpha(Eigen::VectorXd(h.real()));
  out.imag() = alpha(Eigen::VectorXd(h.imag()));
  return out;
}

double ToeplitzInverse::combine(const Eigen::VectorXd& alpha, double y) const {
  double acc = 0.0;
  for (Eigen::Index p = 0; p < alpha.size(); ++p)
    acc += alpha[p] * sinc_kernel(s_, y, points_.x[static_cast<std::size_t>(p)]);
  return acc;
}

Complex ToeplitzInverse::combine(const Eigen::VectorXcd& alpha, Complex y) const {
  Complex acc{0.0};
  for (Eigen::Index p = 0; p < alpha.size(); ++p)
    acc += alpha[p] * sinc_kernel(s_, y, Complex(points_.x[static_cast<std::size_t>(p)]));
  return acc;
}

double ToeplitzInverse::combine_dy(const Eigen::VectorXd& alpha, double y) const {
  double acc = 0.0;
  for (Eigen::Index p = 0; p < alpha.size(); ++p)
    acc -= alpha[p] * sinc_kernel_dt(s_, y, points_.x[static_cast<std::size_t>(p)]);
  return acc;
}

}  // namespace hamsys
