#include "hamsys/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hamsys {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double tiling_tol(double scale) { return 1e-12 * std::max(1.0, std::abs(scale)); }

}  // namespace

Hamiltonian::Hamiltonian(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw ValidationError("hamiltonian has no segments");
  if (std::abs(segments_.front().r0) > 0.0)
    throw ValidationError("first segment must start at r = 0");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    const std::string at = "segment " + std::to_string(i);
    if (!(s.r1 > s.r0)) throw ValidationError(at + ": empty or reversed interval");
    if (i > 0) {
      const double gap = s.r0 - segments_[i - 1].r1;
      if (std::abs(gap) > tiling_tol(s.r0))
        throw ValidationError(at + (gap > 0 ? ": gap before segment" : ": overlaps previous segment"));
      segments_[i].r0 = segments_[i - 1].r1;
    }
    if (!std::isfinite(s.h11) || !std::isfinite(s.h12) || !std::isfinite(s.h22))
      throw ValidationError(at + ": non-finite entry");
    if (s.h11 < 0.0 || s.h22 < 0.0 || s.det() < -kPsdSlack)
      throw ValidationError(at + ": matrix is not positive semidefinite");
    if (!(s.trace() > 0.0)) throw ValidationError(at + ": zero trace");
  }
}

Hamiltonian Hamiltonian::free(double ell, int pieces) {
  if (!(ell > 0.0) || pieces < 1) throw ValidationError("free Hamiltonian needs ell > 0");
  std::vector<Segment> segs;
  for (int i = 0; i < pieces; ++i)
    segs.push_back({ell * i / pieces, i + 1 == pieces ? ell : ell * (i + 1) / pieces, 1.0, 0.0, 1.0});
  return Hamiltonian(std::move(segs));
}

Hamiltonian Hamiltonian::diagonal(const std::vector<double>& lengths, const std::vector<double>& weights) {
  if (lengths.size() != weights.size() || lengths.empty())
    throw ValidationError("diagonal Hamiltonian: lengths/weights mismatch");
  std::vector<Segment> segs;
  double r = 0.0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (!(weights[i] > 0.0)) throw ValidationError("diagonal Hamiltonian: weight must be > 0");
    segs.push_back({r, r + lengths[i], weights[i], 0.0, 1.0 / weights[i]});
    r += lengths[i];
  }
  return Hamiltonian(std::move(segs));
}

std::size_t Hamiltonian::segment_at(double r) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), r,
                             [](double x, const Segment& s) { return x < s.r1; });
  if (it == segments_.end()) return segments_.size() - 1;
  return static_cast<std::size_t>(it - segments_.begin());
}

Hamiltonian Hamiltonian::shifted(double r) const {
  if (r < 0.0 || r >= ell()) throw ValidationError("shift point outside [0, ell)");
  std::vector<Segment> out;
  for (const Segment& s : segments_) {
    if (s.r1 <= r) continue;
    Segment t = s;
    t.r0 = std::max(s.r0, r) - r;
    t.r1 = s.r1 - r;
    if (t.r1 > t.r0) out.push_back(t);
  }
  out.front().r0 = 0.0;
  return Hamiltonian(std::move(out));
}

Hamiltonian Hamiltonian::truncated(double r) const {
  if (!(r > 0.0) || r > ell()) throw ValidationError("truncation point outside (0, ell]");
  std::vector<Segment> out;
  for (const Segment& s : segments_) {
    if (s.r0 >= r) break;
    Segment t = s;
    t.r1 = std::min(s.r1, r);
    out.push_back(t);
  }
  return Hamiltonian(std::move(out));
}

std::array<double, 3> Hamiltonian::integrals(double r) const {
  std::array<double, 3> acc{0.0, 0.0, 0.0};
  for (const Segment& s : segments_) {
    if (s.r0 >= r) break;
    const double len = std::min(s.r1, r) - s.r0;
    acc[0] += s.h11 * len;
    acc[1] += s.h12 * len;
    acc[2] += s.h22 * len;
  }
  return acc;
}

std::vector<double> Hamiltonian::boundaries() const {
  std::vector<double> b{0.0};
  for (const Segment& s : segments_) b.push_back(s.r1);
  return b;
}

std::vector<Atom> merge_atoms(std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.t < b.t; });
  std::vector<Atom> out;
  for (const Atom& a : atoms) {
    if (!out.empty() && std::abs(a.t - out.back().t) <= 1e-10 * (1.0 + std::abs(a.t))) {
      out.back().mass += a.mass;
      continue;
    }
    out.push_back(a);
  }
  return out;
}

SpectralMeasure::SpectralMeasure(std::vector<Atom> atoms, double window, double b, double c)
    : atoms_(std::move(atoms)), window_(window), b_(b), c_(c) {
  if (atoms_.empty()) throw ValidationError("measure has no atoms");
  if (!(window_ > 0.0)) throw ValidationError("measure window must be > 0");
  int zeros = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!(atoms_[i].mass > 0.0) || !std::isfinite(atoms_[i].mass))
      throw ValidationError("atom " + std::to_string(i) + ": mass must be positive");
    if (i > 0 && !(atoms_[i].t > atoms_[i - 1].t))
      throw ValidationError("atom positions must be strictly increasing");
    if (std::abs(atoms_[i].t) < kZeroAtomTol) {
      ++zeros;
      zero_index_ = i;
    }
  }
  if (zeros != 1) throw ValidationError("measure must have exactly one atom at t = 0");
}

SpectralMeasure SpectralMeasure::with_constants(double b, double c) const {
  return SpectralMeasure(atoms_, window_, b, c);
}

SpectralMeasure SpectralMeasure::without(std::size_t i) const {
  std::vector<Atom> a = atoms_;
  a.erase(a.begin() + static_cast<std::ptrdiff_t>(i));
  return SpectralMeasure(std::move(a), window_, b_, c_);
}

std::vector<double> GridConfig::uniform_s_grid(double a, int samples) {
  if (!(a > 0.0) || samples < 2) throw ValidationError("s grid needs a > 0 and >= 2 samples");
  std::vector<double> s(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) s[static_cast<std::size_t>(i)] = a * (i + 1) / samples;
  s.back() = a;
  return s;
}

void GridConfig::validate() const {
  if (pw_truncation < 8) throw ValidationError("pw truncation N must be >= 8");
  if (!(measure_window > 0.0)) throw ValidationError("measure window must be > 0");
  if (s_grid.empty() && s_samples < 2) throw ValidationError("s grid needs at least two samples");
  if (!s_grid.empty() && s_grid.size() < 2) throw ValidationError("s grid needs at least two points");
  if (!s_grid.empty() && !(s_grid.front() > 0.0)) throw ValidationError("s grid must lie in (0, a]");
  for (std::size_t i = 1; i < s_grid.size(); ++i)
    if (!(s_grid[i] > s_grid[i - 1])) throw ValidationError("s grid must be strictly increasing");
  if (r_samples < 3) throw ValidationError("r grid needs at least 3 samples");
}

NormalizedHamiltonian normalize_trace(const Hamiltonian& h) {
  std::vector<Segment> out;
  TimeChange tc;
  tc.r.push_back(0.0);
  tc.t.push_back(0.0);
  double t = 0.0;
  for (const Segment& s : h.segments()) {
    const double half_trace = 0.5 * s.trace();
    if (!(half_trace > 0.0)) throw ValidationError("normalize_trace: zero-trace segment");
    const double len = s.length() * half_trace;
    const double k = 1.0 / half_trace;
    out.push_back({t, t + len, s.h11 * k, s.h12 * k, s.h22 * k});
    t += len;
    tc.r.push_back(s.r1);
    tc.t.push_back(t);
  }
  return {Hamiltonian(std::move(out)), std::move(tc)};
}

Hamiltonian hamiltonian_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("hamiltonian JSON parse error: ") + e.what());
  }
  try {
    std::vector<Segment> segs;
    for (const auto& s : j.at("segments")) {
      const auto& m = s.at("h");
      const double h12 = m.at(0).at(1).get<double>();
      if (h12 != m.at(1).at(0).get<double>())
        throw ValidationError("segment " + std::to_string(segs.size()) + ": matrix not symmetric");
      segs.push_back({s.at("r0").get<double>(), s.at("r1").get<double>(), m.at(0).at(0).get<double>(), h12,
                      m.at(1).at(1).get<double>()});
    }
    Hamiltonian h(std::move(segs));
    const double ell = j.at("ell").get<double>();
    if (std::abs(ell - h.ell()) > tiling_tol(ell))
      throw ValidationError("segments do not end at ell");
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("hamiltonian JSON: ") + e.what());
  }
}

std::string hamiltonian_to_json(const Hamiltonian& h) {
  std::string out = "{\"ell\": " + fmt17(h.ell()) + ", \"segments\": [";
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Segment& s = h.segments()[i];
    if (i) out += ", ";
    out += "{\"r0\": " + fmt17(s.r0) + ", \"r1\": " + fmt17(s.r1) + ", \"h\": [[" + fmt17(s.h11) + ", " +
           fmt17(s.h12) + "], [" + fmt17(s.h12) + ", " + fmt17(s.h22) + "]]}";
  }
  return out + "]}\n";
}

SpectralMeasure measure_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("measure JSON parse error: ") + e.what());
  }
  try {
    std::vector<Atom> atoms;
    for (const auto& a : j.at("atoms")) atoms.push_back({a.at("t").get<double>(), a.at("mass").get<double>()});
    return SpectralMeasure(std::move(atoms), j.at("window").get<double>(), j.value("b", 0.0), j.value("c", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("measure JSON: ") + e.what());
  }
}

std::string measure_to_json(const SpectralMeasure& mu) {
  std::string out = "{\"window\": " + fmt17(mu.window()) + ", \"b\": " + fmt17(mu.b()) +
                    ", \"c\": " + fmt17(mu.c()) + ", \"atoms\": [";
  for (std::size_t i = 0; i < mu.atoms().size(); ++i) {
    if (i) out += ", ";
    out += "{\"t\": " + fmt17(mu.atoms()[i].t) + ", \"mass\": " + fmt17(mu.atoms()[i].mass) + "}";
  }
  return out + "]}\n";
}

Hamiltonian load_hamiltonian(const std::filesystem::path& path) { return hamiltonian_from_json(read_file(path)); }

SpectralMeasure load_measure(const std::filesystem::path& path) { return measure_from_json(read_file(path)); }

void save_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

}  // namespace hamsys
