#include "wgqst/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "wgqst/errors.hpp"

namespace wgqst {

namespace {

using std::numbers::pi;

double pchip_end_slope(double h0, double h1, double del0, double del1) {
  double m = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
  if (m * del0 <= 0.0) return 0.0;
  if (del0 * del1 <= 0.0 && std::abs(m) > std::abs(3.0 * del0)) return 3.0 * del0;
  return m;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

double arctan_k(const ArctanShape& s, double omega) {
  return s.delta_t / s.d * omega - 2.0 / s.d * std::atan((omega - s.omega_q) / s.rate);
}

double arctan_slope(const ArctanShape& s, double omega) {
  const double x = omega - s.omega_q;
  return s.delta_t / s.d - 2.0 / s.d * s.rate / (s.rate * s.rate + x * x);
}

// Inverse of the arctan form by bracketed Newton in the detuning.
double arctan_omega(const ArctanShape& s, double k) {
  const double a = s.delta_t / s.d;
  const double target = k - a * s.omega_q;
  auto f = [&](double x) { return a * x - 2.0 / s.d * std::atan(x / s.rate) - target; };
  double lo = (target - pi / s.d) / a;
  double hi = (target + pi / s.d) / a;
  double x = target / a;
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    if (fx == 0.0) break;
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    double step = fx / arctan_slope(s, s.omega_q + x);
    double next = x - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * (std::abs(x) + 1.0)) {
      x = next;
      break;
    }
    x = next;
  }
  return s.omega_q + x;
}

}  // namespace

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw StructuralError("monotone cubic needs matching columns of length >= 2");
  if (!strictly_increasing(x_)) throw NonInvertibleError("abscissae not strictly increasing");
  if (!strictly_increasing(y_)) throw NonInvertibleError("ordinates not strictly increasing");
  std::vector<double> h(n - 1), del(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    del[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  m_.assign(n, 0.0);
  if (n == 2) {
    m_[0] = m_[1] = del[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (del[i - 1] * del[i] <= 0.0) continue;
    const double w1 = 2.0 * h[i] + h[i - 1];
    const double w2 = h[i] + 2.0 * h[i - 1];
    m_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
  }
  m_[0] = pchip_end_slope(h[0], h[1], del[0], del[1]);
  m_[n - 1] = pchip_end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
}

std::size_t MonotoneCubic::segment(const std::vector<double>& v, double t) const {
  auto it = std::upper_bound(v.begin(), v.end(), t);
  std::size_t i = (it == v.begin()) ? 0 : static_cast<std::size_t>(it - v.begin()) - 1;
  return std::min(i, v.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
  if (x < x_.front() || x > x_.back()) throw DomainError("evaluation outside tabulated range");
  const std::size_t i = segment(x_, x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * m_[i] + (-2 * t3 + 3 * t2) * y_[i + 1] +
         (t3 - t2) * h * m_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
  if (x < x_.front() || x > x_.back()) throw DomainError("evaluation outside tabulated range");
  const std::size_t i = segment(x_, x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  return (6 * t2 - 6 * t) / h * y_[i] + (3 * t2 - 4 * t + 1) * m_[i] + (-6 * t2 + 6 * t) / h * y_[i + 1] +
         (3 * t2 - 2 * t) * m_[i + 1];
}

double MonotoneCubic::inverse(double y) const {
  if (y < y_.front() || y > y_.back()) throw DomainError("inverse outside tabulated range");
  const std::size_t i = segment(y_, y);
  if (y == y_[i]) return x_[i];
  if (y == y_[i + 1]) return x_[i + 1];
  double lo = x_[i], hi = x_[i + 1];
  double x = lo + (hi - lo) * (y - y_[i]) / (y_[i + 1] - y_[i]);
  for (int it = 0; it < 100; ++it) {
    const double r = (*this)(x) - y;
    if (r == 0.0) break;
    if (r > 0.0)
      hi = x;
    else
      lo = x;
    const double dy = derivative(x);
    double next = dy > 0.0 ? x - r / dy : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4e-16 * std::abs(x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

DispersionRelation DispersionRelation::linear(double v_g) {
  if (!(v_g > 0.0)) throw DomainError("v_g must be positive");
  DispersionRelation r;
  r.kind_ = DispersionKind::Linear;
  r.v_g_ = v_g;
  return r;
}

DispersionRelation DispersionRelation::arctan(DispersionKind kind, ArctanShape shape) {
  if (kind != DispersionKind::AnalyticFar && kind != DispersionKind::AnalyticNear)
    throw StructuralError("arctan shape requires an analytic kind");
  if (!(shape.d > 0.0)) throw DomainError("qubit separation d must be positive");
  if (!(shape.rate > 0.0)) throw DomainError("rate must be positive");
  if (!(shape.delta_t / shape.d - 2.0 / (shape.d * shape.rate) > 0.0))
    throw NonInvertibleError("arctan dispersion has non-positive slope at resonance");
  DispersionRelation r;
  r.kind_ = kind;
  r.shape_ = shape;
  return r;
}

DispersionRelation DispersionRelation::analytic_far(const PhysicalParams& p) {
  const double dt = p.d() / p.v_g() + 2.0 / p.gamma();
  return arctan(DispersionKind::AnalyticFar, {dt, p.d(), p.gamma(), p.omega_q()});
}

DispersionRelation DispersionRelation::analytic_near(const PhysicalParams& p, std::optional<double> delta_t) {
  const BiexpSolution b = biexp_rates(p.d(), p.gamma(), p.v_g());
  const double dt = delta_t.value_or(p.d() / p.v_g() + 2.0 / p.gamma());
  return arctan(DispersionKind::AnalyticNear, {dt, p.d(), b.gamma2, p.omega_q()});
}

DispersionRelation DispersionRelation::tabulated(std::vector<double> k, std::vector<double> omega) {
  DispersionRelation r;
  r.kind_ = DispersionKind::Tabulated;
  r.table_ = std::make_shared<const MonotoneCubic>(std::move(k), std::move(omega));
  return r;
}

double DispersionRelation::wavenumber(double omega) const {
  switch (kind_) {
    case DispersionKind::Linear:
      return omega / v_g_;
    case DispersionKind::AnalyticFar:
    case DispersionKind::AnalyticNear:
      return arctan_k(shape_, omega);
    case DispersionKind::Tabulated:
      return table_->inverse(omega);
  }
  return 0.0;
}

double DispersionRelation::frequency(double k) const {
  switch (kind_) {
    case DispersionKind::Linear:
      return k * v_g_;
    case DispersionKind::AnalyticFar:
    case DispersionKind::AnalyticNear:
      return arctan_omega(shape_, k);
    case DispersionKind::Tabulated:
      return (*table_)(k);
  }
  return 0.0;
}

double DispersionRelation::group_velocity(double omega) const {
  switch (kind_) {
    case DispersionKind::Linear:
      return v_g_;
    case DispersionKind::AnalyticFar:
    case DispersionKind::AnalyticNear:
      return 1.0 / arctan_slope(shape_, omega);
    case DispersionKind::Tabulated:
      return table_->derivative(table_->inverse(omega));
  }
  return 0.0;
}

double analytic_dispersion_far(double omega, double d, double gamma, double omega_q, double v_g) {
  return DispersionRelation::analytic_far(PhysicalParams(omega_q, gamma, v_g, d)).wavenumber(omega);
}

double analytic_dispersion_near(double omega, double d, double gamma, double omega_q, double v_g) {
  return DispersionRelation::analytic_near(PhysicalParams(omega_q, gamma, v_g, d)).wavenumber(omega);
}

BiexpSolution biexp_rates(double d, double gamma, double v_g) {
  if (!(d > 0.0)) throw DomainError("qubit separation d must be positive");
  if (!(gamma > 0.0) || !(v_g > 0.0)) throw DomainError("gamma and v_g must be positive");
  const double eps = v_g / d;
  const double s = std::sqrt(eps * (2.0 * gamma + eps));
  BiexpSolution b{};
  b.xi = gamma + eps;
  b.gamma2 = b.xi + s;
  b.gamma1 = gamma * gamma / b.gamma2;
  // s - eps = 2 gamma eps / (s + eps) avoids cancellation at small d
  b.w1 = gamma * eps / (s * (s + eps));
  b.w2 = -(eps + s) / (2.0 * s);
  return b;
}

cplx pulse_spectrum_corrected(double delta, double d, double gamma, double v_g) {
  const BiexpSolution b = biexp_rates(d, gamma, v_g);
  const double g = coupling_from_gamma(gamma, v_g);
  const double dt = d / v_g + 2.0 / gamma;
  const cplx I(0.0, 1.0);
  auto term = [&](double rate) {
    const cplx p = delta + I * rate;
    return (dt / d) / p - (I / d) / (p * (delta + I * gamma));
  };
  return g * (b.w1 * term(b.gamma1) - b.w2 * term(b.gamma2));
}

DispersionOrFailure corrected_dispersion(const PhysicalParams& p, double window, int samples) {
  if (samples < 3) throw DomainError("need at least three samples");
  if (!(window > 0.0)) throw DomainError("frequency window must be positive");
  const double d = p.d(), gamma = p.gamma(), v = p.v_g();
  const double dt = d / v + 2.0 / gamma;
  std::vector<double> omega(samples), k(samples), phase(samples);
  for (int i = 0; i < samples; ++i) {
    const double delta = -window + 2.0 * window * i / (samples - 1);
    double ph = std::arg(pulse_spectrum_corrected(delta, d, gamma, v));
    if (i > 0) ph += 2.0 * pi * std::round((phase[i - 1] - ph) / (2.0 * pi));
    phase[i] = ph;
    omega[i] = p.omega_q() + delta;
  }
  // Gauge: the phase is measured from its on-resonance value.
  std::size_t i0 = 0;
  for (int i = 1; i < samples; ++i)
    if (std::abs(omega[i] - p.omega_q()) < std::abs(omega[i0] - p.omega_q())) i0 = i;
  const double branch = phase[i0] - std::arg(pulse_spectrum_corrected(omega[i0] - p.omega_q(), d, gamma, v));
  const double ref = branch + std::arg(pulse_spectrum_corrected(0.0, d, gamma, v));
  for (int i = 0; i < samples; ++i) k[i] = dt / d * omega[i] - 2.0 / d * (phase[i] - ref);

  for (int i = 1; i < samples; ++i) {
    if (!(k[i] > k[i - 1])) {
      NonInvertible f;
      f.reason = "corrected k(omega) is not strictly increasing";
      f.index = static_cast<std::size_t>(i);
      f.omega = omega[i];
      return f;
    }
  }
  return DispersionRelation::tabulated(std::move(k), std::move(omega));
}

DispersionOrFailure invert_dispersion(const std::vector<double>& k, const std::vector<double>& omega) {
  if (k.size() != omega.size() || k.size() < 2) throw StructuralError("table columns must match, length >= 2");
  if (!strictly_increasing(k)) throw StructuralError("table must be sorted in k");
  for (std::size_t i = 1; i < omega.size(); ++i) {
    if (!(omega[i] > omega[i - 1])) {
      NonInvertible f;
      f.reason = "omega is not strictly increasing in k";
      f.index = i;
      f.omega = omega[i];
      return f;
    }
  }
  return DispersionRelation::tabulated(k, omega);
}

void write_dispersion_csv(std::ostream& out, const DispersionTable& t, const std::vector<std::string>& extra) {
  out << std::setprecision(17);
  out << "# gamma=" << t.gamma << " v_g=" << t.v_g << " omega_q=" << t.omega_q << " d=" << t.d << "\n";
  for (const auto& line : extra) out << "# " << line << "\n";
  out << "k,omega\n";
  for (std::size_t i = 0; i < t.k.size(); ++i) out << t.k[i] << "," << t.omega[i] << "\n";
}

DispersionTable read_dispersion_csv(std::istream& in) {
  DispersionTable t;
  std::string line;
  bool have_meta = false, have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (have_meta) continue;
      std::istringstream ss(line.substr(1));
      std::string tok;
      int found = 0;
      while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const double val = std::stod(tok.substr(eq + 1));
        if (key == "gamma") t.gamma = val, ++found;
        else if (key == "v_g") t.v_g = val, ++found;
        else if (key == "omega_q") t.omega_q = val, ++found;
        else if (key == "d") t.d = val, ++found;
      }
      have_meta = found == 4;
      continue;
    }
    if (!have_header) {
      if (line.rfind("k,omega", 0) != 0) throw ConfigError("dispersion CSV lacks the k,omega header");
      have_header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("malformed dispersion CSV row: " + line);
    t.k.push_back(std::stod(line.substr(0, comma)));
    t.omega.push_back(std::stod(line.substr(comma + 1)));
  }
  if (!have_meta) throw ConfigError("dispersion CSV lacks the gamma/v_g/omega_q/d metadata line");
  if (t.k.size() < 2) throw ConfigError("dispersion CSV has fewer than two rows");
  return t;
}

DispersionTable tabulate(const DispersionRelation& disp, const PhysicalParams& p, double window, int samples) {
  DispersionTable t;
  t.gamma = p.gamma();
  t.v_g = p.v_g();
  t.omega_q = p.omega_q();
  t.d = p.d();
  t.k.resize(samples);
  t.omega.resize(samples);
  for (int i = 0; i < samples; ++i) {
    t.omega[i] = p.omega_q() - window + 2.0 * window * i / (samples - 1);
    t.k[i] = disp.wavenumber(t.omega[i]);
  }
  return t;
}

}  // namespace wgqst
