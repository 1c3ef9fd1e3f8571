#include "wgqst/analytic.hpp"

#include <cmath>
#include <numbers>

#include "wgqst/errors.hpp"

namespace wgqst {

namespace {
constexpr cplx kI{0.0, 1.0};
}

cplx markovian_pulse_time(double t, double gamma, double omega_q) {
  if (t < 0.0) return 0.0;
  return std::exp(-(gamma + kI * omega_q) * t);
}

cplx markovian_pulse_frequency(double omega, double gamma, double omega_q) {
  return 1.0 / (gamma - kI * (omega - omega_q));
}

cplx target_pulse_time(double t, double gamma, double omega_q, double delta_t) {
  if (t > delta_t) return 0.0;
  return std::exp((gamma - kI * omega_q) * (t - delta_t));
}

cplx target_pulse_frequency(double omega, double gamma, double omega_q, double delta_t) {
  return std::polar(1.0, omega * delta_t) / (gamma + kI * (omega - omega_q));
}

PulseProfile PulseProfile::decaying(PulseDomain domain, double gamma, double omega_q) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  PulseProfile p;
  p.kind_ = PulseKind::Decaying;
  p.domain_ = domain;
  p.gamma_ = gamma;
  p.omega_q_ = omega_q;
  return p;
}

PulseProfile PulseProfile::target(PulseDomain domain, double gamma, double omega_q, double delta_t) {
  PulseProfile p = decaying(domain, gamma, omega_q);
  p.kind_ = PulseKind::Target;
  p.delta_t_ = delta_t;
  return p;
}

PulseProfile PulseProfile::biexponential(PulseDomain domain, double d, double gamma, double v_g, double omega_q) {
  PulseProfile p = decaying(domain, gamma, omega_q);
  p.kind_ = PulseKind::Biexponential;
  p.biexp_ = biexp_rates(d, gamma, v_g);
  return p;
}

cplx PulseProfile::operator()(double x) const {
  switch (kind_) {
    case PulseKind::Decaying:
      return domain_ == PulseDomain::Time ? markovian_pulse_time(x, gamma_, omega_q_)
                                          : markovian_pulse_frequency(x, gamma_, omega_q_);
    case PulseKind::Target:
      return domain_ == PulseDomain::Time ? target_pulse_time(x, gamma_, omega_q_, delta_t_)
                                          : target_pulse_frequency(x, gamma_, omega_q_, delta_t_);
    case PulseKind::Biexponential: {
      const auto& b = biexp_;
      if (domain_ == PulseDomain::Time) {
        if (x < 0.0) return 0.0;
        return std::exp(-kI * omega_q_ * x) * (b.w1 * std::exp(-b.gamma1 * x) - b.w2 * std::exp(-b.gamma2 * x));
      }
      const cplx s = -kI * (x - omega_q_);
      return b.w1 / (b.gamma1 + s) - b.w2 / (b.gamma2 + s);
    }
  }
  return 0.0;
}

cplx self_energy(cplx delta, double d, double gamma, double v_g, double delta_t) {
  if (!(d > 0.0)) throw DomainError("separation must be positive");
  // pi g^2 = gamma v_g
  return -(kI * gamma * v_g / d) * (delta_t + 2.0 / (kI * delta - gamma));
}

cplx c1_resolvent(double t, double d, double gamma, double v_g, double omega_q) {
  if (t < 0.0) throw DomainError("time must be non-negative");
  return PulseProfile::biexponential(PulseDomain::Time, d, gamma, v_g, omega_q)(t);
}

cplx photon_amplitude(double delta, double t, const PhysicalParams& p, double omega_q) {
  if (t < 0.0) throw DomainError("time must be non-negative");
  const BiexpSolution b = biexp_rates(p.d(), p.gamma(), p.v_g());
  const cplx free = std::exp(-kI * (delta + omega_q) * t);
  auto term = [&](double rate) { return (std::exp(-(rate + kI * omega_q) * t) - free) / (delta + kI * rate); };
  return -p.g() * (b.w1 * term(b.gamma1) - b.w2 * term(b.gamma2));
}

cplx markov_cascade_c2(double t, double gamma, double d, double v_g) {
  const double s = t - d / v_g;
  if (s < 0.0) return 0.0;
  return -2.0 * gamma * s * std::exp(-gamma * s);
}

double markov_limit_max() { return 4.0 / (std::numbers::e * std::numbers::e); }

}  // namespace wgqst
