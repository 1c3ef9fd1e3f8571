#pragma once

#include "wgqst/dispersion.hpp"
#include "wgqst/model.hpp"

namespace wgqst {

enum class PulseDomain { Time, Frequency };
enum class PulseKind { Decaying, Target, Biexponential };

/// Closed-form emitted (decaying, biexponential) or absorbed (target) field
/// envelope. Passing omega_q = 0 gives the rotating-frame envelope in time and
/// makes the frequency argument a detuning.
class PulseProfile {
 public:
  static PulseProfile decaying(PulseDomain domain, double gamma, double omega_q);
  static PulseProfile target(PulseDomain domain, double gamma, double omega_q, double delta_t);
  /// Emitter amplitude w1 e^{-g1 t} - w2 e^{-g2 t} for separation d.
  static PulseProfile biexponential(PulseDomain domain, double d, double gamma, double v_g, double omega_q);

  PulseKind kind() const { return kind_; }
  PulseDomain domain() const { return domain_; }
  cplx operator()(double x) const;

 private:
  PulseKind kind_ = PulseKind::Decaying;
  PulseDomain domain_ = PulseDomain::Time;
  double gamma_ = 1.0, omega_q_ = 0.0, delta_t_ = 0.0;
  BiexpSolution biexp_{};
};

cplx markovian_pulse_time(double t, double gamma, double omega_q);
cplx markovian_pulse_frequency(double omega, double gamma, double omega_q);
cplx target_pulse_time(double t, double gamma, double omega_q, double delta_t);
cplx target_pulse_frequency(double omega, double gamma, double omega_q, double delta_t);

/// Self-energy of the first emitter under the far-field dispersion, continued
/// from the upper half plane.
cplx self_energy(cplx delta, double d, double gamma, double v_g, double delta_t);

/// Exact emitter amplitude under the far-field dispersion; omega_q = 0 for the
/// rotating frame.
cplx c1_resolvent(double t, double d, double gamma, double v_g, double omega_q = 0.0);

/// Emitted photon amplitude at mode detuning delta (rotating frame when
/// omega_q = 0). Continuum normalization: sum |c|^2 dk -> 1 - |c1|^2.
cplx photon_amplitude(double delta, double t, const PhysicalParams& p, double omega_q = 0.0);

/// Unmodulated cascade: second-emitter amplitude for a Markovian pulse.
cplx markov_cascade_c2(double t, double gamma, double d, double v_g);

/// Best single-pass transfer without dispersion engineering.
double markov_limit_max();

}  // namespace wgqst
