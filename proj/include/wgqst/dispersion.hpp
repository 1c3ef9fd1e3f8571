#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wgqst/model.hpp"

namespace wgqst {

/// Shape-preserving piecewise cubic (Fritsch-Carlson slopes) through strictly
/// increasing abscissae and strictly increasing ordinates.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;
  /// Exact inverse of operator() on [y.front(), y.back()].
  double inverse(double y) const;

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }

 private:
  std::size_t segment(const std::vector<double>& v, double t) const;
  std::vector<double> x_, y_, m_;
};

enum class DispersionKind { Linear, AnalyticFar, AnalyticNear, Tabulated };

/// k(omega) = (delta_t/d) omega - (2/d) arctan((omega - omega_q)/rate)
struct ArctanShape {
  double delta_t;
  double d;
  double rate;
  double omega_q;
};

class DispersionRelation {
 public:
  static DispersionRelation linear(double v_g);
  static DispersionRelation analytic_far(const PhysicalParams& p);
  /// rate gamma_2; delta_t defaults to d/v_g + 2/gamma.
  static DispersionRelation analytic_near(const PhysicalParams& p,
                                          std::optional<double> delta_t = std::nullopt);
  static DispersionRelation arctan(DispersionKind kind, ArctanShape shape);
  /// Throws NonInvertibleError unless both columns strictly increase.
  static DispersionRelation tabulated(std::vector<double> k, std::vector<double> omega);

  DispersionKind kind() const { return kind_; }
  double wavenumber(double omega) const;
  double frequency(double k) const;
  /// d omega / d k at frequency omega.
  double group_velocity(double omega) const;

  const ArctanShape& shape() const { return shape_; }
  const MonotoneCubic& table() const { return *table_; }
  /// Transfer time built into the design (0 for linear and tabulated).
  double design_delta_t() const { return shape_.delta_t; }

 private:
  DispersionKind kind_ = DispersionKind::Linear;
  double v_g_ = 1.0;
  ArctanShape shape_{0.0, 1.0, 1.0, 0.0};
  std::shared_ptr<const MonotoneCubic> table_;
};

double analytic_dispersion_far(double omega, double d, double gamma, double omega_q, double v_g);
double analytic_dispersion_near(double omega, double d, double gamma, double omega_q, double v_g);

struct BiexpSolution {
  double gamma1;
  double gamma2;
  double w1;
  double w2;
  double xi;
};

BiexpSolution biexp_rates(double d, double gamma, double v_g);

/// Spectrum of the field just after the first emitter: two-term sum
/// with the signed weights (+w1, -w2) of the emitter amplitude.
cplx pulse_spectrum_corrected(double delta, double d, double gamma, double v_g);

/// Where monotonicity broke down.
struct NonInvertible {
  std::string reason;
  std::size_t index = 0;
  double omega = 0.0;
};

using DispersionOrFailure = std::variant<DispersionRelation, NonInvertible>;

/// Tabulated k(omega) from the phase of the corrected spectrum, sampled on
/// omega_q +- window with the given number of points.
DispersionOrFailure corrected_dispersion(const PhysicalParams& p, double window = 40.0,
                                         int samples = 20000);

/// Monotone evaluator from (k, omega) pairs sorted in k.
DispersionOrFailure invert_dispersion(const std::vector<double>& k, const std::vector<double>& omega);

struct DispersionTable {
  std::vector<double> k;
  std::vector<double> omega;
  double gamma = 1.0, v_g = 1.0, omega_q = kDefaultOmegaQ, d = 0.0;
};

/// Two-column CSV with a metadata line "# gamma=.. v_g=.. omega_q=.. d=..".
void write_dispersion_csv(std::ostream& out, const DispersionTable& table,
                          const std::vector<std::string>& extra_header = {});
DispersionTable read_dispersion_csv(std::istream& in);

/// Sample a dispersion on omega_q +- window into a table.
DispersionTable tabulate(const DispersionRelation& disp, const PhysicalParams& p, double window,
                         int samples);

}  // namespace wgqst
