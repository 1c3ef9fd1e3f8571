#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "wgqst/dispersion.hpp"
#include "wgqst/errors.hpp"

using namespace wgqst;

namespace {

// Independent oracle for the arctan designs.
double arctan_k(double w, double d, double dt, double rate, double wq) {
  return dt / d * w - 2.0 / d * std::atan((w - wq) / rate);
}

}  // namespace

TEST_CASE("far-field design matches its closed form") {
  const auto p = PhysicalParams::standard(5.0);
  const auto disp = DispersionRelation::analytic_far(p);
  CHECK(disp.design_delta_t() == doctest::Approx(7.0));
  for (double dw : {-30.0, -1.0, 0.0, 0.3, 12.0}) {
    const double w = p.omega_q() + dw;
    const double k = arctan_k(w, 5.0, 7.0, 1.0, p.omega_q());
    CHECK(disp.wavenumber(w) == doctest::Approx(k).epsilon(1e-14));
    CHECK(analytic_dispersion_far(w, 5.0, 1.0, p.omega_q(), 1.0) == doctest::Approx(k).epsilon(1e-14));
    CHECK(disp.frequency(k) == doctest::Approx(w).epsilon(1e-14));
  }
  // The resonant group velocity is the bare one.
  CHECK(disp.group_velocity(p.omega_q()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(disp.group_velocity(p.omega_q() + 3.0) < 1.0);
}

TEST_CASE("near-field design uses the slow rate") {
  const auto p = PhysicalParams::standard(0.2);
  const auto b = biexp_rates(0.2, 1.0, 1.0);
  const auto disp = DispersionRelation::analytic_near(p);
  const double dt = disp.design_delta_t();
  const double w = p.omega_q() + 0.7;
  CHECK(disp.wavenumber(w) == doctest::Approx(arctan_k(w, 0.2, dt, b.gamma2, p.omega_q())).epsilon(1e-13));
  const auto custom = DispersionRelation::analytic_near(p, 3.0);
  CHECK(custom.design_delta_t() == 3.0);
}

TEST_CASE("biexponential rates satisfy their identities") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 1.5);
  for (int i = 0; i < 50; ++i) {
    const double d = std::pow(10.0, u(rng));
    const auto b = biexp_rates(d, 1.0, 1.0);
    CHECK(std::abs(b.gamma1 * b.gamma2 - 1.0) < 1e-12);
    CHECK(std::abs(b.w1 - b.w2 - 1.0) < 1e-12);
    CHECK(b.gamma1 < 1.0);
    CHECK(b.gamma2 > 1.0);
    CHECK(b.gamma1 + b.gamma2 == doctest::Approx(2.0 * b.xi).epsilon(1e-12));
  }
  CHECK_THROWS_AS(biexp_rates(0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("monotone cubic interpolates and inverts") {
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(i * 0.5);
    y.push_back(std::exp(0.2 * i) + i);
  }
  const MonotoneCubic f(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(f(x[i]) == doctest::Approx(y[i]).epsilon(1e-15));
  for (double t = 0.1; t < 14.4; t += 0.37) {
    CHECK(f.inverse(f(t)) == doctest::Approx(t).epsilon(1e-12));
    CHECK(f.derivative(t) > 0.0);
  }
  CHECK_THROWS_AS(f(-1.0), DomainError);
  CHECK_THROWS_AS(MonotoneCubic({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0}), NonInvertibleError);
}

TEST_CASE("tabulated dispersions") {
  CHECK_THROWS_AS(DispersionRelation::tabulated({1.0, 2.0, 3.0}, {1.0, 1.0, 2.0}), NonInvertibleError);
  const auto p = PhysicalParams::standard(5.0);
  const auto far = DispersionRelation::analytic_far(p);
  const DispersionTable t = tabulate(far, p, 20.0, 4001);
  const auto tab = DispersionRelation::tabulated(t.k, t.omega);
  for (double dw : {-15.0, 0.0, 4.2})
    CHECK(tab.wavenumber(p.omega_q() + dw) == doctest::Approx(far.wavenumber(p.omega_q() + dw)).epsilon(1e-9));

  std::stringstream io;
  write_dispersion_csv(io, t, {"note"});
  const DispersionTable back = read_dispersion_csv(io);
  REQUIRE(back.k.size() == t.k.size());
  CHECK(back.d == 5.0);
  CHECK(back.omega_q == p.omega_q());
  for (std::size_t i = 0; i < t.k.size(); i += 97) {
    CHECK(back.k[i] == t.k[i]);
    CHECK(back.omega[i] == t.omega[i]);
  }
  std::stringstream bad("k,omega\n1,2\n");
  CHECK_THROWS_AS(read_dispersion_csv(bad), ConfigError);
}

TEST_CASE("corrected dispersion invertibility") {
  const auto ok = corrected_dispersion(PhysicalParams::standard(5.0));
  CHECK(std::holds_alternative<DispersionRelation>(ok));
  const auto bad = corrected_dispersion(PhysicalParams::standard(1.0));
  REQUIRE(std::holds_alternative<NonInvertible>(bad));
  CHECK(!std::get<NonInvertible>(bad).reason.empty());
}

TEST_CASE("far-field k-span excess over the linear band") {
  for (double d : {1.0, 5.0}) {
    const auto p = PhysicalParams::standard(d);
    const auto far = DispersionRelation::analytic_far(p);
    const double w = 40.0;
    const double span = far.wavenumber(p.omega_q() + w) - far.wavenumber(p.omega_q() - w);
    CHECK(span - 2.0 * w == doctest::Approx(2.0 / d * (2.0 * w - 2.0 * std::atan(w))).epsilon(1e-10));
  }
}

TEST_CASE("weight limits implied by the rate formulas") {
  const auto big = biexp_rates(1e6, 1.0, 1.0), small = biexp_rates(1e-6, 1.0, 1.0);
  CHECK(big.w1 == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(big.w2 == doctest::Approx(-0.5).epsilon(1e-3));
  CHECK(big.gamma1 == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(small.w1 == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(small.w2 == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("corrected spectrum") {
  for (double d : {0.5, 2.0, 8.0})
    for (double x : {0.1, 1.0, 3.7}) {
      // |c(delta)| is even in delta.
      CHECK(std::abs(pulse_spectrum_corrected(x, d, 1.0, 1.0)) ==
            doctest::Approx(std::abs(pulse_spectrum_corrected(-x, d, 1.0, 1.0))).epsilon(1e-14));
    }
  // Not a Lorentzian at moderate d: the shape differs from 1/(gamma^2 + delta^2).
  const double r0 = std::norm(pulse_spectrum_corrected(0.0, 1.0, 1.0, 1.0));
  const double r2 = std::norm(pulse_spectrum_corrected(2.0, 1.0, 1.0, 1.0));
  CHECK(std::abs(r2 / r0 - 1.0 / 5.0) > 1e-2);

  // At large d the corrected map approaches the far-field arctan design.
  const auto p = PhysicalParams::standard(200.0);
  const auto corr = corrected_dispersion(p, 10.0, 4000);
  REQUIRE(std::holds_alternative<DispersionRelation>(corr));
  const auto& c = std::get<DispersionRelation>(corr);
  const auto far = DispersionRelation::analytic_far(p);
  const double ref = far.wavenumber(p.omega_q());
  for (double dw : {-5.0, -1.0, 2.0})
    CHECK((c.wavenumber(p.omega_q() + dw) - c.wavenumber(p.omega_q())) ==
          doctest::Approx(far.wavenumber(p.omega_q() + dw) - ref).epsilon(1e-2));
}
