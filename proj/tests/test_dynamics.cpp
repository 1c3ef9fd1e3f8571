#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "wgqst/dispersion.hpp"
#include "wgqst/dynamics.hpp"
#include "wgqst/errors.hpp"

using namespace wgqst;

namespace {

struct Toy {
  PhysicalParams p = PhysicalParams::standard(2.0);
  DispersionRelation disp = DispersionRelation::analytic_far(p);
  SimulationGrid grid = build_grid(p, disp, 300, 30.0);
};

}  // namespace

TEST_CASE("bordered and dense assemblies agree") {
  Toy toy;
  const auto b = assemble_bordered(toy.grid, toy.disp, toy.p, 2);
  const auto h = assemble_hamiltonian(toy.grid, toy.disp, toy.p, 2);
  CHECK((b.dense() - h).cwiseAbs().maxCoeff() == 0.0);
  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  const auto c = qubit_couplings(toy.grid, toy.p, 2);
  const double expect = toy.p.g() * std::sqrt(toy.grid.delta_k());
  CHECK(std::abs(c(1, 7)) == doctest::Approx(expect));
  CHECK(std::arg(c(1, 7) / c(0, 7)) == doctest::Approx(std::remainder(toy.grid.k(7) * 2.0, 2.0 * std::numbers::pi)).epsilon(1e-9));
}

TEST_CASE("structured and dense eigensystems give the same evolution") {
  Toy toy;
  const auto b = assemble_bordered(toy.grid, toy.disp, toy.p, 2);
  const EigenSystem s = diagonalize(b);
  const EigenSystem d = diagonalize(b.dense());
  CHECK(s.structured());
  CHECK(!d.structured());
  CHECK((s.energies() - d.energies()).cwiseAbs().maxCoeff() < 1e-11);
  const auto psi0 = StateVector::excited(0, 2, toy.grid.size());
  for (double t : {0.0, 1.0, 4.0, 9.0}) {
    const auto a = evolve(s, psi0, t), c = evolve(d, psi0, t);
    CHECK((a.amplitudes() - c.amplitudes()).norm() < 1e-10);
    CHECK(std::abs(a.norm() - 1.0) < 1e-12);
  }
  const Eigen::MatrixXcd u = s.vectors();
  const Eigen::Index n = u.rows();
  CHECK((u.adjoint() * u - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("amplitude series matches pointwise evaluation") {
  Toy toy;
  const Evolution evo(diagonalize(assemble_bordered(toy.grid, toy.disp, toy.p, 2)),
                      StateVector::excited(0, 2, toy.grid.size()));
  const auto a = evo.amplitude_series(0.25, 0.003, 1500);
  double worst = 0.0;
  for (int i = 0; i < 1500; i += 13)
    for (int q = 0; q < 2; ++q) worst = std::max(worst, std::abs(a(i, q) - evo.qubit_amplitude(q, 0.25 + 0.003 * i)));
  CHECK(worst < 1e-12);
  const auto st = evo.state(3.0);
  CHECK(std::abs(st.c2() - evo.qubit_amplitude(1, 3.0)) < 1e-13);
}

TEST_CASE("spontaneous emission into a linear band") {
  // One emitter, wide flat band: |c1|^2 = exp(-2 gamma t).
  const auto p = PhysicalParams::standard(1.0);
  const auto lin = DispersionRelation::linear(1.0);
  const auto grid = build_grid(p, lin, 32001, 1600.0);
  const Evolution evo(diagonalize(assemble_bordered(grid, lin, p, 1)), StateVector::excited(0, 1, grid.size()));
  for (double t : {0.5, 1.0, 2.0, 3.0})
    CHECK(std::abs(std::abs(evo.qubit_amplitude(0, t)) - std::exp(-t)) < 1e-3);
}

TEST_CASE("maximum transfer refines the scan") {
  Toy toy;
  const auto eig = diagonalize(assemble_bordered(toy.grid, toy.disp, toy.p, 2));
  const auto psi0 = StateVector::excited(0, 2, toy.grid.size());
  const auto r = max_transfer(eig, psi0, {0.0, 8.0}, 0.05);
  REQUIRE(!r.trajectory.empty());
  for (const auto& s : r.trajectory) CHECK(s.p2 <= r.p_star + 1e-12);
  const auto evo = Evolution(eig, psi0);
  CHECK(evo.qubit_population(1, r.t_star) == doctest::Approx(r.p_star).epsilon(1e-14));
  CHECK(evo.qubit_population(1, r.t_star + 1e-3) <= r.p_star + 1e-12);
  CHECK(evo.qubit_population(1, r.t_star - 1e-3) <= r.p_star + 1e-12);
  CHECK_THROWS_AS(max_transfer(eig, psi0, {1.0, 1.0}), DomainError);
}

TEST_CASE("time window stays below the recurrence") {
  Toy toy;
  const auto w = default_time_window(toy.grid, toy.p, 4.0, 1.0);
  CHECK(w.lo == 0.0);
  CHECK(w.hi <= 0.8 * toy.grid.recurrence_time(1.0) + 1e-12);
  CHECK(w.hi <= 14.0 + 1e-12);
}

TEST_CASE("field snapshot of the excited qubit is empty") {
  Toy toy;
  const auto psi = StateVector::excited(0, 2, toy.grid.size());
  const std::vector<double> x{0.0, 1.0};
  for (const auto& e : field_snapshot(psi, x, toy.grid)) CHECK(e == cplx(0.0));
}
