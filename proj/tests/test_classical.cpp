#include "bjj/classical.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bjj;

namespace {
constexpr double kPi = 3.14159265358979323846;
const DriveParams kStatic(0.0, 0.0, 0.5, 0.0);
const DriveParams kDefaults(0.4, 0.2, 0.5, 0.0);
}  // namespace

TEST_CASE("pendulum state round trip") {
    const auto s = ClassicalState::from_pendulum(0.3, 5.9, 2.0);
    CHECK(s.Z() == doctest::Approx(0.3));
    CHECK(s.phi() == doctest::Approx(5.9));
    CHECK(s.s.norm() == doctest::Approx(1.0));
    CHECK(ClassicalState::from_pendulum(0.0, -0.5).phi() == doctest::Approx(kTwoPi - 0.5));
    CHECK_THROWS_AS(ClassicalState::from_pendulum(1.2, 0.0), std::invalid_argument);
}

TEST_CASE("right-hand side examples") {
    const auto fixed = ClassicalState::from_pendulum(0.0, kPi);
    CHECK(classical_rhs(fixed.s, 0.0, 5.0, kStatic).norm() < 1e-15);
    const auto side = ClassicalState::from_pendulum(0.0, kPi / 2);
    CHECK(classical_rhs(side.s, 0.0, 5.0, kStatic).z() == doctest::Approx(-1.0));
    CHECK(pendulum_rhs(0.0, kPi / 2, 0.0, 5.0, kStatic).Zdot == doctest::Approx(-1.0));
}

TEST_CASE("Cartesian and pendulum equations agree") {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> uz(-0.99, 0.99), uphi(0.0, kTwoPi), ut(0.0, 20.0);
    for (int i = 0; i < 200; ++i) {
        const double Z = uz(rng), phi = uphi(rng), t = ut(rng);
        const auto st = ClassicalState::from_pendulum(Z, phi);
        const Eigen::Vector3d d = classical_rhs(st.s, t, 5.0, kDefaults.with_phi(0.4));
        const double r2 = st.s.x() * st.s.x() + st.s.y() * st.s.y();
        const double phidot = (st.s.x() * d.y() - st.s.y() * d.x()) / r2;
        const auto ref = pendulum_rhs(Z, phi, t, 5.0, kDefaults.with_phi(0.4));
        CHECK(std::abs(d.z() - ref.Zdot) < 1e-12);
        CHECK(std::abs(phidot - ref.phidot) < 1e-12);
    }
}

TEST_CASE("undriven fixed point stays put") {
    const auto tr = integrate_classical(ClassicalState::from_pendulum(0.0, 0.0), 1000.0, 5.0, kStatic);
    double zmax = 0.0;
    for (double z : tr.Z) zmax = std::max(zmax, std::abs(z));
    CHECK(zmax < 1e-8);
}

TEST_CASE("small oscillations of the rigid pendulum have period 2 pi") {
    const auto tr = integrate_classical(ClassicalState::from_pendulum(1e-3, 0.0), 60.0, 0.0, kStatic, {}, 0.01);
    // Downward zero crossings of Z, linearly interpolated.
    std::vector<double> cross;
    for (std::size_t i = 1; i < tr.size(); ++i) {
        if (tr.Z[i - 1] > 0.0 && tr.Z[i] <= 0.0) {
            cross.push_back(tr.t[i - 1] + tr.Z[i - 1] / (tr.Z[i - 1] - tr.Z[i]) * (tr.t[i] - tr.t[i - 1]));
        }
    }
    REQUIRE(cross.size() >= 5);
    const double period = (cross.back() - cross.front()) / static_cast<double>(cross.size() - 1);
    CHECK(period == doctest::Approx(kTwoPi).epsilon(0.01));
}

TEST_CASE("undriven energy and norm are conserved") {
    const auto init = ClassicalState::from_pendulum(0.4, 1.0);
    ClassicalIntegrator integ(5.0, kStatic, {}, init);
    const double e0 = classical_energy(init.s, 5.0);
    double worst = 0.0;
    for (int k = 1; k <= 100; ++k) {
        integ.advance_to(100.0 * k);
        worst = std::max(worst, std::abs(classical_energy(integ.state().s, 5.0) - e0));
    }
    CHECK(worst < 1e-7);
    CHECK(integ.max_norm_drift() < 1e-9);
    CHECK(integ.state().t == 1e4);
    CHECK_THROWS_AS(integ.advance_to(10.0), std::invalid_argument);
}

TEST_CASE("chaotic sea trajectory stays off the poles") {
    ClassicalIntegrator integ(5.0, kDefaults, {}, ClassicalState::from_pendulum(0.0, kPi));
    double zmax = 0.0;
    for (int k = 1; k <= 20000; ++k) {
        integ.advance_to(0.5 * k);
        zmax = std::max(zmax, std::abs(integ.state().Z()));
    }
    CHECK(zmax < 1.0);
    CHECK(zmax > 0.5);
    CHECK(integ.max_norm_drift() < 1e-9);
}

TEST_CASE("invalid integrator settings are rejected") {
    ClassicalConfig c;
    c.rel_tol = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK_THROWS_AS(integrate_classical(ClassicalState{}, -1.0, 5.0, kDefaults), std::invalid_argument);
    CHECK_THROWS_AS(psos(ClassicalState{}, 0, 5.0, kDefaults), std::invalid_argument);
}

TEST_CASE("step underflow raises an integration error") {
    ClassicalConfig c;
    c.rel_tol = c.abs_tol = 1e-30;
    c.min_step = 1e-3;
    ClassicalIntegrator integ(5.0, kDefaults, c, ClassicalState::from_pendulum(0.2, 1.0));
    CHECK_THROWS_AS(integ.advance_to(10.0), IntegrationError);
}

TEST_CASE("PSOS strobes once per period") {
    const auto init = ClassicalState::from_pendulum(0.0, 0.3);
    const auto d = psos(init, 50, 5.0, kDefaults);
    CHECK(d.size() == 50);
    ClassicalIntegrator integ(5.0, kDefaults, {}, init);
    integ.advance_to(7 * kDefaults.period());
    // Different step sequences, so agreement is to the integrator tolerance.
    CHECK(std::abs(d.Z[6] - integ.state().Z()) < 1e-7);
    CHECK(std::abs(d.phi[6] - integ.state().phi()) < 1e-7);
    for (double phi : d.phi) {
        CHECK(phi >= 0.0);
        CHECK(phi < kTwoPi);
    }
}

TEST_CASE("undriven PSOS points lie on one energy curve") {
    const auto init = ClassicalState::from_pendulum(0.3, 0.5);
    const auto d = psos(init, 200, 5.0, kStatic);
    const double e0 = classical_energy(init.s, 5.0);
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double r = std::sqrt(1.0 - d.Z[k] * d.Z[k]);
        CHECK(std::abs(2.5 * d.Z[k] * d.Z[k] - r * std::cos(d.phi[k]) - e0) < 1e-7);
    }
}

TEST_CASE("classical imbalance vanishes without the second harmonic") {
    AveragingWindow w;
    w.burn_in_periods = 80;
    w.span_periods = 7958;  // about 1e5 time units
    w.samples_per_period = 128;
    for (double phi : {0.0, 1.9}) {
        CHECK(std::abs(classical_api(ClassicalState::from_pendulum(0.0, kPi), w, 5.0,
                                     kDefaults.with_amplitudes(0.4, 0.0).with_phi(phi))) <= 0.02);
    }
}

TEST_CASE("regular-orbit time averages converge with the tolerance") {
    AveragingWindow w;
    w.burn_in_periods = 80;
    w.span_periods = 2000;
    w.samples_per_period = 128;
    ClassicalConfig tight;
    tight.rel_tol = tight.abs_tol = 1e-12;
    const auto init = ClassicalState::from_pendulum(0.0, 0.0);
    const double a = classical_api(init, w, 5.0, kDefaults);
    const double b = classical_api(init, w, 5.0, kDefaults, tight);
    CHECK(std::abs(a - b) < 1e-6);
}

TEST_CASE("histogram and PDF") {
    PdfGrid g{20, 10};
    PhaseHistogram h(g);
    for (int i = 0; i < 5; ++i) h.add(0.33, 1.0);
    const auto pdf = phase_pdf(h);
    CHECK(pdf.density.sum() * g.bin_area() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((pdf.density.array() > 0).count() == 1);
    CHECK(api_from_pdf(pdf) == doctest::Approx(g.Z_center(13)));

    PhaseHistogram sym(g);
    for (int i = 0; i < g.nZ; ++i) sym.add(g.Z_center(i), 2.0, 1.0 + std::abs(g.Z_center(i)));
    CHECK(std::abs(api_from_pdf(phase_pdf(sym))) < 1e-15);

    CHECK_THROWS_AS(phase_pdf(PhaseHistogram(g)), std::invalid_argument);
    CHECK_THROWS_AS(phase_pdf(PSOSData{}, g), std::invalid_argument);
    PhaseHistogram other(PdfGrid{5, 5});
    CHECK_THROWS_AS(h.merge(other), std::invalid_argument);
    h.merge(sym);
    CHECK(h.total() == doctest::Approx(5.0 + sym.total()));
}

TEST_CASE("PDF imbalance matches the direct average") {
    AveragingWindow w;
    w.burn_in_periods = 80;
    w.span_periods = 2000;
    w.samples_per_period = 128;
    const auto init = ClassicalState::from_pendulum(0.0, kPi);
    const double direct = classical_api(init, w, 5.0, kDefaults);
    const auto pdf = classical_pdf(init, w, 5.0, kDefaults);
    CHECK(pdf.density.sum() * pdf.grid.bin_area() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(api_from_pdf(pdf) - direct) <= 0.01);
    CHECK(pdf.density.minCoeff() >= 0.0);
}
