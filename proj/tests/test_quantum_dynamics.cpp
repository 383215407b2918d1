#include "bjj/quantum_dynamics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace bjj;

namespace {
constexpr double kPi = 3.14159265358979323846;
const DriveParams kStatic(0.0, 0.0, 0.5, 0.0);
const DriveParams kDefaults(0.4, 0.2, 0.5, 0.0);
}  // namespace

TEST_CASE("config validation") {
    PropagatorConfig c;
    c.steps_per_period = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    AveragingWindow w;
    w.span_periods = 0;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
    w = {};
    w.burn_in_periods = -1;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
}

TEST_CASE("zero interval is the identity") {
    const auto m = ModelParams::from_coupling(5, 5.0);
    const auto s = acs_state({1.0, 0.3}, 5);
    const auto r = propagate(s, 2.0, 2.0, m, kDefaults);
    CHECK(r.amplitudes() == s.amplitudes());
    CHECK_THROWS_AS(propagate(s, 2.0, 1.0, m, kDefaults), std::invalid_argument);
}

TEST_CASE("spin-1/2 Rabi oscillation") {
    const auto m = ModelParams::from_interaction(1, 0.0);
    const auto up = QuantumState::basis(1, 0.5);
    for (double t : {0.3, 1.0, 2.5, 7.9, 31.0}) {
        const auto s = propagate(up, 0.0, t, m, kStatic);
        CHECK(expect_jz(s) == doctest::Approx(std::cos(t)).epsilon(1e-8));
    }
}

TEST_CASE("static evolution matches the spectral oracle") {
    const auto m = ModelParams::from_coupling(2, 5.0);
    const RMatrix H = hamiltonian_at(m, kStatic, 0.0);
    std::mt19937 rng(3);
    const CVector psi = oracle::random_state(2, rng);
    for (double t : {0.5, 4.0, 40.0, 123.4}) {
        const auto s = propagate(QuantumState(2, psi), 0.0, t, m, kStatic);
        CHECK((s.amplitudes() - oracle::spectral_evolve(H, psi, t)).norm() < 1e-9);
    }
}

TEST_CASE("static energy is conserved") {
    const auto m = ModelParams::from_coupling(8, 5.0);
    const RMatrix H = hamiltonian_at(m, kStatic, 0.0);
    const auto s0 = acs_state({1.2, 0.4}, 8);
    const double e0 = s0.amplitudes().dot(H * s0.amplitudes()).real();
    const auto s1 = propagate(s0, 0.0, 1000.0, m, kStatic);
    CHECK(std::abs(s1.amplitudes().dot(H * s1.amplitudes()).real() - e0) < 1e-9);
}

TEST_CASE("driven evolution against a brute-force piecewise oracle") {
    // Fine piecewise-constant steps with exact exponentials converge to the
    // same solution; 20000 midpoint steps over 3 time units are accurate to ~1e-8.
    const auto m = ModelParams::from_coupling(3, 5.0);
    const auto s0 = acs_state({kPi / 2, kPi}, 3);
    const double t1 = 3.0;
    const int n = 20000;
    CVector psi = s0.amplitudes();
    for (int j = 0; j < n; ++j) {
        const double tm = (j + 0.5) * t1 / n;
        psi = oracle::spectral_evolve(hamiltonian_at(m, kDefaults, tm), psi, t1 / n);
    }
    const auto s = propagate(s0, 0.0, t1, m, kDefaults);
    CHECK((s.amplitudes() - psi).norm() < 1e-7);
}

TEST_CASE("whole-period strides agree with direct substepping") {
    const auto m = ModelParams::from_coupling(6, 5.0);
    const Propagator prop(m, kDefaults.with_phi(0.7));
    const auto s0 = acs_state({1.0, 2.0}, 6);
    const double t0 = 1.3, t1 = 5.2 * kDefaults.period();
    const auto a = prop.propagate(s0, t0, t1);
    const CVector b = prop.evolve(s0.amplitudes(), t0, t1);
    CHECK((a.amplitudes() - b).norm() < 1e-11);
}

TEST_CASE("norm is conserved over many periods") {
    const auto m = ModelParams::from_coupling(20, 5.0);
    const Propagator prop(m, kDefaults);
    const CMatrix U = prop.period_maps(1).monodromy();
    CVector psi = acs_state({kPi / 2, kPi}, 20).amplitudes();
    for (int k = 0; k < 10000; ++k) psi = U * psi;
    CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
}

TEST_CASE("halving the substep barely changes the imbalance at t = 100") {
    const auto m = ModelParams::from_coupling(20, 5.0);
    const auto s0 = acs_state({kPi / 2, kPi}, 20);
    PropagatorConfig fine;
    fine.steps_per_period = 512;
    const double a = expect_jz(propagate(s0, 0.0, 100.0, m, kDefaults));
    const double b = expect_jz(propagate(s0, 0.0, 100.0, m, kDefaults, fine));
    CHECK(std::abs(a - b) < 1e-7);
}

TEST_CASE("period maps compose to the monodromy") {
    const auto m = ModelParams::from_coupling(4, 5.0);
    const Propagator prop(m, kDefaults.with_phi(1.0));
    const auto maps = prop.period_maps(4);
    REQUIRE(maps.maps.size() == 4);
    CHECK((maps.at(0) - CMatrix::Identity(5, 5)).norm() == 0.0);
    // U(T) = U(T, 3T/4) U(3T/4, 0) and the later quarter equals the first
    // quarter of the next period shifted by 3T/4 in the drive.
    const CVector v = acs_state({0.4, 0.2}, 4).amplitudes();
    const CVector direct = prop.evolve(v, 0.0, 0.75 * maps.period);
    CHECK((maps.maps[2] * v - direct).norm() < 1e-12);
    const CMatrix U = maps.monodromy();
    CHECK((U.adjoint() * U - CMatrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(prop.period_maps(3), std::invalid_argument);
}

TEST_CASE("observable series starts balanced and pure") {
    const auto m = ModelParams::from_coupling(10, 5.0);
    const auto s0 = acs_state({kPi / 2, kPi}, 10);
    const auto series = observable_series(s0, 30.0, m, kDefaults);
    REQUIRE(!series.empty());
    CHECK(series[0].t == 0.0);
    CHECK(std::abs(series[0].delta_rho) < 1e-14);
    CHECK(series[0].depletion < 1e-12);
    const double dt = kDefaults.period() / 16;
    CHECK(series[1].t == doctest::Approx(dt));
    CHECK(series.size() == static_cast<std::size_t>(std::floor(30.0 / dt)) + 1);
    // Each sample matches an independent propagation to that time.
    const auto& smp = series[37];
    const auto s = propagate(s0, 0.0, smp.t, m, kDefaults);
    CHECK(smp.delta_rho == doctest::Approx(expect_jz(s)).epsilon(1e-10));
    CHECK(smp.depletion == doctest::Approx(reduced_density(s).depletion).epsilon(1e-9));
}

TEST_CASE("direct API nulls") {
    const auto m = ModelParams::from_coupling(2, 5.0);
    const auto s0 = acs_state({kPi / 2, kPi}, 2);
    AveragingWindow w;
    CHECK(std::abs(direct_api(s0, w, m, kDefaults.with_amplitudes(0.4, 0.0).with_phi(0.9))) <= 2e-3);
    CHECK(std::abs(direct_api(s0, w, m, kDefaults.with_phi(kPi / 2))) <= 2e-3);
}

TEST_CASE("window samples carry trapezoid weights summing to one") {
    const auto m = ModelParams::from_coupling(3, 5.0);
    const Propagator prop(m, kDefaults);
    const auto maps = prop.period_maps(8);
    AveragingWindow w;
    w.burn_in_periods = 3;
    w.span_periods = 70;
    w.samples_per_period = 8;
    double total = 0.0;
    std::size_t count = 0;
    double tmin = 1e300, tmax = -1e300;
    sample_window(acs_state({1.0, 1.0}, 3), w, maps, [&](const SampleBlock& b) {
        for (std::size_t i = 0; i < b.times.size(); ++i) {
            total += b.weights[i];
            tmin = std::min(tmin, b.times[i]);
            tmax = std::max(tmax, b.times[i]);
        }
        count += b.times.size();
    });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(count == 70 * 8 + 1);
    CHECK(tmin == doctest::Approx(3 * maps.period));
    CHECK(tmax == doctest::Approx(73 * maps.period));
}
