#include "bjj/floquet.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <iostream>
#include <sstream>

using namespace bjj;

namespace {
constexpr double kPi = 3.14159265358979323846;
const DriveParams kDefaults(0.4, 0.2, 0.5, 0.0);

std::vector<double> grid(int n) {
    std::vector<double> g;
    for (int k = 0; k < n; ++k) g.push_back(kTwoPi * k / n);
    return g;
}
}  // namespace

TEST_CASE("quasi-energy folding is half open") {
    CHECK(fold_quasi_energy(0.25, 0.5) == doctest::Approx(-0.25));
    CHECK(fold_quasi_energy(-0.25, 0.5) == doctest::Approx(-0.25));
    CHECK(fold_quasi_energy(0.6, 0.5) == doctest::Approx(0.1));
    CHECK(fold_quasi_energy(-1.13, 0.5) == doctest::Approx(-0.13));
}

TEST_CASE("undriven spin-1/2 monodromy is exp(i Jx T)") {
    const DriveParams p(0.0, 0.0, 0.7, 0.0);
    const auto m = ModelParams::from_interaction(1, 0.0);
    const CMatrix U = monodromy(m, p);
    const double T = p.period();
    Eigen::Matrix2cd ref;
    ref << std::cos(T / 2), cplx(0, std::sin(T / 2)), cplx(0, std::sin(T / 2)), std::cos(T / 2);
    CHECK((U - ref).cwiseAbs().maxCoeff() < 1e-12);
    const auto d = floquet_spectrum(U, p.omega());
    CHECK(d.quasi_energies[0] == doctest::Approx(fold_quasi_energy(0.5, 0.7)));
    CHECK(d.quasi_energies[1] == doctest::Approx(fold_quasi_energy(-0.5, 0.7)));
}

TEST_CASE("monodromy is unitary and converged") {
    const auto m = ModelParams::from_coupling(2, 5.0);
    const CMatrix U = monodromy(m, kDefaults);
    CHECK((U * U.adjoint() - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    PropagatorConfig fine;
    fine.steps_per_period = 1024;
    const auto a = floquet_spectrum(U, 0.5);
    const auto b = floquet_spectrum(monodromy(m, kDefaults, fine), 0.5);
    CHECK((a.quasi_energies - b.quasi_energies).cwiseAbs().maxCoeff() < 1e-8);

    std::mt19937 rng(11);
    const CVector v = oracle::random_state(2, rng);
    const auto s = propagate(QuantumState(2, v), 0.0, kDefaults.period(), m, kDefaults);
    CHECK((s.amplitudes() - U * v).norm() < 1e-9);
}

TEST_CASE("identity map has zero quasi-energies and is flagged") {
    const auto d = floquet_spectrum(CMatrix::Identity(4, 4), 0.5);
    CHECK(d.quasi_energies.cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.degenerate_flag);
    CHECK_THROWS_AS(mode_weights(QuantumState::basis(3, 0.5), d), DegenerateSpectrumError);
}

TEST_CASE("spectrum structure and ordering") {
    const auto m = ModelParams::from_coupling(2, 5.0);
    const auto d = floquet_decompose(m, kDefaults);
    REQUIRE(d.size() == 3);
    CHECK(!d.degenerate_flag);
    for (Eigen::Index a = 0; a < 3; ++a) {
        CHECK(d.quasi_energies[a] >= -0.25);
        CHECK(d.quasi_energies[a] < 0.25);
        if (a > 0) CHECK(d.quasi_energies[a] > d.quasi_energies[a - 1]);
        Eigen::Index k = 0;
        d.modes0.col(a).cwiseAbs().maxCoeff(&k);
        CHECK(d.modes0(k, a).imag() == 0.0);
        CHECK(d.modes0(k, a).real() > 0.0);
    }
    CHECK((d.modes0.adjoint() * d.modes0 - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("per-mode imbalances at the default drive are frozen") {
    // Regression values of the three-mode decomposition at N = 2, phi = 0.
    const auto d = floquet_decompose(ModelParams::from_coupling(2, 5.0), kDefaults);
    CHECK(d.mode_apis[0] == doctest::Approx(2.21254978038e-02).epsilon(1e-6));
    CHECK(d.mode_apis[1] == doctest::Approx(3.45885017499e-01).epsilon(1e-6));
    CHECK(d.mode_apis[2] == doctest::Approx(-3.68010515303e-01).epsilon(1e-6));
}

TEST_CASE("mirror partner has the same spectrum") {
    const auto m = ModelParams::from_coupling(2, 5.0);
    for (double phi : {0.3, 1.2, 2.9}) {
        const auto a = floquet_spectrum(monodromy(m, kDefaults.with_phi(phi)), 0.5);
        const auto b = floquet_spectrum(monodromy(m, kDefaults.with_phi(-phi)), 0.5);
        CHECK((a.quasi_energies - b.quasi_energies).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("mode imbalance nulls for small N") {
    for (int N : {2, 3}) {
        const auto m = ModelParams::from_coupling(N, 5.0);
        for (double phi : grid(8)) {
            const auto d = floquet_decompose(m, kDefaults.with_amplitudes(0.4, 0.0).with_phi(phi));
            CHECK(d.mode_apis.cwiseAbs().maxCoeff() <= 1e-8);
        }
        CHECK(floquet_decompose(m, kDefaults.with_phi(kPi / 2)).mode_apis.cwiseAbs().maxCoeff() <= 1e-8);
        CHECK(floquet_decompose(m, kDefaults.with_phi(3 * kPi / 2)).mode_apis.cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("symmetry-adapted decompositions resolve the N = 20 doublets") {
    const auto m = ModelParams::from_coupling(20, 5.0);
    const auto tr = floquet_decompose_time_reversal(m, kDefaults.with_phi(kPi / 2));
    CHECK(tr.degenerate_flag);
    CHECK(tr.mode_apis.cwiseAbs().maxCoeff() <= 1e-8);
    const auto par = floquet_decompose_parity(m, kDefaults.with_amplitudes(0.4, 0.0));
    CHECK(par.mode_apis.cwiseAbs().maxCoeff() <= 1e-8);
    // Same quasi-energies as the plain decomposition.
    const auto plain = floquet_decompose(m, kDefaults.with_phi(kPi / 2));
    CHECK((plain.quasi_energies - tr.quasi_energies).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((tr.modes0.adjoint() * tr.modes0 - CMatrix::Identity(21, 21)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK_THROWS_AS(floquet_decompose_parity(m, kDefaults), std::invalid_argument);
    CHECK_THROWS_AS(floquet_decompose_time_reversal(m, kDefaults), std::invalid_argument);
}

TEST_CASE("clustered API is basis independent on symmetric doublets") {
    const auto m = ModelParams::from_coupling(20, 5.0);
    const auto s0 = acs_state({kPi / 2, kPi}, 20);
    const auto d = floquet_decompose_symmetric(m, kDefaults.with_phi(3 * kPi / 2));
    CHECK_THROWS_AS(api_floquet(s0, d), DegenerateSpectrumError);
    CHECK(std::abs(api_floquet_clustered(s0, d)) <= 1e-8);
    auto broken = d;
    broken.mode_apis[0] = 0.5;
    broken.quasi_energies[1] = broken.quasi_energies[0];
    CHECK_THROWS_AS(api_floquet_clustered(s0, broken), DegenerateSpectrumError);
}

TEST_CASE("weights sum to one and single out a mode") {
    const auto m = ModelParams::from_coupling(4, 5.0);
    const auto d = floquet_decompose(m, kDefaults.with_phi(0.8));
    std::mt19937 rng(5);
    const auto w = mode_weights(QuantumState(4, oracle::random_state(4, rng)), d).weights;
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(w.minCoeff() >= 0.0);
    const auto e = mode_weights(QuantumState::normalized(4, d.modes0.col(2)), d).weights;
    CHECK(e[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weight mirror relations for N = 2") {
    const auto m = ModelParams::from_coupling(2, 5.0);
    const auto sym = acs_state({kPi / 2, kPi}, 2);
    const auto a = acs_state({kPi / 2, 0.9 * kPi}, 2);
    const auto b = acs_state({kPi / 2, 1.1 * kPi}, 2);
    for (double phi : grid(9)) {
        const auto dp = floquet_decompose(m, kDefaults.with_phi(phi));
        const auto dm = floquet_decompose(m, kDefaults.with_phi(-phi));
        const auto pr = pair_modes(dp, dm);
        const auto wp = mode_weights(sym, dp).weights, wm = mode_weights(sym, dm).weights;
        const auto xp = mode_weights(a, dp).weights, xm = mode_weights(b, dm).weights;
        for (Eigen::Index i = 0; i < 3; ++i) {
            CHECK(std::abs(wp[i] - wm[pr[static_cast<std::size_t>(i)]]) < 1e-8);
            CHECK(std::abs(xp[i] - xm[pr[static_cast<std::size_t>(i)]]) < 1e-8);
        }
    }
}

TEST_CASE("API examples") {
    const auto m = ModelParams::from_coupling(2, 5.0);
    std::mt19937 rng(9);
    CHECK(std::abs(api_floquet(QuantumState(2, oracle::random_state(2, rng)), m, kDefaults.with_phi(1.5 * kPi))) <= 1e-8);
    const auto sym = acs_state({kPi / 2, kPi}, 2);
    CHECK(api_floquet(sym, m, kDefaults.with_phi(0.3)) ==
          doctest::Approx(api_floquet(sym, m, kDefaults.with_phi(-0.3))).epsilon(1e-8));
    const auto off = acs_state({kPi / 2, 0.9 * kPi}, 2);
    CHECK(std::abs(api_floquet(off, m, kDefaults.with_phi(0.3)) - api_floquet(off, m, kDefaults.with_phi(-0.3))) > 1e-7);
}

TEST_CASE("Floquet and direct averages agree") {
    AveragingWindow w;  // 1e3 T burn-in, 1e4 T span, K = 16
    for (int N : {2, 3, 20}) {
        const auto m = ModelParams::from_coupling(N, 5.0);
        const auto s0 = acs_state({kPi / 2, kPi}, N);
        for (double phi : grid(9)) {
            const auto p = kDefaults.with_phi(phi);
            const Propagator prop(m, p);
            const auto d = floquet_decompose_symmetric(m, p);
            const double fq = api_floquet_clustered(s0, d);
            const double dir = direct_api(s0, w, prop.period_maps(16));
            CHECK(std::abs(fq - dir) <= 1e-3);
        }
    }
}

TEST_CASE("per-mode imbalance routes agree") {
    const auto m = ModelParams::from_coupling(5, 5.0);
    const auto p = kDefaults.with_phi(2.2);
    const Propagator prop(m, p);
    auto a = floquet_spectrum(prop.period_maps(1).monodromy(), 0.5);
    auto b = a;
    compute_mode_apis(a, prop, 16);
    compute_mode_apis(b, prop.period_maps(16), 5);
    CHECK((a.mode_apis - b.mode_apis).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        CHECK(mode_api(a.modes0.col(k), m, p) == doctest::Approx(a.mode_apis[k]).epsilon(1e-10));
    }
}

TEST_CASE("mode_api warns on a non-eigenvector") {
    const auto m = ModelParams::from_coupling(2, 5.0);
    std::ostringstream capture;
    auto* old = std::cerr.rdbuf(capture.rdbuf());
    const double v = mode_api(acs_state({1.0, 1.0}, 2).amplitudes(), m, kDefaults);
    std::cerr.rdbuf(old);
    CHECK(!capture.str().empty());
    CHECK(std::abs(v) <= 1.0);
}

TEST_CASE("pairing across different spectra fails loudly") {
    const auto m = ModelParams::from_coupling(2, 5.0);
    const auto a = floquet_spectrum(monodromy(m, kDefaults), 0.5);
    const auto b = floquet_spectrum(monodromy(m, kDefaults.with_amplitudes(0.9, 0.2)), 0.5);
    CHECK_THROWS_AS(pair_modes(a, b), PairingError);
    const auto self = pair_modes(a, a);
    for (std::size_t i = 0; i < self.size(); ++i) CHECK(self[i] == static_cast<Eigen::Index>(i));
}
