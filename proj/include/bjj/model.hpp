// Parameters, angular-momentum operators, the driven two-site
// Bose-Hubbard Hamiltonian, atomic coherent states and one-time observables.
//
// Units: energies in multiples of the single-particle gap, hbar = 1. The
// hopping is fixed to J = 1/2 so the static Hamiltonian reads -Jx + U Jz^2.
// The drive enters as +f(t)(n_L - n_R) = +2 f(t) Jz, the same sign as in the
// mean-field pendulum (see classical.hpp), so quantum and classical runs agree.
//
// Basis convention used by every module: index k in {0..N} is the
// angular-momentum state |l, m> with m = k - l, l = N/2 (ascending m).
// |l, m> is the Fock state with n_L = l + m, n_R = l - m.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace bjj {

using cplx = std::complex<double>;
using RVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Wraps an angle into [0, 2pi).
double wrap_phase(double angle) noexcept;

// Bi-harmonic drive f(t) = E1 cos(w t) + E2 cos(2 w t + phi).
class DriveParams {
public:
    DriveParams() = default;
    DriveParams(double E1, double E2, double omega, double phi);

    double E1() const noexcept { return E1_; }
    double E2() const noexcept { return E2_; }
    double omega() const noexcept { return omega_; }
    double phi() const noexcept { return phi_; }
    double period() const noexcept { return kTwoPi / omega_; }

    DriveParams with_phi(double phi) const { return {E1_, E2_, omega_, phi}; }
    DriveParams with_amplitudes(double E1, double E2) const { return {E1, E2, omega_, phi_}; }

    double force(double t) const noexcept;

private:
    double E1_{0.4};
    double E2_{0.2};
    double omega_{0.5};
    double phi_{0.0};
};

inline double drive_force(const DriveParams& p, double t) noexcept { return p.force(t); }

// Particle number with on-site interaction U and coupling Lambda = N U.
class ModelParams {
public:
    static ModelParams from_interaction(int N, double U);
    static ModelParams from_coupling(int N, double Lambda);

    int N() const noexcept { return N_; }
    double U() const noexcept { return U_; }
    double Lambda() const noexcept { return Lambda_; }
    static constexpr double J() noexcept { return 0.5; }
    double l() const noexcept { return 0.5 * N_; }
    Eigen::Index dim() const noexcept { return N_ + 1; }

private:
    ModelParams(int N, double U, double Lambda) : N_(N), U_(U), Lambda_(Lambda) {}

    int N_;
    double U_;
    double Lambda_;
};

// m-value of basis index k.
inline double m_of(int N, Eigen::Index k) noexcept { return static_cast<double>(k) - 0.5 * N; }

// Super-diagonal of Jx: <l, m+1|Jx|l, m> for m = -l .. l-1.
RVector jx_offdiagonal(int N);

struct SpinOperators {
    RMatrix Jx;
    CMatrix Jy;
    RMatrix Jz;
};

// Dense Jx, Jy, Jz in the |l, m> basis. Throws std::invalid_argument for N < 1.
SpinOperators build_operators(int N);

// H_S(t) = -Jx + U Jz^2 + 2 f(t) Jz. Real symmetric, tridiagonal.
RMatrix hamiltonian_at(const ModelParams& m, const DriveParams& p, double t);

// Normalized N-boson state in the |l, m> basis.
class QuantumState {
public:
    // Throws if the amplitude count is not N+1 or the norm deviates from one.
    QuantumState(int N, CVector amplitudes);

    static QuantumState normalized(int N, CVector amplitudes);
    static QuantumState basis(int N, double m);

    int N() const noexcept { return N_; }
    const CVector& amplitudes() const noexcept { return amp_; }
    cplx operator[](Eigen::Index k) const { return amp_[k]; }
    Eigen::Index dim() const noexcept { return amp_.size(); }

    static constexpr double kNormTolerance = 1e-10;

private:
    int N_;
    CVector amp_;
};

struct ACSParams {
    double theta{0.5 * 3.14159265358979323846};
    double varphi{3.14159265358979323846};

    ACSParams() = default;
    ACSParams(double theta_, double varphi_);
};

// Atomic coherent state |theta, varphi>:
//   c_m = sqrt(C(2l, l+m)) cos^{l+m}(theta/2) sin^{l-m}(theta/2) e^{i (l-m) varphi}.
// Magnitudes are accumulated in log space so large N does not overflow.
QuantumState acs_state(const ACSParams& a, int N);

// Real ACS magnitudes sqrt(C(2l, l+m)) cos^{l+m} sin^{l-m}, ascending m.
RVector acs_magnitudes(double theta, int N);

// (2/N) sum_m m |c_m|^2, the normalized population imbalance.
double expect_jz(const QuantumState& s);

// <J+> = <a_L^dag a_R>.
cplx expect_jplus(const QuantumState& s);

struct OneBodyDensity {
    Eigen::Matrix2cd rho1;
    double n1{};
    double n2{};
    double depletion{};
};

// Reduced one-body density matrix normalized to unit trace and its natural
// populations n1 >= n2; depletion = 1 - n1.
OneBodyDensity reduced_density(const QuantumState& s);

}  // namespace bjj
