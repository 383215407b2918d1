#include "bjj/model.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace bjj {

double wrap_phase(double angle) noexcept {
    double r = std::fmod(angle, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

DriveParams::DriveParams(double E1, double E2, double omega, double phi)
    : E1_(E1), E2_(E2), omega_(omega), phi_(wrap_phase(phi)) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw std::invalid_argument("DriveParams: omega must be positive and finite");
    }
    if (!std::isfinite(E1) || !std::isfinite(E2) || !std::isfinite(phi)) {
        throw std::invalid_argument("DriveParams: non-finite parameter");
    }
}

double DriveParams::force(double t) const noexcept {
    return E1_ * std::cos(omega_ * t) + E2_ * std::cos(2.0 * omega_ * t + phi_);
}

ModelParams ModelParams::from_interaction(int N, double U) {
    if (N < 1) throw std::invalid_argument("ModelParams: N must be >= 1");
    if (!std::isfinite(U)) throw std::invalid_argument("ModelParams: U must be finite");
    return {N, U, N * U};
}

ModelParams ModelParams::from_coupling(int N, double Lambda) {
    if (N < 1) throw std::invalid_argument("ModelParams: N must be >= 1");
    if (!std::isfinite(Lambda)) throw std::invalid_argument("ModelParams: Lambda must be finite");
    return {N, Lambda / N, Lambda};
}

RVector jx_offdiagonal(int N) {
    const double l = 0.5 * N;
    RVector off(N);
    for (int k = 0; k < N; ++k) {
        const double m = m_of(N, k);
        off[k] = 0.5 * std::sqrt(l * (l + 1.0) - m * (m + 1.0));
    }
    return off;
}

SpinOperators build_operators(int N) {
    if (N < 1) throw std::invalid_argument("build_operators: N must be >= 1");
    const Eigen::Index d = N + 1;
    SpinOperators ops{RMatrix::Zero(d, d), CMatrix::Zero(d, d), RMatrix::Zero(d, d)};
    const RVector off = jx_offdiagonal(N);
    for (Eigen::Index k = 0; k < d; ++k) ops.Jz(k, k) = m_of(N, k);
    for (Eigen::Index k = 0; k + 1 < d; ++k) {
        // J+ |m> = 2 off[k] |m+1>
        ops.Jx(k + 1, k) = off[k];
        ops.Jx(k, k + 1) = off[k];
        ops.Jy(k + 1, k) = cplx(0.0, -off[k]);
        ops.Jy(k, k + 1) = cplx(0.0, off[k]);
    }
    return ops;
}

RMatrix hamiltonian_at(const ModelParams& m, const DriveParams& p, double t) {
    const int N = m.N();
    const Eigen::Index d = m.dim();
    const double f = p.force(t);
    const RVector off = jx_offdiagonal(N);
    RMatrix H = RMatrix::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const double mk = m_of(N, k);
        H(k, k) = m.U() * mk * mk + 2.0 * f * mk;
    }
    for (Eigen::Index k = 0; k + 1 < d; ++k) {
        H(k + 1, k) = -off[k];
        H(k, k + 1) = -off[k];
    }
    return H;
}

QuantumState::QuantumState(int N, CVector amplitudes) : N_(N), amp_(std::move(amplitudes)) {
    if (N < 1) throw std::invalid_argument("QuantumState: N must be >= 1");
    if (amp_.size() != N + 1) throw std::invalid_argument("QuantumState: expected N+1 amplitudes");
    if (std::abs(amp_.squaredNorm() - 1.0) > kNormTolerance) {
        throw std::invalid_argument("QuantumState: amplitudes are not normalized");
    }
}

QuantumState QuantumState::normalized(int N, CVector amplitudes) {
    const double n = amplitudes.norm();
    if (!(n > 0.0)) throw std::invalid_argument("QuantumState: zero vector");
    amplitudes /= n;
    return {N, std::move(amplitudes)};
}

QuantumState QuantumState::basis(int N, double m) {
    const double k = m + 0.5 * N;
    const auto ki = static_cast<Eigen::Index>(std::lround(k));
    if (std::abs(k - static_cast<double>(ki)) > 1e-12 || ki < 0 || ki > N) {
        throw std::invalid_argument("QuantumState::basis: m out of range");
    }
    CVector v = CVector::Zero(N + 1);
    v[ki] = 1.0;
    return {N, std::move(v)};
}

ACSParams::ACSParams(double theta_, double varphi_) : theta(theta_), varphi(wrap_phase(varphi_)) {
    if (!(theta_ >= 0.0 && theta_ <= 3.14159265358979323846)) {
        throw std::invalid_argument("ACSParams: theta must lie in [0, pi]");
    }
}

RVector acs_magnitudes(double theta, int N) {
    if (N < 1) throw std::invalid_argument("acs_magnitudes: N must be >= 1");
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    const double logc = std::log(std::abs(c));
    const double logs = std::log(std::abs(s));
    const double lgN = std::lgamma(N + 1.0);
    RVector out(N + 1);
    for (int k = 0; k <= N; ++k) {
        const int nl = k;      // l + m
        const int nr = N - k;  // l - m
        if ((nl > 0 && c == 0.0) || (nr > 0 && s == 0.0)) {
            out[k] = 0.0;
            continue;
        }
        double lg = 0.5 * (lgN - std::lgamma(nl + 1.0) - std::lgamma(nr + 1.0));
        if (nl > 0) lg += nl * logc;
        if (nr > 0) lg += nr * logs;
        out[k] = std::exp(lg);
    }
    return out;
}

QuantumState acs_state(const ACSParams& a, int N) {
    const RVector mag = acs_magnitudes(a.theta, N);
    CVector v(N + 1);
    for (int k = 0; k <= N; ++k) {
        const int nr = N - k;
        v[k] = mag[k] * std::polar(1.0, nr * a.varphi);
    }
    // Rounding in the log-domain evaluation leaves ~1e-15 norm error.
    return QuantumState::normalized(N, std::move(v));
}

double expect_jz(const QuantumState& s) {
    const int N = s.N();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < s.dim(); ++k) acc += m_of(N, k) * std::norm(s[k]);
    return 2.0 * acc / N;
}

cplx expect_jplus(const QuantumState& s) {
    const RVector off = jx_offdiagonal(s.N());
    cplx acc = 0.0;
    for (Eigen::Index k = 0; k + 1 < s.dim(); ++k) {
        acc += std::conj(s[k + 1]) * (2.0 * off[k]) * s[k];
    }
    return acc;
}

OneBodyDensity reduced_density(const QuantumState& s) {
    const double N = s.N();
    const double jz = 0.5 * N * expect_jz(s);
    const cplx jp = expect_jplus(s);

    OneBodyDensity out;
    out.rho1(0, 0) = (0.5 * N + jz) / N;
    out.rho1(1, 1) = (0.5 * N - jz) / N;
    out.rho1(0, 1) = jp / N;
    out.rho1(1, 0) = std::conj(jp) / N;

    const double a = out.rho1(0, 0).real();
    const double d = out.rho1(1, 1).real();
    const double gap = std::sqrt((a - d) * (a - d) + 4.0 * std::norm(out.rho1(0, 1)));
    out.n1 = 0.5 * (a + d + gap);
    out.n2 = std::max(0.0, 0.5 * (a + d - gap));
    out.depletion = std::max(0.0, 1.0 - out.n1);
    return out;
}

}  // namespace bjj
