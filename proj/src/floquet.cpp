#include "bjj/floquet.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <tuple>

namespace bjj {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kEigenResidual = 1e-8;

double circular_distance(double a, double b, double period) {
    double d = std::fmod(std::abs(a - b), period);
    return std::min(d, period - d);
}

RVector jz_diagonal(int N) {
    RVector mv(N + 1);
    for (int k = 0; k <= N; ++k) mv[k] = m_of(N, k);
    return mv;
}

void check_dims(const FloquetDecomposition& d, Eigen::Index n, const char* who) {
    if (d.modes0.rows() != n) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

// Orders, phase-fixes and flags eigenpairs (lam, Q) of a one-period map.
FloquetDecomposition assemble(const CVector& lam, const CMatrix& Q, double omega) {
    const Eigen::Index n = Q.rows();
    const double T = kTwoPi / omega;
    RVector eps(n);
    for (Eigen::Index a = 0; a < n; ++a) eps[a] = fold_quasi_energy(-std::arg(lam[a]) / T, omega);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (std::abs(eps[a] - eps[b]) > kTieTolerance) return eps[a] < eps[b];
        return std::abs(Q(n - 1, a)) > std::abs(Q(n - 1, b));
    });

    FloquetDecomposition d;
    d.omega = omega;
    d.quasi_energies.resize(n);
    d.eigenvalues.resize(n);
    d.modes0.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index a = order[static_cast<std::size_t>(i)];
        d.quasi_energies[i] = eps[a];
        d.eigenvalues[i] = lam[a];
        CVector v = Q.col(a);
        Eigen::Index kmax = 0;
        v.cwiseAbs().maxCoeff(&kmax);
        v *= std::conj(v[kmax]) / std::abs(v[kmax]);
        v[kmax] = std::abs(v[kmax]);
        d.modes0.col(i) = v;
    }
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (d.quasi_energies[i + 1] - d.quasi_energies[i] < kDegeneracyThreshold) d.degenerate_flag = true;
    }
    if (n > 1 && d.quasi_energies[0] + omega - d.quasi_energies[n - 1] < kDegeneracyThreshold) {
        d.degenerate_flag = true;
    }
    return d;
}

struct Eigenpairs {
    CVector values;
    CMatrix vectors;
};

// Unitary input, so the Schur form is diagonal and the Schur vectors are
// orthonormal eigenvectors.
Eigenpairs unitary_eigen(const CMatrix& U) {
    Eigen::ComplexSchur<CMatrix> schur(U);
    if (schur.info() != Eigen::Success) throw std::runtime_error("Schur decomposition failed");
    return {schur.matrixT().diagonal(), schur.matrixU()};
}

}  // namespace

double fold_quasi_energy(double eps, double omega) noexcept {
    double r = std::fmod(eps + 0.5 * omega, omega);
    if (r < 0.0) r += omega;
    if (r >= omega) r = 0.0;
    return r - 0.5 * omega;
}

CMatrix monodromy(const ModelParams& m, const DriveParams& p, const PropagatorConfig& cfg) {
    return Propagator(m, p, cfg).period_maps(1).monodromy();
}

CMatrix flip_matrix(Eigen::Index dim) {
    CMatrix P = CMatrix::Zero(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) P(dim - 1 - k, k) = 1.0;
    return P;
}

FloquetDecomposition floquet_spectrum(const CMatrix& U, double omega) {
    if (U.rows() != U.cols() || U.rows() == 0) throw std::invalid_argument("floquet_spectrum: U must be square");
    if (!(omega > 0.0)) throw std::invalid_argument("floquet_spectrum: omega must be positive");
    const Eigenpairs e = unitary_eigen(U);
    return assemble(e.values, e.vectors, omega);
}

double mode_api(const CVector& mode0, const ModelParams& m, const DriveParams& p, const PropagatorConfig& cfg,
                int samples_per_period) {
    if (samples_per_period < 1) throw std::invalid_argument("mode_api: samples_per_period must be >= 1");
    if (mode0.size() != m.dim()) throw std::invalid_argument("mode_api: dimension mismatch");
    const Propagator prop(m, p, cfg);
    const double T = p.period();
    const double dt = T / samples_per_period;
    const int N = m.N();

    CVector psi = mode0.normalized();
    double acc = 0.0;
    for (int k = 0; k < samples_per_period; ++k) {
        acc += expect_jz(QuantumState::normalized(N, psi));
        psi = prop.evolve(std::move(psi), k * dt, (k + 1) * dt);
    }
    const CVector v = mode0.normalized();
    const cplx lam = v.dot(psi);
    const double residual = (psi - lam * v).norm();
    if (residual > kEigenResidual) {
        std::cerr << "warning: mode_api: input is not a Floquet mode (residual " << residual << ")\n";
    }
    return acc / samples_per_period;
}

void compute_mode_apis(FloquetDecomposition& d, const PeriodMaps& maps, int N) {
    check_dims(d, N + 1, "compute_mode_apis");
    const RVector mv = jz_diagonal(N);
    const int K = maps.samples_per_period;
    // Sample k = 0 is the mode itself; k = K repeats it up to a phase.
    RVector acc = mv.transpose() * d.modes0.cwiseAbs2();
    for (int k = 1; k < K; ++k) {
        const CMatrix Z = maps.maps[static_cast<std::size_t>(k - 1)] * d.modes0;
        acc += (mv.transpose() * Z.cwiseAbs2()).transpose();
    }
    d.mode_apis = (2.0 / N) * acc / K;
}

void compute_mode_apis(FloquetDecomposition& d, const Propagator& prop, int samples_per_period) {
    const int N = prop.model().N();
    check_dims(d, N + 1, "compute_mode_apis");
    const RVector mv = jz_diagonal(N);
    RVector acc = mv.transpose() * d.modes0.cwiseAbs2();
    prop.sweep_period(d.modes0, samples_per_period, [&](int k, const CMatrix& Z) {
        if (k < samples_per_period) acc += (mv.transpose() * Z.cwiseAbs2()).transpose();
    });
    d.mode_apis = (2.0 / N) * acc / samples_per_period;
}

FloquetDecomposition floquet_decompose(const ModelParams& m, const DriveParams& p, const PropagatorConfig& cfg,
                                       int samples_per_period) {
    const Propagator prop(m, p, cfg);
    FloquetDecomposition d = floquet_spectrum(prop.period_maps(1).monodromy(), p.omega());
    compute_mode_apis(d, prop, samples_per_period);
    return d;
}

FloquetDecomposition floquet_decompose_parity(const ModelParams& m, const DriveParams& p,
                                              const PropagatorConfig& cfg, int samples_per_period) {
    if (p.E2() != 0.0) throw std::invalid_argument("floquet_decompose_parity: requires E2 = 0");
    const Propagator prop(m, p, cfg);
    const PeriodMaps half = prop.period_maps(2);
    const Eigenpairs g = unitary_eigen(flip_matrix(m.dim()) * half.maps[0]);
    FloquetDecomposition d = assemble(g.values.array().square().matrix(), g.vectors, p.omega());
    compute_mode_apis(d, prop, samples_per_period);
    return d;
}

FloquetDecomposition floquet_decompose_time_reversal(const ModelParams& m, const DriveParams& p,
                                                     const PropagatorConfig& cfg, int samples_per_period) {
    const double c = std::cos(p.phi());
    if (std::abs(c) > 1e-12) throw std::invalid_argument("floquet_decompose_time_reversal: requires phi = pi/2 or 3pi/2");
    const Propagator prop(m, p, cfg);
    const PeriodMaps q = prop.period_maps(4);
    const CMatrix& S = q.maps[0];  // U(T/4, 0)
    const Eigen::Index n = m.dim();
    const CMatrix V = S * q.monodromy() * S.adjoint();
    Eigenpairs e = unitary_eigen(V);

    // Cluster by eigenphase and replace each cluster by an orthonormal basis
    // of vectors with P conj(v) = v.
    const double T = p.period();
    RVector eps(n);
    for (Eigen::Index a = 0; a < n; ++a) eps[a] = fold_quasi_energy(-std::arg(e.values[a]) / T, p.omega());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return eps[a] < eps[b]; });

    const CMatrix P = flip_matrix(n);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && eps[order[j]] - eps[order[j - 1]] < kPairingTolerance) ++j;
        const Eigen::Index c_n = static_cast<Eigen::Index>(j - i);
        CMatrix Qc(n, c_n);
        for (Eigen::Index k = 0; k < c_n; ++k) Qc.col(k) = e.vectors.col(order[i + static_cast<std::size_t>(k)]);
        const CMatrix AQ = P * Qc.conjugate();
        CMatrix cand(n, 2 * c_n);
        cand.leftCols(c_n) = Qc + AQ;
        cand.rightCols(c_n) = cplx(0.0, 1.0) * (Qc - AQ);
        RMatrix R(2 * n, 2 * c_n);
        R.topRows(n) = cand.real();
        R.bottomRows(n) = cand.imag();
        Eigen::JacobiSVD<RMatrix> svd(R, Eigen::ComputeThinU);
        for (Eigen::Index k = 0; k < c_n; ++k) {
            CVector v(n);
            v.real() = svd.matrixU().col(k).head(n);
            v.imag() = svd.matrixU().col(k).tail(n);
            e.vectors.col(order[i + static_cast<std::size_t>(k)]) = v.normalized();
        }
        i = j;
    }
    FloquetDecomposition d = assemble(e.values, S.adjoint() * e.vectors, p.omega());
    compute_mode_apis(d, prop, samples_per_period);
    return d;
}

FloquetDecomposition floquet_decompose_symmetric(const ModelParams& m, const DriveParams& p,
                                                 const PropagatorConfig& cfg, int samples_per_period) {
    if (p.E2() == 0.0) return floquet_decompose_parity(m, p, cfg, samples_per_period);
    if (std::abs(std::cos(p.phi())) <= 1e-12) return floquet_decompose_time_reversal(m, p, cfg, samples_per_period);
    return floquet_decompose(m, p, cfg, samples_per_period);
}

ModeWeights mode_weights(const QuantumState& s0, const FloquetDecomposition& d) {
    check_dims(d, s0.dim(), "mode_weights");
    if (d.degenerate_flag) {
        throw DegenerateSpectrumError("mode_weights: quasi-energy spectrum is degenerate, weights are basis dependent");
    }
    return {(d.modes0.adjoint() * s0.amplitudes()).cwiseAbs2()};
}

double api_floquet(const QuantumState& s0, const FloquetDecomposition& d) {
    if (!d.has_mode_apis()) throw std::invalid_argument("api_floquet: mode APIs not computed");
    return mode_weights(s0, d).weights.dot(d.mode_apis);
}

double api_floquet_clustered(const QuantumState& s0, const FloquetDecomposition& d, double tol) {
    if (!d.has_mode_apis()) throw std::invalid_argument("api_floquet_clustered: mode APIs not computed");
    check_dims(d, s0.dim(), "api_floquet_clustered");
    const Eigen::Index n = d.size();
    // Quasi-energies are sorted; clusters may wrap around the zone edge.
    for (Eigen::Index a = 0; a < n; ++a) {
        const Eigen::Index b = (a + 1) % n;
        if (b == a) break;
        if (circular_distance(d.quasi_energies[a], d.quasi_energies[b], d.omega) < kDegeneracyThreshold &&
            std::abs(d.mode_apis[a] - d.mode_apis[b]) > tol) {
            throw DegenerateSpectrumError("api_floquet_clustered: degenerate modes carry different imbalances");
        }
    }
    const RVector w = (d.modes0.adjoint() * s0.amplitudes()).cwiseAbs2();
    return w.dot(d.mode_apis);
}

double api_floquet(const QuantumState& s0, const ModelParams& m, const DriveParams& p, const PropagatorConfig& cfg,
                   int samples_per_period) {
    return api_floquet(s0, floquet_decompose(m, p, cfg, samples_per_period));
}

std::vector<Eigen::Index> pair_modes(const FloquetDecomposition& a, const FloquetDecomposition& b, double tol) {
    if (a.size() != b.size()) throw PairingError("pair_modes: spectra have different sizes");
    const Eigen::Index n = a.size();
    std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> cand;
    cand.reserve(static_cast<std::size_t>(n * n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            cand.emplace_back(circular_distance(a.quasi_energies[i], b.quasi_energies[j], a.omega), i, j);
        }
    }
    std::sort(cand.begin(), cand.end());
    std::vector<Eigen::Index> match(static_cast<std::size_t>(n), -1);
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    Eigen::Index assigned = 0;
    for (const auto& [dist, i, j] : cand) {
        if (assigned == n) break;
        if (match[static_cast<std::size_t>(i)] >= 0 || taken[static_cast<std::size_t>(j)]) continue;
        if (dist > tol) {
            throw PairingError("pair_modes: no partner within " + std::to_string(tol) + " for quasi-energy " +
                               std::to_string(a.quasi_energies[i]));
        }
        match[static_cast<std::size_t>(i)] = j;
        taken[static_cast<std::size_t>(j)] = true;
        ++assigned;
    }
    return match;
}

}  // namespace bjj
