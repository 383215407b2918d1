#include "bjj/husimi.hpp"

#include "tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace bjj {

namespace {

constexpr double kFourPi = 2.0 * kTwoPi;

// Phase factors e^{i d phi_j} for d = 0..D, j over the grid.
CMatrix phase_table(const SphericalGrid& g, int D) {
    CMatrix E(D + 1, g.n_phi());
    for (int j = 0; j < g.n_phi(); ++j) {
        const cplx step = std::polar(1.0, g.phi()[j]);
        cplx z = 1.0;
        for (int d = 0; d <= D; ++d) {
            E(d, j) = z;
            z *= step;
        }
    }
    return E;
}

void check_grids(const Distribution& q, const PdfGrid& pg) {
    if (!q.grid.is_uniform_cos() || q.grid.n_theta() != pg.nZ || q.grid.n_phi() != pg.nphi) {
        throw std::invalid_argument("grids do not line up: need a uniform_cos grid with the PDF's bin counts");
    }
}

}  // namespace

RVector gauss_legendre_nodes(int n, RVector& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre_nodes: n must be >= 1");
    // Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the
    // Legendre recurrence, weights 2 v_0^2.
    RVector diag = RVector::Zero(n);
    RVector off(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    const auto eig = detail::tridiagonal_eigen(diag, off);
    weights = 2.0 * eig.vectors.row(0).transpose().array().square().matrix();
    return eig.values;
}

SphericalGrid::SphericalGrid(RVector x, RVector w, int n_phi, double phi_offset, bool uniform)
    : cos_theta_(std::move(x)), w_theta_(std::move(w)), phi_(n_phi), uniform_(uniform) {
    for (int j = 0; j < n_phi; ++j) phi_[j] = (j + phi_offset) * kTwoPi / n_phi;
}

SphericalGrid SphericalGrid::gauss_legendre(int n_theta, int n_phi) {
    if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("SphericalGrid: sizes must be >= 1");
    RVector w;
    RVector x = gauss_legendre_nodes(n_theta, w);
    return {std::move(x), std::move(w), n_phi, 0.0, false};
}

SphericalGrid SphericalGrid::uniform_cos(int n_theta, int n_phi) {
    if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("SphericalGrid: sizes must be >= 1");
    RVector x(n_theta);
    for (int i = 0; i < n_theta; ++i) x[i] = -1.0 + (i + 0.5) * 2.0 / n_theta;
    return {std::move(x), RVector::Constant(n_theta, 2.0 / n_theta), n_phi, 0.5, true};
}

SphericalGrid SphericalGrid::for_particles(int N) {
    if (N < 1) throw std::invalid_argument("SphericalGrid::for_particles: N must be >= 1");
    int nt = 64;
    while (nt < N / 2 + 1) nt *= 2;
    return gauss_legendre(nt, 2 * nt);
}

double Distribution::integral() const {
    return grid.theta_weights().dot(values.rowwise().sum()) * grid.dphi();
}

Distribution husimi(const QuantumState& s, const SphericalGrid& g) {
    const int N = s.N();
    const CMatrix E = phase_table(g, N);
    Distribution out{g, RMatrix(g.n_theta(), g.n_phi())};
    const double pref = (N + 1) / kFourPi;
    for (int i = 0; i < g.n_theta(); ++i) {
        const double theta = std::acos(std::clamp(g.cos_theta()[i], -1.0, 1.0));
        const RVector b = acs_magnitudes(theta, N);
        // <theta,phi|psi> = sum_k b_k e^{-i (N-k) phi} psi_k; |.|^2 only needs
        // the powers e^{i k phi}.
        CVector a(N + 1);
        for (int k = 0; k <= N; ++k) a[k] = b[k] * s[k];
        const CVector ov = E.transpose() * a;
        out.values.row(i) = pref * ov.cwiseAbs2().transpose();
    }
    return out;
}

Distribution husimi_of_density(const CMatrix& rho, int N, const SphericalGrid& g) {
    if (rho.rows() != N + 1 || rho.cols() != N + 1) throw std::invalid_argument("husimi_of_density: dimension mismatch");
    const CMatrix E = phase_table(g, N);
    Distribution out{g, RMatrix(g.n_theta(), g.n_phi())};
    const double pref = (N + 1) / kFourPi;
    CVector gd(N + 1);
    for (int i = 0; i < g.n_theta(); ++i) {
        const double theta = std::acos(std::clamp(g.cos_theta()[i], -1.0, 1.0));
        const RVector b = acs_magnitudes(theta, N);
        // Q = g_0 + 2 Re sum_{d>0} g_d e^{i d phi}, g_d = sum_k b_k b_{k-d} rho_{k,k-d}.
        for (int d = 0; d <= N; ++d) {
            cplx acc = 0.0;
            for (int k = d; k <= N; ++k) acc += b[k] * b[k - d] * rho(k, k - d);
            gd[d] = acc;
        }
        gd[0] = 0.5 * gd[0];
        const CVector q = E.transpose() * gd;
        out.values.row(i) = (2.0 * pref) * q.real().transpose();
    }
    return out;
}

CMatrix time_averaged_density(const QuantumState& s0, const AveragingWindow& w, const PeriodMaps& maps) {
    const Eigen::Index n = s0.dim();
    CMatrix rho = CMatrix::Zero(n, n);
    sample_window(s0, w, maps, [&](const SampleBlock& blk) {
        CMatrix A = blk.states;
        for (Eigen::Index c = 0; c < A.cols(); ++c) A.col(c) *= std::sqrt(blk.weights[static_cast<std::size_t>(c)]);
        rho.selfadjointView<Eigen::Lower>().rankUpdate(A);
    });
    rho.triangularView<Eigen::StrictlyUpper>() = rho.adjoint();
    return rho;
}

Distribution tahd(const QuantumState& s0, const AveragingWindow& w, const PeriodMaps& maps, const SphericalGrid& g) {
    return husimi_of_density(time_averaged_density(s0, w, maps), s0.N(), g);
}

Distribution tahd(const QuantumState& s0, const AveragingWindow& w, const ModelParams& m, const DriveParams& p,
                  const PropagatorConfig& cfg, const SphericalGrid& g) {
    const Propagator prop(m, p, cfg);
    return tahd(s0, w, prop.period_maps(w.samples_per_period), g);
}

double api_from_tahd(const Distribution& d, int N) {
    if (N < 1) throw std::invalid_argument("api_from_tahd: N must be >= 1");
    const double l = 0.5 * N;
    const RVector row = d.values.rowwise().sum();
    return (l + 1.0) / l * d.grid.theta_weights().cwiseProduct(d.grid.cos_theta()).dot(row) * d.grid.dphi();
}

double overlap_coefficient(const Distribution& q, const PhasePDF& p) {
    check_grids(q, p.grid);
    return q.values.cwiseMin(p.density).sum() * p.grid.bin_area();
}

double masked_mass(const Distribution& q, const Eigen::MatrixXi& mask) {
    if (mask.rows() != q.values.rows() || mask.cols() != q.values.cols()) {
        throw std::invalid_argument("masked_mass: mask shape mismatch");
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < mask.rows(); ++i) {
        for (Eigen::Index j = 0; j < mask.cols(); ++j) {
            if (mask(i, j) != 0) acc += q.values(i, j) * q.grid.theta_weights()[i];
        }
    }
    return acc * q.grid.dphi();
}

}  // namespace bjj
