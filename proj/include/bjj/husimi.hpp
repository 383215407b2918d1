// Husimi distribution Q(theta, phi) = (N+1)/(4 pi) <theta,phi|rho|theta,phi>
// on a sphere grid, its time average (TAHD) and the imbalance recovered from
// it with the exact finite-l kernel ((l+1)/l) cos(theta).

#pragma once

#include "bjj/classical.hpp"
#include "bjj/model.hpp"
#include "bjj/quantum_dynamics.hpp"

namespace bjj {

// Product grid on the sphere. Rows run over cos(theta) ascending, columns over
// phi in [0, 2pi). Weights integrate dOmega = dcos(theta) dphi.
class SphericalGrid {
public:
    // Gauss-Legendre in cos(theta) times the uniform trapezoid in phi. Exact
    // for the Husimi of any N-particle state when n_theta >= N/2 + 1 and
    // n_phi > N.
    static SphericalGrid gauss_legendre(int n_theta, int n_phi);
    // Midpoints of equal cos(theta) and phi bins; lines up with PdfGrid.
    static SphericalGrid uniform_cos(int n_theta, int n_phi);
    // 64 x 128 up to N = 126, then the next power of two >= N/2 + 1 by twice that.
    static SphericalGrid for_particles(int N);

    int n_theta() const noexcept { return static_cast<int>(cos_theta_.size()); }
    int n_phi() const noexcept { return static_cast<int>(phi_.size()); }
    const RVector& cos_theta() const noexcept { return cos_theta_; }
    const RVector& theta_weights() const noexcept { return w_theta_; }
    const RVector& phi() const noexcept { return phi_; }
    double dphi() const noexcept { return kTwoPi / n_phi(); }
    bool is_uniform_cos() const noexcept { return uniform_; }
    double total_weight() const noexcept { return w_theta_.sum() * kTwoPi; }

private:
    SphericalGrid(RVector x, RVector w, int n_phi, double phi_offset, bool uniform);

    RVector cos_theta_;
    RVector w_theta_;
    RVector phi_;
    bool uniform_{false};
};

struct Distribution {
    SphericalGrid grid;
    RMatrix values;  // n_theta x n_phi

    double integral() const;
};

RVector gauss_legendre_nodes(int n, RVector& weights);

Distribution husimi(const QuantumState& s, const SphericalGrid& g);
// rho Hermitian with unit trace in the |l,m> basis.
Distribution husimi_of_density(const CMatrix& rho, int N, const SphericalGrid& g);

// Weighted sum of psi psi^dagger over the averaging window samples.
CMatrix time_averaged_density(const QuantumState& s0, const AveragingWindow& w, const PeriodMaps& maps);

// Husimi is linear in rho, so the TAHD is the Husimi of the time-averaged
// density matrix.
Distribution tahd(const QuantumState& s0, const AveragingWindow& w, const PeriodMaps& maps, const SphericalGrid& g);
Distribution tahd(const QuantumState& s0, const AveragingWindow& w, const ModelParams& m, const DriveParams& p,
                  const PropagatorConfig& cfg, const SphericalGrid& g);

double api_from_tahd(const Distribution& d, int N);

// sum_ij min(q_ij, p_ij) * bin area between a distribution on a uniform_cos
// grid and a classical PDF with the same bins.
double overlap_coefficient(const Distribution& q, const PhasePDF& p);

// Integral of the distribution restricted to the flagged bins (uniform_cos
// grid; mask is n_theta x n_phi with nonzero entries flagged).
double masked_mass(const Distribution& q, const Eigen::MatrixXi& mask);

}  // namespace bjj
