// Monodromy, quasi-energies, Floquet modes at t = 0, per-mode
// imbalance averages and the weight decomposition of the API.

#pragma once

#include "bjj/model.hpp"
#include "bjj/quantum_dynamics.hpp"

#include <stdexcept>
#include <vector>

namespace bjj {

class DegenerateSpectrumError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PairingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDegeneracyThreshold = 1e-9;
inline constexpr double kPairingTolerance = 1e-6;

struct FloquetDecomposition {
    double omega{};
    RVector quasi_energies;  // ascending, folded into [-omega/2, omega/2)
    CVector eigenvalues;     // of U(T), same order
    CMatrix modes0;          // column alpha is |Phi_alpha(0)>
    RVector mode_apis;       // empty until computed
    bool degenerate_flag{false};

    double period() const noexcept { return kTwoPi / omega; }
    Eigen::Index size() const noexcept { return quasi_energies.size(); }
    bool has_mode_apis() const noexcept { return mode_apis.size() == quasi_energies.size(); }
};

struct ModeWeights {
    RVector weights;
};

// Folds a quasi-energy into [-omega/2, omega/2).
double fold_quasi_energy(double eps, double omega) noexcept;

CMatrix monodromy(const ModelParams& m, const DriveParams& p, const PropagatorConfig& cfg = {});

// Eigen-decomposition of a unitary one-period map. Modes are the Schur vectors
// (orthonormal), ordered by ascending quasi-energy with ties broken by
// descending |<l,l|Phi>|, and phase-fixed so the largest component is real
// and positive.
FloquetDecomposition floquet_spectrum(const CMatrix& U, double omega);

// Mean over K uniform samples of (2/N) <Phi(t)|Jz|Phi(t)> for one period,
// with Phi propagated directly. Prints a warning to stderr when mode0 is not
// an eigenvector of U(T) to 1e-8.
double mode_api(const CVector& mode0, const ModelParams& m, const DriveParams& p, const PropagatorConfig& cfg = {},
                int samples_per_period = 16);

// Fills d.mode_apis. The PeriodMaps overload reuses stored maps, the
// Propagator overload streams the modes through one period.
void compute_mode_apis(FloquetDecomposition& d, const PeriodMaps& maps, int N);
void compute_mode_apis(FloquetDecomposition& d, const Propagator& prop, int samples_per_period);

// Spectrum plus per-mode APIs.
FloquetDecomposition floquet_decompose(const ModelParams& m, const DriveParams& p, const PropagatorConfig& cfg = {},
                                       int samples_per_period = 16);

// Decompositions whose modes are adapted to a symmetry of the drive, so that
// (near-)degenerate clusters are split along the symmetry instead of
// arbitrarily. The quasi-energies are those of floquet_decompose; the flag is
// still set for degenerate spectra.
//  - parity: requires f(t + T/2) = -f(t) (E2 = 0). Modes diagonalize
//    P U(T/2, 0), whose square is U(T).
//  - time reversal: requires f(T/2 - t) = -f(t) (phi = pi/2 or 3pi/2). Modes
//    at t = T/4 are fixed by the antiunitary flip m -> -m with conjugation.
// Both throw std::invalid_argument when the drive lacks the symmetry.
FloquetDecomposition floquet_decompose_parity(const ModelParams& m, const DriveParams& p,
                                              const PropagatorConfig& cfg = {}, int samples_per_period = 16);
FloquetDecomposition floquet_decompose_time_reversal(const ModelParams& m, const DriveParams& p,
                                                     const PropagatorConfig& cfg = {}, int samples_per_period = 16);

// The parity- or time-reversal-adapted decomposition when the drive has that
// symmetry, floquet_decompose otherwise.
FloquetDecomposition floquet_decompose_symmetric(const ModelParams& m, const DriveParams& p,
                                                 const PropagatorConfig& cfg = {}, int samples_per_period = 16);

// m -> -m permutation (a pi rotation about x up to a global phase).
CMatrix flip_matrix(Eigen::Index dim);

// P_alpha = |<Phi_alpha(0)|psi>|^2. Throws DegenerateSpectrumError when the
// spectrum is flagged degenerate.
ModeWeights mode_weights(const QuantumState& s0, const FloquetDecomposition& d);

double api_floquet(const QuantumState& s0, const FloquetDecomposition& d);
// sum_a P_a J^a on a possibly flagged spectrum. Accepted when the mode APIs
// inside every cluster of quasi-energies closer than kDegeneracyThreshold
// agree within tol, which makes the sum independent of the basis chosen in
// the cluster. Throws DegenerateSpectrumError otherwise.
double api_floquet_clustered(const QuantumState& s0, const FloquetDecomposition& d, double tol = 1e-8);

double api_floquet(const QuantumState& s0, const ModelParams& m, const DriveParams& p,
                   const PropagatorConfig& cfg = {}, int samples_per_period = 16);

// Greedy matching of modes by circular quasi-energy distance. Entry alpha is
// the index in b matched to mode alpha of a. Throws PairingError if any match
// is farther than tol.
std::vector<Eigen::Index> pair_modes(const FloquetDecomposition& a, const FloquetDecomposition& b,
                                     double tol = kPairingTolerance);

}  // namespace bjj
