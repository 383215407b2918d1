// Named numerical checks of the drive symmetries on
// computed Floquet modes. Each check returns a CheckReport carrying the
// measured residual; checks whose symmetry is absent at the requested drive
// come back as Skipped rather than failed.

#pragma once

#include "bjj/floquet.hpp"
#include "bjj/model.hpp"
#include "bjj/quantum_dynamics.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace bjj {

enum class CheckStatus { Pass, Fail, Skipped, PairingFailed };

std::string to_string(CheckStatus s);

struct CheckReport {
    std::string name;
    nlohmann::json parameters;
    double residual{};  // +inf when nothing could be measured
    double tolerance{};
    bool passed{false};  // residual <= tolerance
    CheckStatus status{CheckStatus::Fail};
    std::string note;
};

// residual is written as null when not finite.
nlohmann::json to_json(const CheckReport& r);

// min over gamma of |u - e^{i gamma} v|.
double phase_aligned_distance(const CVector& u, const CVector& v);

// diag(e^{-i m pi}).
CVector rotation_z_pi(int N);
// Theta psi: component m is i^{2m} conj(psi_{-m}).
CVector apply_theta(const CVector& psi);

struct CheckSettings {
    PropagatorConfig propagator;
    int samples_per_period{16};
};

// max_alpha |J^alpha| with parity-adapted modes. Skipped unless E2 = 0.
CheckReport check_parity_null(const ModelParams& m, const DriveParams& p, const CheckSettings& cfg = {});

// max_alpha |J^alpha| with time-reversal-adapted modes. Skipped unless
// phi = pi/2 or 3pi/2.
CheckReport check_time_reversal_null(const ModelParams& m, const DriveParams& p, const CheckSettings& cfg = {});

// max over the grid and paired modes of |J^a(phi) - J^a(-phi)| and
// |J^a(phi) + J^a(phi + pi)|. The drive's own phi is ignored.
CheckReport check_mode_mirror_and_shift(const ModelParams& m, const DriveParams& p, const std::vector<double>& phis,
                                        const CheckSettings& cfg = {});

// [P_a(phi)]_varphi vs [P_a(-phi)]_{-varphi} and the same for the API, over
// the grid, for the ACS (theta, varphi).
CheckReport check_weight_cross_state(const ModelParams& m, const DriveParams& p, double theta, double varphi,
                                     const std::vector<double>& phis, const CheckSettings& cfg = {});

// R_z(pi) Theta Phi(T/2 - t) against Theta R_z(pi) Phi(-T/2 - t), both read
// off the periodic part of every mode propagated over two periods. Skipped
// unless phi = pi/2, 3pi/2 or the drive is off.
CheckReport check_rotation_reversal_order(const ModelParams& m, const DriveParams& p, const CheckSettings& cfg = {});

// Phase-aligned distance between Phi_a^{phi}(0) and conj(Phi_a^{-phi}(0)),
// over the grid and paired modes.
CheckReport check_conjugate_drive(const ModelParams& m, const DriveParams& p, const std::vector<double>& phis,
                                  const CheckSettings& cfg = {});

// | |<l,m|Phi(t)>| - |<l,-m|Phi(T/2 - t)>| | on the K sample times. Skipped
// unless phi = pi/2 or 3pi/2.
CheckReport check_coefficient_relation(const ModelParams& m, const DriveParams& p, const CheckSettings& cfg = {});

struct SuiteConfig {
    ModelParams model = ModelParams::from_coupling(2, 5.0);
    DriveParams drive;
    CheckSettings settings;
    std::vector<double> phis;  // grid for the phi-sweep checks
    ACSParams initial;
    std::vector<std::string> checks;  // names from suite_check_names()
    int threads{1};
};

const std::vector<std::string>& suite_check_names();

// Runs the selected checks concurrently; reports come back in selection
// order. Throws std::invalid_argument on an empty selection or unknown name.
std::vector<CheckReport> run_suite(const SuiteConfig& cfg);

}  // namespace bjj
