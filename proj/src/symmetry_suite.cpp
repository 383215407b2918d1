#include "bjj/symmetry_suite.hpp"

#include "bjj/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace bjj {

namespace {

constexpr double kNullTolerance = 1e-8;
constexpr double kIdentityTolerance = 1e-7;
constexpr double kPi = 0.5 * kTwoPi;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool drive_off(const DriveParams& p) { return p.E1() == 0.0 && p.E2() == 0.0; }
bool time_reversal_phase(const DriveParams& p) { return std::abs(std::cos(p.phi())) <= 1e-12; }

nlohmann::json snapshot(const ModelParams& m, const DriveParams& p, const CheckSettings& cfg) {
    return {{"N", m.N()},
            {"Lambda", m.Lambda()},
            {"E1", p.E1()},
            {"E2", p.E2()},
            {"omega", p.omega()},
            {"phi", p.phi()},
            {"steps_per_period", cfg.propagator.steps_per_period},
            {"samples_per_period", cfg.samples_per_period}};
}

CheckReport make_report(std::string name, nlohmann::json params, double residual, double tol) {
    CheckReport r;
    r.name = std::move(name);
    r.parameters = std::move(params);
    r.residual = residual;
    r.tolerance = tol;
    r.passed = residual <= tol;
    r.status = r.passed ? CheckStatus::Pass : CheckStatus::Fail;
    return r;
}

CheckReport skipped(std::string name, nlohmann::json params, double tol, std::string why) {
    CheckReport r = make_report(std::move(name), std::move(params), 0.0, tol);
    r.status = CheckStatus::Skipped;
    r.note = std::move(why);
    return r;
}

CheckReport failed(std::string name, nlohmann::json params, double tol, CheckStatus status, std::string why) {
    CheckReport r = make_report(std::move(name), std::move(params), kInf, tol);
    r.status = status;
    r.note = std::move(why);
    return r;
}

// Decompositions keyed by the wrapped drive phase.
class PhaseCache {
public:
    PhaseCache(const ModelParams& m, const DriveParams& p, const CheckSettings& cfg, bool with_apis)
        : m_(m), p_(p), cfg_(cfg), apis_(with_apis) {}

    const FloquetDecomposition& at(double phi) {
        const double w = wrap_phase(phi);
        const auto key = static_cast<long long>(std::llround(w * 1e9)) % static_cast<long long>(std::llround(kTwoPi * 1e9));
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const DriveParams q = p_.with_phi(w);
        FloquetDecomposition d = apis_ ? floquet_decompose(m_, q, cfg_.propagator, cfg_.samples_per_period)
                                       : floquet_spectrum(monodromy(m_, q, cfg_.propagator), q.omega());
        if (d.degenerate_flag) throw DegenerateSpectrumError("degenerate spectrum at phi = " + std::to_string(w));
        return cache_.emplace(key, std::move(d)).first->second;
    }

private:
    const ModelParams& m_;
    const DriveParams& p_;
    const CheckSettings& cfg_;
    bool apis_;
    std::map<long long, FloquetDecomposition> cache_;
};

nlohmann::json with_grid(nlohmann::json j, const std::vector<double>& phis) {
    j["phi_grid"] = phis;
    j.erase("phi");
    return j;
}

template <class Body>
CheckReport guarded(const std::string& name, const nlohmann::json& params, double tol, Body body) {
    try {
        return body();
    } catch (const PairingError& e) {
        return failed(name, params, tol, CheckStatus::PairingFailed, e.what());
    } catch (const DegenerateSpectrumError& e) {
        return failed(name, params, tol, CheckStatus::Fail, e.what());
    }
}

int i_power(int e) { return ((e % 4) + 4) % 4; }

}  // namespace

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Skipped: return "skipped";
        case CheckStatus::PairingFailed: return "pairing-failed";
    }
    return "fail";
}

nlohmann::json to_json(const CheckReport& r) {
    nlohmann::json j{{"name", r.name},
                     {"parameters", r.parameters},
                     {"tolerance", r.tolerance},
                     {"passed", r.passed},
                     {"status", to_string(r.status)}};
    j["residual"] = std::isfinite(r.residual) ? nlohmann::json(r.residual) : nlohmann::json(nullptr);
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

double phase_aligned_distance(const CVector& u, const CVector& v) {
    if (u.size() != v.size()) throw std::invalid_argument("phase_aligned_distance: size mismatch");
    const cplx ov = v.dot(u);  // <v|u>
    const cplx ph = std::abs(ov) > 0.0 ? ov / std::abs(ov) : cplx(1.0);
    return (u - ph * v).norm();
}

CVector rotation_z_pi(int N) {
    static const cplx powers[4] = {1.0, {0.0, -1.0}, -1.0, {0.0, 1.0}};  // e^{-i pi e/2}
    CVector r(N + 1);
    // e^{-i m pi} with 2m = 2k - N.
    for (int k = 0; k <= N; ++k) r[k] = powers[i_power(2 * k - N)];
    return r;
}

CVector apply_theta(const CVector& psi) {
    static const cplx powers[4] = {1.0, {0.0, 1.0}, -1.0, {0.0, -1.0}};
    const auto n = psi.size();
    const int N = static_cast<int>(n) - 1;
    CVector out(n);
    for (Eigen::Index k = 0; k < n; ++k) out[k] = powers[i_power(2 * static_cast<int>(k) - N)] * std::conj(psi[n - 1 - k]);
    return out;
}

CheckReport check_parity_null(const ModelParams& m, const DriveParams& p, const CheckSettings& cfg) {
    const std::string name = "parity_null";
    auto params = snapshot(m, p, cfg);
    if (p.E2() != 0.0) return skipped(name, params, kNullTolerance, "requires E2 = 0");
    const auto d = floquet_decompose_parity(m, p, cfg.propagator, cfg.samples_per_period);
    return make_report(name, params, d.mode_apis.cwiseAbs().maxCoeff(), kNullTolerance);
}

CheckReport check_time_reversal_null(const ModelParams& m, const DriveParams& p, const CheckSettings& cfg) {
    const std::string name = "time_reversal_null";
    auto params = snapshot(m, p, cfg);
    if (!time_reversal_phase(p)) return skipped(name, params, kNullTolerance, "requires phi = pi/2 or 3pi/2");
    const auto d = floquet_decompose_time_reversal(m, p, cfg.propagator, cfg.samples_per_period);
    return make_report(name, params, d.mode_apis.cwiseAbs().maxCoeff(), kNullTolerance);
}

CheckReport check_mode_mirror_and_shift(const ModelParams& m, const DriveParams& p, const std::vector<double>& phis,
                                        const CheckSettings& cfg) {
    const std::string name = "mode_mirror_shift";
    const auto params = with_grid(snapshot(m, p, cfg), phis);
    if (phis.empty()) throw std::invalid_argument("check_mode_mirror_and_shift: empty phi grid");
    return guarded(name, params, kNullTolerance, [&] {
        PhaseCache cache(m, p, cfg, true);
        double res = 0.0;
        for (double phi : phis) {
            const auto& a = cache.at(phi);
            const auto& mirror = cache.at(-phi);
            const auto pm = pair_modes(a, mirror);
            const auto& shift = cache.at(phi + kPi);
            const auto ps = pair_modes(a, shift);
            for (Eigen::Index i = 0; i < a.size(); ++i) {
                const auto u = static_cast<std::size_t>(i);
                res = std::max(res, std::abs(a.mode_apis[i] - mirror.mode_apis[pm[u]]));
                res = std::max(res, std::abs(a.mode_apis[i] + shift.mode_apis[ps[u]]));
            }
        }
        return make_report(name, params, res, kNullTolerance);
    });
}

CheckReport check_weight_cross_state(const ModelParams& m, const DriveParams& p, double theta, double varphi,
                                     const std::vector<double>& phis, const CheckSettings& cfg) {
    const std::string name = "weight_cross_state";
    auto params = with_grid(snapshot(m, p, cfg), phis);
    params["theta"] = theta;
    params["varphi"] = varphi;
    if (phis.empty()) throw std::invalid_argument("check_weight_cross_state: empty phi grid");
    return guarded(name, params, kNullTolerance, [&] {
        PhaseCache cache(m, p, cfg, true);
        const QuantumState plus = acs_state({theta, varphi}, m.N());
        const QuantumState minus = acs_state({theta, -varphi}, m.N());
        double res = 0.0;
        for (double phi : phis) {
            const auto& a = cache.at(phi);
            const auto& b = cache.at(-phi);
            const auto pr = pair_modes(a, b);
            const RVector wa = mode_weights(plus, a).weights;
            const RVector wb = mode_weights(minus, b).weights;
            for (Eigen::Index i = 0; i < a.size(); ++i) res = std::max(res, std::abs(wa[i] - wb[pr[static_cast<std::size_t>(i)]]));
            res = std::max(res, std::abs(wa.dot(a.mode_apis) - wb.dot(b.mode_apis)));
        }
        return make_report(name, params, res, kNullTolerance);
    });
}

CheckReport check_rotation_reversal_order(const ModelParams& m, const DriveParams& p, const CheckSettings& cfg) {
    const std::string name = "rotation_reversal_order";
    const auto params = snapshot(m, p, cfg);
    const bool tr = time_reversal_phase(p);
    if (!tr && !drive_off(p)) {
        return skipped(name, params, kIdentityTolerance, "requires phi = pi/2 or 3pi/2");
    }
    const int K = cfg.samples_per_period;
    if (K % 2 != 0) throw std::invalid_argument("check_rotation_reversal_order: samples_per_period must be even");
    return guarded(name, params, kIdentityTolerance, [&] {
        const FloquetDecomposition d = tr ? floquet_decompose_time_reversal(m, p, cfg.propagator, K)
                                          : floquet_decompose(m, p, cfg.propagator, K);
        const Propagator prop(m, p, cfg.propagator);
        const double T = p.period();
        const Eigen::Index n = m.dim();
        // first[k] = U(kT/K) Phi(0), second[k] = U(T + kT/K) Phi(0), k = 1..K.
        std::vector<CMatrix> first(static_cast<std::size_t>(K + 1)), second(static_cast<std::size_t>(K + 1));
        prop.sweep_period(d.modes0, K, [&](int k, const CMatrix& X) { first[static_cast<std::size_t>(k)] = X; });
        prop.sweep_period(first.back(), K, [&](int k, const CMatrix& X) { second[static_cast<std::size_t>(k)] = X; });
        first[0] = d.modes0;

        const CVector rz = rotation_z_pi(m.N());
        double res = 0.0;
        for (Eigen::Index a = 0; a < n; ++a) {
            const double eps = d.quasi_energies[a];
            auto periodic = [&](int idx, bool late) -> CVector {
                const double t = (late ? T : 0.0) + idx * T / K;
                const CMatrix& X = late ? second[static_cast<std::size_t>(idx)] : first[static_cast<std::size_t>(idx)];
                return std::polar(1.0, eps * t) * X.col(a);
            };
            for (int j = 0; j < K; ++j) {
                // tau2 = (-T/2 - t_j) mod T, tau1 = tau2 + T = (T/2 - t_j) mod T + T.
                const int i2 = ((-K / 2 - j) % K + K) % K;
                const CVector early = periodic(i2, false);
                const CVector late = i2 == 0 ? periodic(K, false) : periodic(i2, true);
                const CVector u = rz.cwiseProduct(apply_theta(late));
                const CVector v = apply_theta(rz.cwiseProduct(early));
                res = std::max(res, phase_aligned_distance(u, v));
            }
        }
        return make_report(name, params, res, kIdentityTolerance);
    });
}

CheckReport check_conjugate_drive(const ModelParams& m, const DriveParams& p, const std::vector<double>& phis,
                                  const CheckSettings& cfg) {
    const std::string name = "conjugate_drive";
    const auto params = with_grid(snapshot(m, p, cfg), phis);
    if (phis.empty()) throw std::invalid_argument("check_conjugate_drive: empty phi grid");
    return guarded(name, params, kIdentityTolerance, [&] {
        PhaseCache cache(m, p, cfg, false);
        double res = 0.0;
        for (double phi : phis) {
            const auto& a = cache.at(phi);
            const auto& b = cache.at(-phi);
            const auto pr = pair_modes(a, b);
            for (Eigen::Index i = 0; i < a.size(); ++i) {
                const CVector w = b.modes0.col(pr[static_cast<std::size_t>(i)]).conjugate();
                res = std::max(res, phase_aligned_distance(a.modes0.col(i), w));
            }
        }
        return make_report(name, params, res, kIdentityTolerance);
    });
}

CheckReport check_coefficient_relation(const ModelParams& m, const DriveParams& p, const CheckSettings& cfg) {
    const std::string name = "coefficient_relation";
    const auto params = snapshot(m, p, cfg);
    if (!time_reversal_phase(p)) return skipped(name, params, kIdentityTolerance, "requires phi = pi/2 or 3pi/2");
    const int K = cfg.samples_per_period;
    if (K % 2 != 0) throw std::invalid_argument("check_coefficient_relation: samples_per_period must be even");
    const FloquetDecomposition d = floquet_decompose_time_reversal(m, p, cfg.propagator, K);
    const Propagator prop(m, p, cfg.propagator);
    const double T = p.period();
    std::vector<RMatrix> mag(static_cast<std::size_t>(K));
    mag[0] = d.modes0.cwiseAbs();
    prop.sweep_period(d.modes0, K, [&](int k, const CMatrix& X) {
        if (k == K) return;
        CMatrix Y = X;
        for (Eigen::Index a = 0; a < Y.cols(); ++a) Y.col(a) *= std::polar(1.0, d.quasi_energies[a] * k * T / K);
        mag[static_cast<std::size_t>(k)] = Y.cwiseAbs();
    });
    double res = 0.0;
    for (int j = 0; j < K; ++j) {
        const int r = ((K / 2 - j) % K + K) % K;
        const RMatrix flipped = mag[static_cast<std::size_t>(r)].colwise().reverse();
        res = std::max(res, (mag[static_cast<std::size_t>(j)] - flipped).cwiseAbs().maxCoeff());
    }
    return make_report(name, params, res, kIdentityTolerance);
}

const std::vector<std::string>& suite_check_names() {
    static const std::vector<std::string> names{"parity_null",          "time_reversal_null",
                                                "mode_mirror_shift",    "weight_cross_state",
                                                "rotation_reversal_order", "conjugate_drive",
                                                "coefficient_relation"};
    return names;
}

std::vector<CheckReport> run_suite(const SuiteConfig& cfg) {
    if (cfg.checks.empty()) throw std::invalid_argument("run_suite: empty check selection");
    const auto& known = suite_check_names();
    for (const auto& c : cfg.checks) {
        if (std::find(known.begin(), known.end(), c) == known.end()) {
            throw std::invalid_argument("run_suite: unknown check '" + c + "'");
        }
    }
    const bool needs_grid = std::any_of(cfg.checks.begin(), cfg.checks.end(), [](const std::string& c) {
        return c == "mode_mirror_shift" || c == "weight_cross_state" || c == "conjugate_drive";
    });
    if (needs_grid && cfg.phis.empty()) throw std::invalid_argument("run_suite: phi grid required");

    std::vector<CheckReport> out(cfg.checks.size());
    parallel_for(cfg.checks.size(), cfg.threads, [&](std::size_t i) {
        const std::string& c = cfg.checks[i];
        const auto& m = cfg.model;
        const auto& p = cfg.drive;
        const auto& s = cfg.settings;
        if (c == "parity_null") out[i] = check_parity_null(m, p, s);
        else if (c == "time_reversal_null") out[i] = check_time_reversal_null(m, p, s);
        else if (c == "mode_mirror_shift") out[i] = check_mode_mirror_and_shift(m, p, cfg.phis, s);
        else if (c == "weight_cross_state") out[i] = check_weight_cross_state(m, p, cfg.initial.theta, cfg.initial.varphi, cfg.phis, s);
        else if (c == "rotation_reversal_order") out[i] = check_rotation_reversal_order(m, p, s);
        else if (c == "conjugate_drive") out[i] = check_conjugate_drive(m, p, cfg.phis, s);
        else out[i] = check_coefficient_relation(m, p, s);
    });
    return out;
}

}  // namespace bjj
