// Schrödinger propagation under H_S(t), observable
// time series and the direct long-time average of the population imbalance.
//
// The propagator is a commutator-free Magnus integrator: every substep is a
// product of exponentials of Hermitian tridiagonal matrices, so the one-period
// map is unitary to rounding error regardless of the step size.

#pragma once

#include "bjj/model.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace bjj {

class PropagationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class MagnusScheme {
    Midpoint,  // second order, one exponential per substep
    CF4,       // fourth order commutator-free, two exponentials per substep
};

struct PropagatorConfig {
    int steps_per_period{256};
    double tolerance{1e-10};
    MagnusScheme scheme{MagnusScheme::CF4};

    void validate() const;
};

// Averaging window [tau, tau + tau'] with tau = burn_in_periods T and
// tau' = span_periods T, sampled K = samples_per_period times per period.
struct AveragingWindow {
    long burn_in_periods{1000};
    long span_periods{10000};
    int samples_per_period{16};

    void validate() const;
    double burn_in(double T) const noexcept { return static_cast<double>(burn_in_periods) * T; }
    double span(double T) const noexcept { return static_cast<double>(span_periods) * T; }
};

// Propagators U(k T/K, 0), k = 1..K, for one drive period. maps.back() is
// the monodromy U(T).
struct PeriodMaps {
    int samples_per_period{};
    double period{};
    std::vector<CMatrix> maps;

    const CMatrix& monodromy() const { return maps.back(); }
    // U(k T/K, 0) for k = 0..K as a matrix (k = 0 is the identity).
    CMatrix at(int k) const;
};

class Propagator {
public:
    Propagator(ModelParams model, DriveParams drive, PropagatorConfig cfg = {});

    const ModelParams& model() const noexcept { return model_; }
    const DriveParams& drive() const noexcept { return drive_; }
    const PropagatorConfig& config() const noexcept { return cfg_; }
    double substep() const noexcept { return h_; }

    // Direct substepping from t0 to t1 (t1 >= t0) on the global grid j*h.
    CVector evolve(CVector psi, double t0, double t1) const;

    // As evolve, but whole-period strides use the monodromy when that is
    // cheaper than substepping. Throws PropagationError on norm drift.
    QuantumState propagate(const QuantumState& s, double t0, double t1) const;

    // Requires steps_per_period to be a multiple of samples_per_period.
    PeriodMaps period_maps(int samples_per_period) const;

    // Carries the columns of start from t = 0 through one period and hands
    // U(kT/K, 0) * start to at_sample for k = 1..K.
    void sweep_period(const CMatrix& start, int samples_per_period,
                      const std::function<void(int, const CMatrix&)>& at_sample) const;

private:
    struct Stage {
        double weight;  // fraction of h
        double drive;   // coefficient of Jz, i.e. 2 f(t) at the stage node
    };

    // Stages of one substep [t, t+h'] in application order.
    std::vector<Stage> stages(double t, double hstep) const;
    void stage_eigen(const Stage& st, double hstep, RVector& values, RMatrix& vectors) const;
    void step_vector(CVector& psi, double t, double hstep) const;

    ModelParams model_;
    DriveParams drive_;
    PropagatorConfig cfg_;
    double h_;
    RVector mvals_;
    RVector jx_off_;
};

QuantumState propagate(const QuantumState& s, double t0, double t1, const ModelParams& m, const DriveParams& p,
                       const PropagatorConfig& cfg = {});

// States sampled on t = j T/K over [tau, tau + tau'] with trapezoid weights
// summing to one. Sinks see blocks of columns in no particular time order.
struct SampleBlock {
    CMatrix states;
    std::vector<double> times;
    std::vector<double> weights;
};

void sample_window(const QuantumState& s0, const AveragingWindow& w, const PeriodMaps& maps,
                   const std::function<void(const SampleBlock&)>& sink);

struct ObservableSample {
    double t{};
    double delta_rho{};
    double depletion{};
};

std::vector<ObservableSample> observable_series(const QuantumState& s0, double horizon, const PeriodMaps& maps);
std::vector<ObservableSample> observable_series(const QuantumState& s0, double horizon, const ModelParams& m,
                                                const DriveParams& p, const PropagatorConfig& cfg = {},
                                                int samples_per_period = 16);

double direct_api(const QuantumState& s0, const AveragingWindow& w, const PeriodMaps& maps);
double direct_api(const QuantumState& s0, const AveragingWindow& w, const ModelParams& m, const DriveParams& p,
                  const PropagatorConfig& cfg = {});

}  // namespace bjj
