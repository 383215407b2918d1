// Mean-field limit: the driven non-rigid pendulum
//   H(Z, phi) = Lambda/2 Z^2 - sqrt(1 - Z^2) cos(phi) + 2 f(t) Z,
// integrated as a unit spin s = (sqrt(1-Z^2) cos phi, sqrt(1-Z^2) sin phi, Z)
// obeying ds/dt = grad H x s with grad H = (-1, 0, Lambda s_z + 2 f(t)).
// The Cartesian form has no coordinate singularity at the poles.

#pragma once

#include "bjj/model.hpp"
#include "bjj/quantum_dynamics.hpp"

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace bjj {

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ClassicalState {
    Eigen::Vector3d s{1.0, 0.0, 0.0};
    double t{0.0};

    static ClassicalState from_pendulum(double Z, double phi, double t = 0.0);

    double Z() const noexcept { return s.z(); }
    // atan2(s_y, s_x) wrapped to [0, 2pi).
    double phi() const noexcept;
};

struct ClassicalConfig {
    double rel_tol{1e-10};
    double abs_tol{1e-10};
    double initial_step{1e-2};
    double min_step{1e-12};

    void validate() const;
};

Eigen::Vector3d classical_rhs(const Eigen::Vector3d& s, double t, double Lambda, const DriveParams& p);

// (dZ/dt, dphi/dt) straight from the pendulum equations; valid for |Z| < 1.
struct PendulumRates {
    double Zdot;
    double phidot;
};
PendulumRates pendulum_rhs(double Z, double phi, double t, double Lambda, const DriveParams& p);

// Undriven energy Lambda/2 Z^2 - sqrt(1-Z^2) cos(phi) = Lambda/2 s_z^2 - s_x.
double classical_energy(const Eigen::Vector3d& s, double Lambda);

// Adaptive Runge-Kutta-Fehlberg 7(8) with |s| restored after every accepted
// step. advance_to lands exactly on the requested time.
class ClassicalIntegrator {
public:
    ClassicalIntegrator(double Lambda, DriveParams p, ClassicalConfig cfg, ClassicalState init);

    const ClassicalState& state() const noexcept { return state_; }
    void advance_to(double t);

    long accepted_steps() const noexcept { return accepted_; }
    // Largest | |s| - 1 | seen before renormalization.
    double max_norm_drift() const noexcept { return max_drift_; }

private:
    double Lambda_;
    DriveParams p_;
    ClassicalConfig cfg_;
    ClassicalState state_;
    double dt_;
    long accepted_{0};
    double max_drift_{0.0};
};

struct Trajectory {
    std::vector<double> t;
    std::vector<double> Z;
    std::vector<double> phi;

    std::size_t size() const noexcept { return t.size(); }
};

// Samples at t0 + j dt for j = 0..floor(horizon/dt).
Trajectory integrate_classical(const ClassicalState& init, double horizon, double Lambda, const DriveParams& p,
                               const ClassicalConfig& cfg = {}, double sample_dt = 0.1);

struct PSOSData {
    std::vector<double> Z;
    std::vector<double> phi;
    double Lambda{};
    DriveParams drive;

    std::size_t size() const noexcept { return Z.size(); }
};

// Strobes at t = k T, k = 1..n_periods.
PSOSData psos(const ClassicalState& init, long n_periods, double Lambda, const DriveParams& p,
              const ClassicalConfig& cfg = {});

// Streams samples on t = j T/K over the window with trapezoid weights that
// sum to one: sink(t, s, weight).
void classical_window(const ClassicalState& init, const AveragingWindow& w, double Lambda, const DriveParams& p,
                      const ClassicalConfig& cfg,
                      const std::function<void(double, const Eigen::Vector3d&, double)>& sink);

double classical_api(const ClassicalState& init, const AveragingWindow& w, double Lambda, const DriveParams& p,
                     const ClassicalConfig& cfg = {});

// Uniform bins on Z in [-1, 1] and phi in [0, 2pi).
struct PdfGrid {
    int nZ{200};
    int nphi{200};

    void validate() const;
    double dZ() const noexcept { return 2.0 / nZ; }
    double dphi() const noexcept { return kTwoPi / nphi; }
    double Z_center(int i) const noexcept { return -1.0 + (i + 0.5) * dZ(); }
    double phi_center(int j) const noexcept { return (j + 0.5) * dphi(); }
    double bin_area() const noexcept { return dZ() * dphi(); }
};

class PhaseHistogram {
public:
    explicit PhaseHistogram(PdfGrid g);

    void add(double Z, double phi, double weight = 1.0);
    void merge(const PhaseHistogram& other);
    double total() const noexcept { return total_; }
    const PdfGrid& grid() const noexcept { return grid_; }
    const RMatrix& weights() const noexcept { return w_; }

private:
    PdfGrid grid_;
    RMatrix w_;
    double total_{0.0};
};

// density(i, j) is per unit Z and phi; sum density * bin_area = 1.
struct PhasePDF {
    PdfGrid grid;
    RMatrix density;
};

// Throws std::invalid_argument on an empty histogram.
PhasePDF phase_pdf(const PhaseHistogram& h);
PhasePDF phase_pdf(const PSOSData& points, const PdfGrid& g);
PhasePDF phase_pdf(const Trajectory& traj, const PdfGrid& g);

// Continuous-time PDF over an averaging window.
PhasePDF classical_pdf(const ClassicalState& init, const AveragingWindow& w, double Lambda, const DriveParams& p,
                       const ClassicalConfig& cfg = {}, const PdfGrid& g = {});

// sum density * bin_area * Z_center.
double api_from_pdf(const PhasePDF& pdf);

}  // namespace bjj
