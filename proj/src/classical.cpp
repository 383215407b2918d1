#include "bjj/classical.hpp"

#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace bjj {

namespace odeint = boost::numeric::odeint;

namespace {

using State3 = std::array<double, 3>;

constexpr double kTimeSlack = 1e-9;

}  // namespace

ClassicalState ClassicalState::from_pendulum(double Z, double phi, double t) {
    if (!(Z >= -1.0 && Z <= 1.0)) throw std::invalid_argument("ClassicalState: Z must lie in [-1, 1]");
    const double r = std::sqrt(std::max(0.0, 1.0 - Z * Z));
    ClassicalState c;
    c.s = {r * std::cos(phi), r * std::sin(phi), Z};
    c.t = t;
    return c;
}

double ClassicalState::phi() const noexcept { return wrap_phase(std::atan2(s.y(), s.x())); }

void ClassicalConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("ClassicalConfig: tolerances must be positive");
    if (!(initial_step > 0.0) || !(min_step > 0.0)) throw std::invalid_argument("ClassicalConfig: steps must be positive");
}

Eigen::Vector3d classical_rhs(const Eigen::Vector3d& s, double t, double Lambda, const DriveParams& p) {
    const Eigen::Vector3d g(-1.0, 0.0, Lambda * s.z() + 2.0 * p.force(t));
    return g.cross(s);
}

PendulumRates pendulum_rhs(double Z, double phi, double t, double Lambda, const DriveParams& p) {
    const double r = std::sqrt(1.0 - Z * Z);
    return {-r * std::sin(phi), Lambda * Z + Z * std::cos(phi) / r + 2.0 * p.force(t)};
}

double classical_energy(const Eigen::Vector3d& s, double Lambda) { return 0.5 * Lambda * s.z() * s.z() - s.x(); }

ClassicalIntegrator::ClassicalIntegrator(double Lambda, DriveParams p, ClassicalConfig cfg, ClassicalState init)
    : Lambda_(Lambda), p_(p), cfg_(cfg), state_(init), dt_(cfg.initial_step) {
    cfg_.validate();
    if (std::abs(state_.s.norm() - 1.0) > 1e-9) throw std::invalid_argument("ClassicalIntegrator: |s| must be 1");
}

void ClassicalIntegrator::advance_to(double t_end) {
    if (t_end < state_.t - kTimeSlack) throw std::invalid_argument("ClassicalIntegrator: cannot integrate backwards");
    auto stepper = odeint::make_controlled(cfg_.abs_tol, cfg_.rel_tol, odeint::runge_kutta_fehlberg78<State3>());
    const double L = Lambda_;
    const DriveParams& p = p_;
    auto rhs = [L, &p](const State3& x, State3& dxdt, double t) {
        const double gz = L * x[2] + 2.0 * p.force(t);
        dxdt[0] = -gz * x[1];
        dxdt[1] = gz * x[0] + x[2];
        dxdt[2] = -x[1];
    };

    State3 x{state_.s.x(), state_.s.y(), state_.s.z()};
    double t = state_.t;
    while (t_end - t > kTimeSlack * std::max(1.0, std::abs(t_end))) {
        const double remaining = t_end - t;
        const bool capped = dt_ >= remaining;
        double dt = capped ? remaining : dt_;
        const double t_before = t;
        if (stepper.try_step(rhs, x, t, dt) == odeint::success) {
            const double n = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            max_drift_ = std::max(max_drift_, std::abs(n - 1.0));
            for (double& v : x) v /= n;
            ++accepted_;
            if (!capped || dt > dt_) dt_ = dt;
        } else {
            dt_ = dt;
            if (dt_ < cfg_.min_step) {
                throw IntegrationError("classical integrator: step size underflow at t = " + std::to_string(t_before));
            }
        }
    }
    state_.s = {x[0], x[1], x[2]};
    state_.t = t_end;
}

Trajectory integrate_classical(const ClassicalState& init, double horizon, double Lambda, const DriveParams& p,
                               const ClassicalConfig& cfg, double sample_dt) {
    if (!(horizon > 0.0)) throw std::invalid_argument("integrate_classical: horizon must be positive");
    if (!(sample_dt > 0.0)) throw std::invalid_argument("integrate_classical: sample_dt must be positive");
    ClassicalIntegrator integ(Lambda, p, cfg, init);
    const auto J = static_cast<long>(std::floor(horizon / sample_dt + kTimeSlack));
    Trajectory tr;
    tr.t.reserve(static_cast<std::size_t>(J + 1));
    tr.Z.reserve(static_cast<std::size_t>(J + 1));
    tr.phi.reserve(static_cast<std::size_t>(J + 1));
    for (long j = 0; j <= J; ++j) {
        integ.advance_to(init.t + static_cast<double>(j) * sample_dt);
        tr.t.push_back(integ.state().t);
        tr.Z.push_back(integ.state().Z());
        tr.phi.push_back(integ.state().phi());
    }
    return tr;
}

PSOSData psos(const ClassicalState& init, long n_periods, double Lambda, const DriveParams& p,
              const ClassicalConfig& cfg) {
    if (n_periods < 1) throw std::invalid_argument("psos: n_periods must be >= 1");
    ClassicalIntegrator integ(Lambda, p, cfg, init);
    const double T = p.period();
    PSOSData out;
    out.Lambda = Lambda;
    out.drive = p;
    out.Z.reserve(static_cast<std::size_t>(n_periods));
    out.phi.reserve(static_cast<std::size_t>(n_periods));
    for (long k = 1; k <= n_periods; ++k) {
        integ.advance_to(init.t + static_cast<double>(k) * T);
        out.Z.push_back(integ.state().Z());
        out.phi.push_back(integ.state().phi());
    }
    return out;
}

void classical_window(const ClassicalState& init, const AveragingWindow& w, double Lambda, const DriveParams& p,
                      const ClassicalConfig& cfg,
                      const std::function<void(double, const Eigen::Vector3d&, double)>& sink) {
    w.validate();
    ClassicalIntegrator integ(Lambda, p, cfg, init);
    const double T = p.period();
    const long K = w.samples_per_period;
    const long first = w.burn_in_periods * K;
    const long last = (w.burn_in_periods + w.span_periods) * K;
    const double base = 1.0 / static_cast<double>(last - first);
    for (long j = first; j <= last; ++j) {
        const double t = init.t + static_cast<double>(j / K) * T + static_cast<double>(j % K) * T / K;
        integ.advance_to(t);
        const double weight = (j == first || j == last) ? 0.5 * base : base;
        sink(t, integ.state().s, weight);
    }
}

double classical_api(const ClassicalState& init, const AveragingWindow& w, double Lambda, const DriveParams& p,
                     const ClassicalConfig& cfg) {
    double acc = 0.0;
    classical_window(init, w, Lambda, p, cfg,
                     [&](double, const Eigen::Vector3d& s, double weight) { acc += weight * s.z(); });
    return acc;
}

void PdfGrid::validate() const {
    if (nZ < 1 || nphi < 1) throw std::invalid_argument("PdfGrid: bin counts must be >= 1");
}

PhaseHistogram::PhaseHistogram(PdfGrid g) : grid_(g) {
    grid_.validate();
    w_ = RMatrix::Zero(grid_.nZ, grid_.nphi);
}

void PhaseHistogram::add(double Z, double phi, double weight) {
    const int i = std::clamp(static_cast<int>(std::floor((Z + 1.0) / grid_.dZ())), 0, grid_.nZ - 1);
    const int j = std::clamp(static_cast<int>(std::floor(wrap_phase(phi) / grid_.dphi())), 0, grid_.nphi - 1);
    w_(i, j) += weight;
    total_ += weight;
}

void PhaseHistogram::merge(const PhaseHistogram& other) {
    if (other.grid_.nZ != grid_.nZ || other.grid_.nphi != grid_.nphi) {
        throw std::invalid_argument("PhaseHistogram::merge: grids differ");
    }
    w_ += other.w_;
    total_ += other.total_;
}

PhasePDF phase_pdf(const PhaseHistogram& h) {
    if (!(h.total() > 0.0)) throw std::invalid_argument("phase_pdf: no samples");
    return {h.grid(), h.weights() / (h.weights().sum() * h.grid().bin_area())};
}

PhasePDF phase_pdf(const PSOSData& points, const PdfGrid& g) {
    PhaseHistogram h(g);
    for (std::size_t i = 0; i < points.size(); ++i) h.add(points.Z[i], points.phi[i]);
    return phase_pdf(h);
}

PhasePDF phase_pdf(const Trajectory& traj, const PdfGrid& g) {
    PhaseHistogram h(g);
    for (std::size_t i = 0; i < traj.size(); ++i) h.add(traj.Z[i], traj.phi[i]);
    return phase_pdf(h);
}

PhasePDF classical_pdf(const ClassicalState& init, const AveragingWindow& w, double Lambda, const DriveParams& p,
                       const ClassicalConfig& cfg, const PdfGrid& g) {
    PhaseHistogram h(g);
    classical_window(init, w, Lambda, p, cfg, [&](double, const Eigen::Vector3d& s, double weight) {
        h.add(s.z(), std::atan2(s.y(), s.x()), weight);
    });
    return phase_pdf(h);
}

double api_from_pdf(const PhasePDF& pdf) {
    double acc = 0.0;
    for (int i = 0; i < pdf.grid.nZ; ++i) acc += pdf.grid.Z_center(i) * pdf.density.row(i).sum();
    return acc * pdf.grid.bin_area();
}

}  // namespace bjj
