#include "bjj/quantum_dynamics.hpp"

#include "tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace bjj {

namespace {

constexpr double kGridSlack = 1e-9;
constexpr Eigen::Index kBlockPeriods = 32;

}  // namespace

void PropagatorConfig::validate() const {
    if (steps_per_period < 1) throw std::invalid_argument("PropagatorConfig: steps_per_period must be >= 1");
    if (!(tolerance > 0.0)) throw std::invalid_argument("PropagatorConfig: tolerance must be positive");
}

void AveragingWindow::validate() const {
    if (burn_in_periods < 0) throw std::invalid_argument("AveragingWindow: burn_in must be >= 0");
    if (span_periods < 1) throw std::invalid_argument("AveragingWindow: span must be > 0");
    if (samples_per_period < 1) throw std::invalid_argument("AveragingWindow: samples_per_period must be >= 1");
}

CMatrix PeriodMaps::at(int k) const {
    if (k == 0) return CMatrix::Identity(maps.front().rows(), maps.front().cols());
    return maps.at(static_cast<std::size_t>(k - 1));
}

Propagator::Propagator(ModelParams model, DriveParams drive, PropagatorConfig cfg)
    : model_(model), drive_(drive), cfg_(cfg) {
    cfg_.validate();
    h_ = drive_.period() / cfg_.steps_per_period;
    mvals_.resize(model_.dim());
    for (Eigen::Index k = 0; k < model_.dim(); ++k) mvals_[k] = m_of(model_.N(), k);
    jx_off_ = jx_offdiagonal(model_.N());
}

std::vector<Propagator::Stage> Propagator::stages(double t, double hstep) const {
    if (cfg_.scheme == MagnusScheme::Midpoint) {
        return {{1.0, 2.0 * drive_.force(t + 0.5 * hstep)}};
    }
    static const double s3 = std::sqrt(3.0);
    const double c1 = 0.5 - s3 / 6.0;
    const double c2 = 0.5 + s3 / 6.0;
    const double a1 = (3.0 - 2.0 * s3) / 12.0;
    const double a2 = (3.0 + 2.0 * s3) / 12.0;
    const double g1 = 2.0 * drive_.force(t + c1 * hstep);
    const double g2 = 2.0 * drive_.force(t + c2 * hstep);
    // exp(-i h (a1 H1 + a2 H2)) exp(-i h (a2 H1 + a1 H2)); the right factor acts first.
    return {{a1 + a2, a2 * g1 + a1 * g2}, {a1 + a2, a1 * g1 + a2 * g2}};
}

void Propagator::stage_eigen(const Stage& st, double hstep, RVector& values, RMatrix& vectors) const {
    (void)hstep;
    const RVector diag = (st.weight * model_.U()) * mvals_.array().square().matrix() + st.drive * mvals_;
    const RVector off = -st.weight * jx_off_;
    auto eig = detail::tridiagonal_eigen(diag, off);
    values = std::move(eig.values);
    vectors = std::move(eig.vectors);
}

void Propagator::step_vector(CVector& psi, double t, double hstep) const {
    RVector values;
    RMatrix V;
    for (const Stage& st : stages(t, hstep)) {
        stage_eigen(st, hstep, values, V);
        const RVector re = V.transpose() * psi.real();
        const RVector im = V.transpose() * psi.imag();
        CVector y(psi.size());
        for (Eigen::Index k = 0; k < y.size(); ++k) {
            y[k] = cplx(re[k], im[k]) * std::polar(1.0, -hstep * values[k]);
        }
        const RVector yr = y.real();
        const RVector yi = y.imag();
        const RVector outr = V * yr;
        const RVector outi = V * yi;
        for (Eigen::Index k = 0; k < psi.size(); ++k) psi[k] = cplx(outr[k], outi[k]);
    }
}

CVector Propagator::evolve(CVector psi, double t0, double t1) const {
    if (t1 < t0) throw std::invalid_argument("Propagator::evolve: t1 < t0");
    if (psi.size() != model_.dim()) throw std::invalid_argument("Propagator::evolve: dimension mismatch");
    if (t1 == t0) return psi;

    const long S = cfg_.steps_per_period;
    const auto j_start = static_cast<long>(std::ceil(t0 / h_ - kGridSlack));
    const auto j_end = static_cast<long>(std::floor(t1 / h_ + kGridSlack));
    if (j_start > j_end) {
        step_vector(psi, t0, t1 - t0);
        return psi;
    }
    const double head = j_start * h_ - t0;
    if (head > kGridSlack * h_) step_vector(psi, t0, head);
    for (long j = j_start; j < j_end; ++j) {
        long jr = j % S;
        if (jr < 0) jr += S;
        step_vector(psi, jr * h_, h_);
    }
    const double tail = t1 - j_end * h_;
    if (tail > kGridSlack * h_) step_vector(psi, j_end * h_, tail);
    return psi;
}

QuantumState Propagator::propagate(const QuantumState& s, double t0, double t1) const {
    if (s.N() != model_.N()) throw std::invalid_argument("propagate: particle number mismatch");
    if (t1 < t0) throw std::invalid_argument("propagate: t1 < t0");
    if (t1 == t0) return s;

    const double T = drive_.period();
    const auto p0 = static_cast<long>(std::ceil(t0 / T - kGridSlack));
    const auto p1 = static_cast<long>(std::floor(t1 / T + kGridSlack));
    CVector psi = s.amplitudes();
    if (p1 - p0 > 2 * model_.dim()) {
        psi = evolve(std::move(psi), t0, p0 * T);
        const CMatrix U = period_maps(1).monodromy();
        for (long p = p0; p < p1; ++p) psi = U * psi;
        psi = evolve(std::move(psi), p1 * T, t1);
    } else {
        psi = evolve(std::move(psi), t0, t1);
    }
    const double drift = std::abs(psi.norm() - 1.0);
    if (drift > 10.0 * cfg_.tolerance) {
        throw PropagationError("propagate: norm drift " + std::to_string(drift) + " exceeds tolerance");
    }
    return QuantumState::normalized(s.N(), std::move(psi));
}

void Propagator::sweep_period(const CMatrix& start, int samples_per_period,
                              const std::function<void(int, const CMatrix&)>& at_sample) const {
    const int S = cfg_.steps_per_period;
    if (samples_per_period < 1 || S % samples_per_period != 0) {
        throw std::invalid_argument("steps_per_period must be a multiple of samples_per_period");
    }
    if (start.rows() != model_.dim()) throw std::invalid_argument("sweep_period: dimension mismatch");
    const Eigen::Index n = model_.dim();
    const Eigen::Index c = start.cols();
    const int stride = S / samples_per_period;

    // W = [Re | Im]; every stage is W <- V e^{-i h Lambda} V^T W with V real.
    RMatrix W(n, 2 * c);
    W.leftCols(c) = start.real();
    W.rightCols(c) = start.imag();
    RMatrix X(n, 2 * c);
    RMatrix Xr(n, c);
    RVector values;
    RMatrix V;

    for (int j = 0; j < S; ++j) {
        for (const Stage& st : stages(j * h_, h_)) {
            stage_eigen(st, h_, values, V);
            X.noalias() = V.transpose() * W;
            const RVector cs = (h_ * values).array().cos().matrix();
            const RVector sn = (h_ * values).array().sin().matrix();
            Xr = X.leftCols(c);
            X.leftCols(c) = cs.asDiagonal() * Xr + sn.asDiagonal() * X.rightCols(c);
            X.rightCols(c) = cs.asDiagonal() * X.rightCols(c) - sn.asDiagonal() * Xr;
            W.noalias() = V * X;
        }
        if ((j + 1) % stride == 0) {
            CMatrix B(n, c);
            B.real() = W.leftCols(c);
            B.imag() = W.rightCols(c);
            at_sample((j + 1) / stride, B);
        }
    }
}

PeriodMaps Propagator::period_maps(int samples_per_period) const {
    PeriodMaps out;
    out.samples_per_period = samples_per_period;
    out.period = drive_.period();
    out.maps.reserve(static_cast<std::size_t>(std::max(samples_per_period, 0)));
    const Eigen::Index n = model_.dim();
    sweep_period(CMatrix::Identity(n, n), samples_per_period,
                 [&](int, const CMatrix& U) { out.maps.push_back(U); });
    return out;
}

QuantumState propagate(const QuantumState& s, double t0, double t1, const ModelParams& m, const DriveParams& p,
                       const PropagatorConfig& cfg) {
    return Propagator(m, p, cfg).propagate(s, t0, t1);
}

void sample_window(const QuantumState& s0, const AveragingWindow& w, const PeriodMaps& maps,
                   const std::function<void(const SampleBlock&)>& sink) {
    w.validate();
    if (w.samples_per_period != maps.samples_per_period) {
        throw std::invalid_argument("sample_window: window and period maps disagree on samples per period");
    }
    const int K = maps.samples_per_period;
    const double T = maps.period;
    const CMatrix& U = maps.monodromy();
    const double base = 1.0 / (static_cast<double>(K) * static_cast<double>(w.span_periods));

    CVector psi = s0.amplitudes();
    for (long p = 0; p < w.burn_in_periods; ++p) psi = U * psi;

    const long first = w.burn_in_periods;
    const long last = w.burn_in_periods + w.span_periods;
    long p = first;
    while (p < last) {
        const Eigen::Index B = std::min<Eigen::Index>(kBlockPeriods, last - p);
        CMatrix strobe(psi.size(), B);
        for (Eigen::Index b = 0; b < B; ++b) {
            strobe.col(b) = psi;
            psi = U * psi;
        }
        for (int k = 0; k < K; ++k) {
            SampleBlock blk;
            blk.states = (k == 0) ? strobe : CMatrix(maps.maps[static_cast<std::size_t>(k - 1)] * strobe);
            blk.times.resize(static_cast<std::size_t>(B));
            blk.weights.assign(static_cast<std::size_t>(B), base);
            for (Eigen::Index b = 0; b < B; ++b) {
                blk.times[static_cast<std::size_t>(b)] = (static_cast<double>(p + b) + static_cast<double>(k) / K) * T;
            }
            if (k == 0 && p == first) blk.weights[0] = 0.5 * base;
            sink(blk);
        }
        p += B;
    }
    SampleBlock tail;
    tail.states = psi;
    tail.times = {static_cast<double>(last) * T};
    tail.weights = {0.5 * base};
    sink(tail);
}

std::vector<ObservableSample> observable_series(const QuantumState& s0, double horizon, const PeriodMaps& maps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("observable_series: horizon must be positive");
    const int K = maps.samples_per_period;
    const double T = maps.period;
    const double dt = T / K;
    const auto J = static_cast<long>(std::floor(horizon / dt + kGridSlack));
    const int N = s0.N();

    std::vector<ObservableSample> out;
    out.reserve(static_cast<std::size_t>(J + 1));
    CVector strobe = s0.amplitudes();
    for (long j = 0; j <= J; ++j) {
        const long k = j % K;
        if (k == 0 && j > 0) strobe = maps.monodromy() * strobe;
        CVector v = (k == 0) ? strobe : CVector(maps.maps[static_cast<std::size_t>(k - 1)] * strobe);
        const QuantumState st = QuantumState::normalized(N, std::move(v));
        out.push_back({static_cast<double>(j / K) * T + static_cast<double>(k) * dt, expect_jz(st),
                       reduced_density(st).depletion});
    }
    return out;
}

std::vector<ObservableSample> observable_series(const QuantumState& s0, double horizon, const ModelParams& m,
                                                const DriveParams& p, const PropagatorConfig& cfg,
                                                int samples_per_period) {
    const Propagator prop(m, p, cfg);
    return observable_series(s0, horizon, prop.period_maps(samples_per_period));
}

double direct_api(const QuantumState& s0, const AveragingWindow& w, const PeriodMaps& maps) {
    const int N = s0.N();
    RVector mvals(N + 1);
    for (int k = 0; k <= N; ++k) mvals[k] = m_of(N, k);
    double acc = 0.0;
    sample_window(s0, w, maps, [&](const SampleBlock& blk) {
        const RVector jz = mvals.transpose() * blk.states.cwiseAbs2();
        for (Eigen::Index b = 0; b < jz.size(); ++b) acc += blk.weights[static_cast<std::size_t>(b)] * jz[b];
    });
    return 2.0 * acc / N;
}

double direct_api(const QuantumState& s0, const AveragingWindow& w, const ModelParams& m, const DriveParams& p,
                  const PropagatorConfig& cfg) {
    const Propagator prop(m, p, cfg);
    return direct_api(s0, w, prop.period_maps(w.samples_per_period));
}

}  // namespace bjj
