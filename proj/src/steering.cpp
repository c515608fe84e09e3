#include "qsteer/steering.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

namespace qsteer {

using Cd = std::complex<double>;
static constexpr Cd kI{0.0, 1.0};

void LyapunovConfig::check(const EigenBasis& basis) const {
    if (!(alpha > 0.0)) throw std::invalid_argument("LyapunovConfig: alpha > 0 required");
    if (s < 0.0) throw std::invalid_argument("LyapunovConfig: s >= 0 required");
    if (target < 1 || target > basis.n_modes)
        throw std::invalid_argument("LyapunovConfig: target index out of range");
    if (!alpha_admissible(*this, basis))
        throw std::invalid_argument("LyapunovConfig: alpha hits the exceptional set");
}

bool alpha_admissible(const LyapunovConfig& cfg, const EigenBasis& basis) {
    double min_gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j < basis.n_modes; ++j)
        min_gap = std::min(min_gap,
                           std::abs(cfg.alpha * std::pow(basis.shifted(j), cfg.s) + 1.0));
    return min_gap > 1e-12;
}

double auto_alpha(const ModalState& c0, const EigenBasis& basis, double s, int target) {
    double tail = 0.0;
    for (int j = 0; j < basis.n_modes; ++j) {
        if (j == target - 1) continue;
        tail += std::pow(basis.shifted(j), s) * std::norm(c0.coeffs(j));
    }
    return 0.5 / std::max(1.0, tail);
}

double lyapunov_value(const ModalState& c, const EigenBasis& basis, const LyapunovConfig& cfg) {
    if (c.dim() != basis.n_modes) throw std::invalid_argument("lyapunov_value: dimension");
    double tail = 0.0;
    for (int j = 0; j < basis.n_modes; ++j) {
        if (j == cfg.target - 1) continue;
        tail += std::pow(basis.shifted(j), cfg.s) * std::norm(c.coeffs(j));
    }
    return cfg.alpha * tail + 1.0 - std::norm(c.coeffs(cfg.target - 1));
}

double coercivity_constant(const LyapunovConfig& cfg, const EigenBasis& basis) {
    // ||c||_s^2 <= mu_i^s + V/alpha on the sphere, and sqrt(V) <= (1+V)/2.
    const double mu_i = std::pow(basis.shifted(cfg.target - 1), cfg.s);
    return std::sqrt(mu_i) + 0.5 / std::sqrt(cfg.alpha);
}

namespace {

// Lyapunov mode weights: g_j = alpha mu_j^s off target, -1 at the target.
Eigen::VectorXd mode_weights(const EigenBasis& basis, const LyapunovConfig& cfg) {
    Eigen::VectorXd g(basis.n_modes);
    for (int j = 0; j < basis.n_modes; ++j)
        g(j) = cfg.alpha * std::pow(basis.shifted(j), cfg.s);
    g(cfg.target - 1) = -1.0;
    return g;
}

double smallest_gap(const EigenBasis& basis) {
    double gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j + 1 < basis.n_modes; ++j)
        gap = std::min(gap, basis.lambdas(j + 1) - basis.lambdas(j));
    return gap;
}

double largest_gap(const EigenBasis& basis) {
    return basis.lambdas(basis.n_modes - 1) - basis.lambdas(0);
}

}  // namespace

Eigen::VectorXd phi_kernel(const ModalState& c0, const EigenBasis& basis,
                           const CouplingMatrix& B, const LyapunovConfig& cfg,
                           const Eigen::VectorXd& tgrid) {
    cfg.check(basis);
    const int N = basis.n_modes;
    if (c0.dim() != N || B.entries.rows() != N)
        throw std::invalid_argument("phi_kernel: dimension mismatch");

    const Eigen::VectorXd g = mode_weights(basis, cfg);
    const Eigen::MatrixXcd Bc = B.entries.cast<Cd>();
    Eigen::VectorXd phi(tgrid.size());
    Eigen::VectorXcd y(N);
    for (Eigen::Index t = 0; t < tgrid.size(); ++t) {
        for (int j = 0; j < N; ++j)
            y(j) = std::exp(-kI * basis.lambdas(j) * tgrid(t)) * c0.coeffs(j);
        const Cd pairing = y.cwiseProduct(g.cast<Cd>()).dot(Bc * y);
        phi(t) = 2.0 * pairing.imag();
    }
    return phi;
}

double bump_window(double tau, double T) {
    const double s = tau / T;
    if (!(s > 0.0) || !(s < 1.0)) return 0.0;
    // exp(4) normalizes the peak at s = 1/2 to one.
    return std::exp(4.0 - 1.0 / (s * (1.0 - s)));
}

Probe choose_probe(const ModalState& c0, const EigenBasis& basis, const CouplingMatrix& B,
                   const LyapunovConfig& cfg, double horizon_max, double cap,
                   double control_dt, double kernel_tol) {
    if (!(horizon_max > 0.0) || !(cap > 0.0) || !(control_dt > 0.0))
        throw std::invalid_argument("choose_probe: bad horizon/cap/dt");

    // Scan grid fine enough for the fastest frequency present.
    const double w_max = std::max(largest_gap(basis), 1e-8);
    const double dt_scan = std::min(control_dt * 8.0, (2.0 * M_PI / w_max) / 16.0);
    const int n_scan = static_cast<int>(std::ceil(horizon_max / dt_scan)) + 1;
    Eigen::VectorXd tgrid(n_scan);
    for (int t = 0; t < n_scan; ++t) tgrid(t) = std::min(t * dt_scan, horizon_max);
    const Eigen::VectorXd phi = phi_kernel(c0, basis, B, cfg, tgrid);

    if (phi.cwiseAbs().maxCoeff() <= kernel_tol)
        throw DegenerateKernel("phi kernel below tolerance on the whole horizon");

    // Candidate windows [0, T]; score by bump-weighted mean power so longer
    // windows do not win by length alone.
    const int n_cand = 64;
    const double T_min = std::max(16.0 * control_dt, horizon_max / n_cand);
    double best_T = horizon_max, best_score = -1.0;
    for (int c = 0; c < n_cand; ++c) {
        const double T = T_min + (horizon_max - T_min) * c / double(n_cand - 1);
        double acc = 0.0;
        int m = 0;
        while (m < n_scan && tgrid(m) <= T) ++m;
        for (int t = 0; t + 1 < m; ++t) {
            const double f0 = bump_window(tgrid(t), T) * phi(t) * phi(t);
            const double f1 = bump_window(tgrid(t + 1), T) * phi(t + 1) * phi(t + 1);
            acc += 0.5 * (f0 + f1) * (tgrid(t + 1) - tgrid(t));
        }
        const double score = acc / T;
        if (score > best_score) {
            best_score = score;
            best_T = T;
        }
    }

    // Align the window with the control grid and build w = eps bump Phi.
    const int nsteps = std::max(2, static_cast<int>(std::llround(best_T / control_dt)));
    const double T = nsteps * control_dt;
    Eigen::VectorXd wt(nsteps + 1);
    for (int k = 0; k <= nsteps; ++k) wt(k) = k * control_dt;
    const Eigen::VectorXd phi_ctrl = phi_kernel(c0, basis, B, cfg, wt);

    ControlSignal w;
    w.t0 = 0.0;
    w.t1 = T;
    w.dt = control_dt;
    w.amplitude_cap = cap;
    w.samples.resize(nsteps + 1);
    for (int k = 0; k <= nsteps; ++k) w.samples(k) = bump_window(wt(k), T) * phi_ctrl(k);
    const double peak = w.max_abs();
    if (peak <= kernel_tol)
        throw DegenerateKernel("phi kernel vanishes on the selected window");
    w.samples *= cap / peak;
    w.samples(0) = 0.0;
    w.samples(nsteps) = 0.0;
    w.check_probe_shape();

    // int Phi w by trapezoid on the control grid; positive by construction.
    double pairing = 0.0;
    for (int k = 0; k < nsteps; ++k)
        pairing += 0.5 * (phi_ctrl(k) * w.samples(k) + phi_ctrl(k + 1) * w.samples(k + 1)) *
                   control_dt;
    return Probe{T, std::move(w), pairing};
}

LineSearchResult line_search_sigma(const ModalState& c0, const ControlSignal& w, double T,
                                   const EigenBasis& basis, const CouplingMatrix& B,
                                   const LyapunovConfig& cfg, double pairing,
                                   const SteerParams& params) {
    (void)T;
    if (!(pairing > 0.0))
        throw std::invalid_argument("line_search_sigma: probe pairing must be positive");
    const double v0 = lyapunov_value(c0, basis, cfg);
    const double peak = w.max_abs();
    const double sigma_init = 0.5 * params.cap / std::max(peak, 1e-300);

    for (int m = 0; m <= params.m_max; ++m) {
        const double sigma = -sigma_init * std::pow(2.0, -m);
        ControlSignal trial = w;
        trial.samples *= sigma;
        trial.amplitude_cap = std::abs(sigma) * w.amplitude_cap;
        const ModalState c1 = propagate_final(c0, trial, basis, B);
        const double v1 = lyapunov_value(c1, basis, cfg);
        if (v1 <= v0 - params.armijo * std::abs(sigma) * pairing)
            return {sigma, v1};
    }
    throw LineSearchFailed("no Armijo-acceptable sigma after max halvings");
}

namespace {

// Bump-windowed single-frequency pulse at the gap between the target and the
// heaviest other mode; used to restore target overlap or to nudge the state
// off a degenerate-kernel configuration.
ControlSignal make_pre_pulse(const ModalState& c, const EigenBasis& basis,
                             const LyapunovConfig& cfg, const SteerParams& params,
                             double amplitude_scale, int variant) {
    const int i = cfg.target - 1;
    int p = -1;
    double best = -1.0;
    for (int j = 0; j < basis.n_modes; ++j) {
        if (j == i) continue;
        const double m = std::norm(c.coeffs(j));
        if (m > best) {
            best = m;
            p = j;
        }
    }
    const double freq = std::abs(basis.lambdas(i) - basis.lambdas(p)) + variant * 0.37;
    const double T = std::max(64.0 * params.control_dt,
                              3.0 * 2.0 * M_PI / std::max(freq, 1e-6));
    const int nsteps = static_cast<int>(std::llround(T / params.control_dt));
    ControlSignal u;
    u.t0 = 0.0;
    u.t1 = nsteps * params.control_dt;
    u.dt = params.control_dt;
    u.amplitude_cap = params.cap;
    u.samples.resize(nsteps + 1);
    const double amp = amplitude_scale * params.cap;
    for (int k = 0; k <= nsteps; ++k) {
        const double t = k * params.control_dt;
        u.samples(k) = amp * bump_window(t, u.t1) * std::cos(freq * t);
    }
    u.samples(0) = 0.0;
    u.samples(nsteps) = 0.0;
    return u;
}

}  // namespace

SteeringReport steer_to_eigenstate(const ModalState& c0, const EigenBasis& basis,
                                   const CouplingMatrix& B, const LyapunovConfig& cfg,
                                   const SteerParams& params) {
    cfg.check(basis);
    if (c0.sphere_error() > 1e-9)
        throw std::invalid_argument("steer_to_eigenstate: initial state off the unit sphere");

    const double gap = smallest_gap(basis);
    const double horizon_full =
        params.horizon_max > 0.0 ? params.horizon_max : 4.0 * 2.0 * M_PI / gap;

    SteeringReport rep;
    ModalState c = c0;

    // The cited preliminary-control lemma, constructively: a small generic
    // pulse restores overlap with the target mode before descent starts.
    int pre_variant = 0;
    while (std::abs(c.coeffs(cfg.target - 1)) < params.overlap_floor) {
        if (pre_variant > params.retry_budget)
            throw Stalled("could not establish target overlap with pre-pulses");
        ControlSignal pre = make_pre_pulse(c, basis, cfg, params, 0.1, pre_variant++);
        c = propagate_final(c, pre, basis, B);
        rep.control_segments.push_back(pre);
        ++rep.pre_pulses;
    }

    double v = lyapunov_value(c, basis, cfg);
    rep.lyapunov_history.push_back(v);

    double horizon = horizon_full;
    int consecutive_failures = 0;
    while (v > params.tol && rep.iterations < params.max_iter) {
        try {
            Probe probe = choose_probe(c, basis, B, cfg, horizon, params.cap,
                                       params.control_dt, params.kernel_tol);
            LineSearchResult ls =
                line_search_sigma(c, probe.w, probe.T, basis, B, cfg, probe.pairing, params);
            ControlSignal accepted = probe.w;
            accepted.samples *= ls.sigma;
            accepted.amplitude_cap = std::abs(ls.sigma) * probe.w.amplitude_cap;
            c = propagate_final(c, accepted, basis, B);
            v = ls.new_value;
            // A randomizing pre-pulse can raise V between accepted steps;
            // the recorded history stays strictly decreasing.
            if (v < rep.lyapunov_history.back()) rep.lyapunov_history.push_back(v);
            rep.accepted_sigmas.push_back(ls.sigma);
            rep.probe_horizons.push_back(probe.T);
            rep.pairings.push_back(probe.pairing);
            rep.control_segments.push_back(std::move(accepted));
            ++rep.iterations;
            consecutive_failures = 0;
            horizon = horizon_full;
        } catch (const DegenerateKernel&) {
            if (++consecutive_failures > params.retry_budget)
                throw Stalled("degenerate kernel persisted beyond the retry budget");
            ControlSignal pre =
                make_pre_pulse(c, basis, cfg, params, 0.02, consecutive_failures);
            c = propagate_final(c, pre, basis, B);
            v = lyapunov_value(c, basis, cfg);
            rep.control_segments.push_back(pre);
            ++rep.pre_pulses;
        } catch (const LineSearchFailed&) {
            if (++consecutive_failures > params.retry_budget)
                throw Stalled("line search failed beyond the retry budget");
            horizon = std::max(horizon / 2.0, 32.0 * params.control_dt);
        }
    }

    rep.final_state = c;
    rep.final_overlap = std::norm(c.coeffs(cfg.target - 1));
    double dist_sq = 0.0;
    for (int j = 0; j < basis.n_modes; ++j) {
        const double mu = std::pow(basis.shifted(j), cfg.s);
        if (j == cfg.target - 1) {
            const double r = 1.0 - std::abs(c.coeffs(j));
            dist_sq += mu * r * r;
        } else {
            dist_sq += mu * std::norm(c.coeffs(j));
        }
    }
    rep.final_sobolev_dist = std::sqrt(dist_sq);
    return rep;
}

ControlSignal SteeringReport::concatenated_control() const {
    if (control_segments.empty()) {
        ControlSignal u;
        u.t0 = 0.0;
        u.t1 = 1e-3;
        u.dt = 1e-3;
        u.samples = Eigen::VectorXd::Zero(2);
        return u;
    }
    const double dt = control_segments.front().dt;
    int total = 0;
    for (const auto& seg : control_segments) total += seg.steps();
    ControlSignal u;
    u.t0 = 0.0;
    u.dt = dt;
    u.t1 = total * dt;
    u.samples = Eigen::VectorXd::Zero(total + 1);
    int at = 0;
    for (const auto& seg : control_segments) {
        // Segment endpoints are zero, so overwriting the shared sample is safe.
        for (int k = 0; k <= seg.steps(); ++k) u.samples(at + k) = seg.samples(k);
        at += seg.steps();
    }
    return u;
}

}  // namespace qsteer
