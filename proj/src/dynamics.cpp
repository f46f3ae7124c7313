#include "eef/dynamics.hpp"

#include "eef/errors.hpp"
#include "eef/io.hpp"

#include <cmath>
#include <numeric>

namespace eef {

void SystemParams::validate() const {
    if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
    if (!(omega_p > 0.0)) throw DomainError("omega_p must be > 0");
    if (!(alpha_damp >= 0.0)) throw DomainError("alpha_damp must be >= 0");
    if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
    if (!std::isfinite(omega0_sq) || !std::isfinite(Omega0_sq)) {
        throw DomainError("frequencies must be finite");
    }
}

std::vector<double> Trajectory::positions() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.x);
    return out;
}

std::vector<double> Trajectory::velocities() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.v);
    return out;
}

std::vector<double> Trajectory::times() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.t);
    return out;
}

Derivative eom_rhs(const State& s, const SystemParams& p) {
    if (!std::isfinite(s.x) || !std::isfinite(s.v) || !std::isfinite(s.t)) {
        throw DomainError("eom_rhs: non-finite state");
    }
    const double wt = p.omega_p * s.t;
    const double drive =
        p.Omega0_sq * (2.0 * p.epsilon * std::cos(wt) +
                       0.5 * p.epsilon * p.epsilon * (1.0 + std::cos(2.0 * wt)));
    const double numer = p.lambda * s.x * s.v * s.v + p.omega0_sq * s.x - drive * s.x +
                         p.alpha_damp * s.v;
    return {s.v, -numer / (1.0 + p.lambda * s.x * s.x)};
}

State rk4_step(const State& s, const SystemParams& p, double dt) {
    const double h2 = 0.5 * dt;
    const Derivative k1 = eom_rhs(s, p);
    const Derivative k2 = eom_rhs({s.x + h2 * k1.dx, s.v + h2 * k1.dv, s.t + h2}, p);
    const Derivative k3 = eom_rhs({s.x + h2 * k2.dx, s.v + h2 * k2.dv, s.t + h2}, p);
    const Derivative k4 = eom_rhs({s.x + dt * k3.dx, s.v + dt * k3.dv, s.t + dt}, p);
    return {s.x + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
            s.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv), s.t + dt};
}

Trajectory integrate(const SystemParams& params, const State& ic, double t_end, double dt,
                     double sample_interval, double transient, const IntegrateOptions& options) {
    params.validate();
    if (!(dt > 0.0)) throw DomainError("integrate: dt must be > 0");
    if (!(transient >= 0.0)) throw DomainError("integrate: transient must be >= 0");
    if (!(t_end - ic.t > transient)) throw DomainError("integrate: t_end must exceed transient");
    const double ratio = sample_interval / dt;
    const auto stride = static_cast<long long>(std::llround(ratio));
    if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio) {
        throw DomainError("integrate: sample_interval must be an integer multiple of dt");
    }
    if (!std::isfinite(ic.x) || !std::isfinite(ic.v) || !std::isfinite(ic.t)) {
        throw DomainError("integrate: non-finite initial condition");
    }

    // Times are i·dt from the start, never accumulated, so runs with equal
    // inputs land on identical grid points.
    const auto total_steps = static_cast<long long>(std::llround((t_end - ic.t) / dt));
    const auto transient_steps = static_cast<long long>(std::llround(transient / dt));

    Trajectory traj;
    traj.dt_integrate = dt;
    traj.sample_interval = sample_interval;
    traj.transient_discarded = transient;
    traj.fine_t0 = ic.t + static_cast<double>(transient_steps + 1) * dt;
    if (options.keep_fine) {
        traj.fine_x.reserve(static_cast<std::size_t>(total_steps - transient_steps));
        traj.fine_v.reserve(static_cast<std::size_t>(total_steps - transient_steps));
    }
    traj.samples.reserve(static_cast<std::size_t>((total_steps - transient_steps) / stride + 1));

    State s = ic;
    for (long long i = 1; i <= total_steps; ++i) {
        s = rk4_step(s, params, dt);
        s.t = ic.t + static_cast<double>(i) * dt;
        if (!(std::abs(s.x) <= options.overflow_guard && std::abs(s.v) <= options.overflow_guard)) {
            throw IntegrationError("integration diverged at t=" + format_double(s.t), s.t);
        }
        if (i <= transient_steps) continue;
        if (options.keep_fine) {
            traj.fine_x.push_back(s.x);
            traj.fine_v.push_back(s.v);
        }
        if (i % stride == 0) traj.samples.push_back({s.t, s.x, s.v});
    }
    return traj;
}

std::vector<Peak> detect_peaks(std::span<const double> values, double t0, double spacing) {
    if (values.size() < 3) throw DomainError("detect_peaks: need at least 3 samples");
    std::vector<Peak> peaks;
    std::size_t i = 1;
    while (i + 1 < values.size()) {
        if (values[i - 1] < values[i]) {
            // Walk across a possible plateau.
            std::size_t j = i;
            while (j + 1 < values.size() && values[j + 1] == values[i]) ++j;
            if (j + 1 < values.size() && values[j + 1] < values[i]) {
                peaks.push_back({t0 + static_cast<double>(i) * spacing, values[i]});
            }
            i = j + 1;
        } else {
            ++i;
        }
    }
    return peaks;
}

std::vector<Peak> detect_peaks(const Trajectory& traj, Observable which) {
    if (!traj.fine_x.empty()) {
        const auto& series = which == Observable::position ? traj.fine_x : traj.fine_v;
        return detect_peaks(series, traj.fine_t0, traj.dt_integrate);
    }
    if (traj.samples.size() < 3) throw DomainError("detect_peaks: need at least 3 samples");
    const auto series = which == Observable::position ? traj.positions() : traj.velocities();
    return detect_peaks(series, traj.samples.front().t, traj.sample_interval);
}

PeakStatistics peak_statistics(std::vector<Peak> peaks) {
    if (peaks.empty()) throw DomainError("peak_statistics: empty peak set");
    const auto n = static_cast<double>(peaks.size());
    double sum = 0.0;
    for (const auto& p : peaks) sum += p.x;
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& p : peaks) ss += (p.x - mean) * (p.x - mean);
    PeakStatistics stats;
    stats.mean_peak = mean;
    stats.std_peak = std::sqrt(ss / n);
    stats.threshold = stats.mean_peak + 4.0 * stats.std_peak;
    stats.peaks = std::move(peaks);
    return stats;
}

ExtremeEvents classify_extremes(std::span<const Peak> peaks, double threshold) {
    ExtremeEvents out;
    for (const auto& p : peaks) {
        if (p.x > threshold) out.events.push_back(p);
    }
    out.count = out.events.size();
    return out;
}

double oscillator_energy(const State& s, const SystemParams& p) {
    return 0.5 * (1.0 + p.lambda * s.x * s.x) * s.v * s.v + 0.5 * p.omega0_sq * s.x * s.x;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t,x,v\n";
    out.reserve(traj.samples.size() * 64);
    for (const auto& s : traj.samples) {
        out += format_double(s.t);
        out += ',';
        out += format_double(s.x);
        out += ',';
        out += format_double(s.v);
        out += '\n';
    }
    return out;
}

} // namespace eef
