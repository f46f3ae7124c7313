#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace eef {

/// Parameters of the parametrically driven oscillator on a rotating parabolic wire:
///
///   (1 + λx²)ẍ + λxẋ² + ω₀²x − Ω₀²[2ε cos ω_p t + ½ε²(1 + cos 2ω_p t)]x + αẋ = 0
///
/// Defaults are the regime used throughout the experiments; epsilon selects the regime.
struct SystemParams {
    double lambda = 0.5;      ///< curvature, > 0
    double omega0_sq = 0.25;  ///< squared natural frequency
    double Omega0_sq = 6.7;   ///< squared base angular velocity
    double omega_p = 1.0;     ///< drive frequency, > 0
    double alpha_damp = 0.2;  ///< linear damping, >= 0
    double epsilon = 0.0;     ///< drive strength (bifurcation parameter), >= 0

    /// Throws DomainError if an invariant is violated.
    void validate() const;
};

struct State {
    double x = 0.0;
    double v = 0.0;
    double t = 0.0;
};

struct Derivative {
    double dx = 0.0;
    double dv = 0.0;
};

struct Sample {
    double t = 0.0;
    double x = 0.0;
    double v = 0.0;
};

struct Peak {
    double t = 0.0;
    double x = 0.0;

    bool operator==(const Peak&) const = default;
};

enum class Observable { position, velocity };

/// A sampled trajectory. `samples` holds one point every `sample_interval`
/// time units after the transient. When requested, the integrator-resolution
/// series (one point per `dt_integrate`) is kept in `fine_x` / `fine_v`,
/// starting at `fine_t0`.
struct Trajectory {
    std::vector<Sample> samples;
    double dt_integrate = 0.0;
    double sample_interval = 0.0;
    double transient_discarded = 0.0;

    double fine_t0 = 0.0;
    std::vector<double> fine_x;
    std::vector<double> fine_v;

    std::vector<double> positions() const;
    std::vector<double> velocities() const;
    std::vector<double> times() const;
};

struct PeakStatistics {
    std::vector<Peak> peaks;
    double mean_peak = 0.0;
    double std_peak = 0.0;
    double threshold = 0.0;
};

struct ExtremeEvents {
    std::size_t count = 0;
    std::vector<Peak> events;
};

struct IntegrateOptions {
    bool keep_fine = true;
    double overflow_guard = 1e6;
};

Derivative eom_rhs(const State& state, const SystemParams& params);

/// Advances the state by one classical RK4 step of size dt.
State rk4_step(const State& state, const SystemParams& params, double dt);

/// Fixed-step RK4 integration from `ic` (starting at ic.t) up to `t_end`.
/// Samples are stored every `sample_interval` for t > ic.t + transient.
Trajectory integrate(const SystemParams& params, const State& ic, double t_end, double dt,
                     double sample_interval, double transient,
                     const IntegrateOptions& options = {});

/// Strict local maxima of a uniformly spaced series whose first point is at t0.
/// A plateau maximum is reported at its first index.
std::vector<Peak> detect_peaks(std::span<const double> values, double t0, double spacing);

/// Peaks of the chosen observable, on the integrator-resolution series when it
/// was kept, otherwise on the stored samples.
std::vector<Peak> detect_peaks(const Trajectory& traj, Observable which = Observable::position);

/// Mean and population standard deviation of the peak amplitudes and the
/// extreme-event threshold mean + 4·std.
PeakStatistics peak_statistics(std::vector<Peak> peaks);

/// Peaks strictly above the threshold.
ExtremeEvents classify_extremes(std::span<const Peak> peaks, double threshold);

/// Undriven, undamped first integral ½(1+λx²)v² + ½ω₀²x².
double oscillator_energy(const State& state, const SystemParams& params);

/// CSV with header `t,x,v`, one row per stored sample, 17 significant digits.
std::string trajectory_csv(const Trajectory& traj);

} // namespace eef
