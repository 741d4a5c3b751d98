#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "spinchain/model.hpp"
#include "spinchain/propagator.hpp"

namespace spinchain {

/// (N-1)/T: the rate the excitation must average to cross the chain in time T.
inline double nominal_velocity(int n_sites, double total_time) {
    if (total_time <= 0.0)
        throw std::invalid_argument("nominal_velocity: total_time must be positive");
    return (n_sites - 1) / total_time;
}

namespace detail {

/// Trapezoidal integral of a sampled series over [a, b], with the window
/// edges resolved by linear interpolation so linear integrands are exact.
inline double windowed_trapezoid(std::span<const double> t, std::span<const double> y, double a,
                                 double b) {
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double lo = std::max(t[i], a);
        const double hi = std::min(t[i + 1], b);
        if (hi <= lo) continue;
        const double span = t[i + 1] - t[i];
        const double ylo = y[i] + (y[i + 1] - y[i]) * (lo - t[i]) / span;
        const double yhi = y[i] + (y[i + 1] - y[i]) * (hi - t[i]) / span;
        integral += 0.5 * (ylo + yhi) * (hi - lo);
    }
    return integral;
}

}  // namespace detail

/// v_d = (4/T^2) * integral of <x> over [T/4, 3T/4].
inline double average_velocity(const Trajectory& traj) {
    if (traj.position_expectation.empty() || traj.times.size() < 2 ||
        traj.times.size() != traj.position_expectation.size())
        throw std::invalid_argument("average_velocity: trajectory lacks a <x> series");
    if (traj.times.front() != 0.0 || traj.times.back() <= 0.0)
        throw std::invalid_argument("average_velocity: trajectory must cover [0, T] forward");
    const double T = traj.times.back();
    const double integral =
        detail::windowed_trapezoid(traj.times, traj.position_expectation, T / 4.0, 3.0 * T / 4.0);
    return 4.0 / (T * T) * integral;
}

/// Hard frequency cutoff: DFT each control series, zero every component with
/// angular frequency above nu_max (units of J, hbar = 1), transform back.
/// Keeps the DC component exactly and is idempotent.
inline ControlPulse lowpass_filter(const ControlPulse& pulse, double nu_max) {
    if (nu_max < 0.0)
        throw std::invalid_argument("lowpass_filter: nu_max must be non-negative");
    const int m = static_cast<int>(pulse.d_samples.size());
    if (m < 2 || pulse.c_samples.size() != pulse.d_samples.size() || pulse.dt <= 0.0)
        throw std::invalid_argument("lowpass_filter: malformed pulse");

    static std::mutex planner_mutex;  // the FFTW planner is not thread-safe
    ControlPulse out = pulse;
    std::vector<double> buf(m);
    std::vector<Complex> freq(m / 2 + 1);

    fftw_plan fwd, inv;
    {
        std::lock_guard<std::mutex> lock(planner_mutex);
        fwd = fftw_plan_dft_r2c_1d(m, buf.data(), reinterpret_cast<fftw_complex*>(freq.data()),
                                   FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(m, reinterpret_cast<fftw_complex*>(freq.data()), buf.data(),
                                   FFTW_ESTIMATE);
    }

    auto filter_series = [&](std::vector<double>& series) {
        std::copy(series.begin(), series.end(), buf.begin());
        fftw_execute(fwd);
        for (int k = 0; k <= m / 2; ++k) {
            const double omega = 2.0 * std::numbers::pi * k / (m * pulse.dt);
            if (omega > nu_max) freq[k] = Complex(0.0, 0.0);
        }
        fftw_execute(inv);
        for (int k = 0; k < m; ++k) series[k] = buf[k] / m;
    };
    filter_series(out.d_samples);
    filter_series(out.c_samples);

    {
        std::lock_guard<std::mutex> lock(planner_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }
    return out;
}

enum class QslBranch { coupling, spread };

struct QslEstimate {
    double tau_per_site = 0.0;       // time-per-site lower bound, units 1/J
    double mean_energy_spread = 0.0; // time average of the instantaneous spread
    QslBranch dominant_branch = QslBranch::coupling;
};

/// tau = max{pi/(2J), pi/(2 dE_mean)} with dE_mean the time-averaged energy
/// spread of the trajectory.
inline QslEstimate tau_qsl(const Trajectory& traj, double coupling_J) {
    if (traj.times.size() < 2 || traj.energy_spread.size() != traj.times.size())
        throw std::invalid_argument("tau_qsl: trajectory lacks an energy-spread series");
    const double T = traj.times.back() - traj.times.front();
    if (T <= 0.0) throw std::invalid_argument("tau_qsl: zero-length trajectory");
    if (coupling_J <= 0.0) throw std::invalid_argument("tau_qsl: coupling must be positive");

    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < traj.times.size(); ++i)
        integral += 0.5 * (traj.energy_spread[i] + traj.energy_spread[i + 1]) *
                    (traj.times[i + 1] - traj.times[i]);
    QslEstimate est;
    est.mean_energy_spread = integral / T;
    const double half_pi = std::numbers::pi / 2.0;
    const double tau_coupling = half_pi / coupling_J;
    const double tau_spread = est.mean_energy_spread > 0.0
                                  ? half_pi / est.mean_energy_spread
                                  : std::numeric_limits<double>::infinity();
    if (tau_coupling >= tau_spread) {
        est.tau_per_site = tau_coupling;
        est.dominant_branch = QslBranch::coupling;
    } else {
        est.tau_per_site = tau_spread;
        est.dominant_branch = QslBranch::spread;
    }
    return est;
}

/// Total-time model: gamma * (N - 1) * tau_per_site.
inline double qsl_time(int n_sites, double gamma, double tau_per_site) {
    if (n_sites < 2 || gamma <= 0.0 || tau_per_site <= 0.0)
        throw std::invalid_argument("qsl_time: all arguments must be positive");
    return gamma * (n_sites - 1) * tau_per_site;
}

/// One optimization run inside a (N, T) scan.
struct ScanRecord {
    int n_sites = 0;
    double total_time = 0.0;
    double final_infidelity = 0.0;
    int iterations_run = 0;
};

struct TqslStarResult {
    std::map<int, double> tqsl_star;  // N -> smallest scanned T below threshold
    std::vector<int> unresolved;      // chain lengths with no qualifying T
};

inline TqslStarResult find_tqsl_star(std::span<const ScanRecord> records, double threshold) {
    if (records.empty())
        throw std::invalid_argument("find_tqsl_star: no scan records");
    std::map<int, double> best;
    std::map<int, bool> seen;
    for (const ScanRecord& r : records) {
        seen[r.n_sites] = true;
        if (r.final_infidelity < threshold) {
            auto it = best.find(r.n_sites);
            if (it == best.end() || r.total_time < it->second) best[r.n_sites] = r.total_time;
        }
    }
    TqslStarResult result;
    result.tqsl_star = std::move(best);
    for (const auto& [n, _] : seen)
        if (!result.tqsl_star.count(n)) result.unresolved.push_back(n);
    return result;
}

struct QslFit {
    double slope_a = 0.0;
    double intercept_b = 0.0;
    double gamma = 0.0;  // slope_a / (pi/(2J))
    double r_squared = 1.0;
    std::map<int, double> per_n_tqsl_star;
};

/// Least-squares line T* = a (N - 1) + b through the per-N thresholds.
inline QslFit fit_line(const std::map<int, double>& points, double coupling_J = 1.0) {
    if (points.size() < 2)
        throw std::invalid_argument("fit_line: need at least two chain lengths");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(points.size());
    for (const auto& [sites, tstar] : points) {
        const double x = sites - 1.0;
        sx += x;
        sy += tstar;
        sxx += x * x;
        sxy += x * tstar;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0)
        throw std::invalid_argument("fit_line: chain lengths are not distinct");

    QslFit fit;
    fit.slope_a = (n * sxy - sx * sy) / denom;
    fit.intercept_b = (sy - fit.slope_a * sx) / n;
    fit.gamma = fit.slope_a / (std::numbers::pi / (2.0 * coupling_J));
    fit.per_n_tqsl_star = points;

    double ss_res = 0.0, ss_tot = 0.0;
    const double mean_y = sy / n;
    for (const auto& [sites, tstar] : points) {
        const double pred = fit.slope_a * (sites - 1.0) + fit.intercept_b;
        ss_res += (tstar - pred) * (tstar - pred);
        ss_tot += (tstar - mean_y) * (tstar - mean_y);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

}  // namespace spinchain
