#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinchain/model.hpp"
#include "spinchain/propagator.hpp"

namespace spinchain {

struct KrotovSettings {
    double step_weight = 0.002;  // update gain 1/lambda, shared by both controls
    int max_iterations = 1000;
    double infidelity_threshold = 1e-3;
    bool adaptive_backoff = true;
};

struct OptimizationResult {
    ControlPulse final_pulse;
    std::vector<double> infidelity_history;  // entry 0 = seed pulse, then one per sweep
    int iterations_run = 0;
    bool converged = false;
    double final_fidelity = 0.0;
    long clamp_events = 0;  // times C(t) was clamped back to zero
};

struct DivergedError : std::runtime_error {
    explicit DivergedError(int iteration)
        : std::runtime_error("optimization diverged at iteration " + std::to_string(iteration)),
          iteration(iteration) {}
    int iteration;
};

/// Co-state at final time: |target><target|final_state>.
inline QuantumState terminal_costate(const QuantumState& final_state,
                                     const QuantumState& target) {
    const Complex overlap = inner_product(target, final_state);
    QuantumState chi;
    chi.amplitudes.resize(target.size());
    for (int n = 0; n < target.size(); ++n)
        chi.amplitudes[n] = target.amplitudes[n] * overlap;
    return chi;
}

struct ControlGradients {
    double g_d = 0.0;
    double g_c = 0.0;
};

namespace detail {

/// g_u = Im<chi| dH/du |psi> for the two controls. The derivatives of the
/// parabolic diagonal are dH/dd = diag(-2 C (x_n - d)), dH/dC = diag((x_n - d)^2).
inline ControlGradients gradients_impl(std::span<const Complex> chi,
                                       std::span<const Complex> psi, const ChainConfig& cfg,
                                       double strength, double minimum) {
    Complex md(0.0, 0.0), mc(0.0, 0.0);
    for (int n = 0; n < cfg.n_sites; ++n) {
        const double r = cfg.positions[n] - minimum;
        const Complex pair = std::conj(chi[n]) * psi[n];
        md += pair * (-2.0 * strength * r);
        mc += pair * (r * r);
    }
    return {md.imag(), mc.imag()};
}

}  // namespace detail

inline ControlGradients control_gradients(const QuantumState& costate,
                                          const QuantumState& state, const ChainConfig& cfg,
                                          double strength, double minimum) {
    if (costate.size() != state.size())
        throw std::invalid_argument("control_gradients: vector lengths differ");
    return detail::gradients_impl(costate.amplitudes, state.amplitudes, cfg, strength, minimum);
}

struct SweepResult {
    ControlPulse pulse;
    QuantumState final_state;
    long clamp_events = 0;
};

/// One immediate-feedback forward sweep: at each grid point the controls are
/// nudged along Im<chi|dH/du|psi> using the stored co-state and the state
/// propagated so far, then the state advances one step under the updated
/// controls. C(t) is clamped at zero.
inline SweepResult krotov_sweep(const ChainConfig& cfg, const ControlPulse& pulse,
                                const QuantumState& initial, const QuantumState& target,
                                const StateTable& costates, const KrotovSettings& settings) {
    (void)target;  // terminal condition is already baked into the co-state table
    check_pulse_grid(cfg, pulse);
    const int m = cfg.n_steps();
    if (costates.n_rows != m + 1 || costates.n_cols != cfg.n_sites)
        throw std::invalid_argument("krotov_sweep: co-state table grid mismatch");

    SweepResult result;
    result.pulse = pulse;
    QuantumState psi = initial;
    CrankNicolson stepper(cfg);
    const double w = settings.step_weight;

    auto update_sample = [&](int k) {
        const ControlGradients g = detail::gradients_impl(
            costates.row(k), psi.amplitudes, cfg, result.pulse.c_samples[k],
            result.pulse.d_samples[k]);
        result.pulse.d_samples[k] += w * g.g_d;
        result.pulse.c_samples[k] += w * g.g_c;
        if (result.pulse.c_samples[k] < 0.0) {
            result.pulse.c_samples[k] = 0.0;
            ++result.clamp_events;
        }
    };

    for (int k = 0; k < m; ++k) {
        update_sample(k);
        const double mid_c = 0.5 * (result.pulse.c_samples[k] + result.pulse.c_samples[k + 1]);
        const double mid_d = 0.5 * (result.pulse.d_samples[k] + result.pulse.d_samples[k + 1]);
        stepper.step(psi, mid_c, mid_d, cfg.dt);
    }
    update_sample(m);  // keeps the last sample consistent for the next backward pass
    result.final_state = std::move(psi);
    return result;
}

/// Krotov loop: backward co-state propagation alternating with forward
/// update sweeps until the infidelity drops below the threshold or the
/// iteration budget is spent. With adaptive backoff a sweep that raises the
/// infidelity is discarded and retried at half the step weight, so the
/// recorded history is non-increasing.
inline OptimizationResult optimize(const ChainConfig& cfg, const ControlPulse& initial_pulse,
                                   const QuantumState& initial_state, const QuantumState& target,
                                   const KrotovSettings& settings) {
    if (!(settings.step_weight > 0.0) || !std::isfinite(settings.step_weight))
        throw std::invalid_argument("optimize: step_weight must be positive and finite");
    if (settings.infidelity_threshold <= 0.0 || settings.infidelity_threshold >= 1.0)
        throw std::invalid_argument("optimize: infidelity_threshold must lie in (0,1)");
    if (settings.max_iterations < 0)
        throw std::invalid_argument("optimize: max_iterations must be non-negative");
    check_pulse_grid(cfg, initial_pulse);

    OptimizationResult result;
    result.final_pulse = initial_pulse;

    QuantumState psi_final =
        propagate(cfg, initial_pulse, initial_state, Direction::forward).final_state;
    double infidelity = 1.0 - fidelity(psi_final, target);
    result.infidelity_history.push_back(infidelity);

    KrotovSettings local = settings;
    constexpr int kMaxBackoffs = 60;

    while (infidelity >= settings.infidelity_threshold &&
           result.iterations_run < settings.max_iterations) {
        const QuantumState chi_final = terminal_costate(psi_final, target);
        const StateTable costates =
            propagate_table(cfg, result.final_pulse, chi_final, Direction::backward);

        bool accepted = false;
        for (int attempt = 0; attempt <= kMaxBackoffs; ++attempt) {
            SweepResult sweep =
                krotov_sweep(cfg, result.final_pulse, initial_state, target, costates, local);
            const double f = fidelity(sweep.final_state, target);
            if (!std::isfinite(f)) throw DivergedError(result.iterations_run + 1);
            const double candidate = 1.0 - f;
            if (settings.adaptive_backoff && candidate > infidelity) {
                local.step_weight *= 0.5;
                continue;
            }
            result.final_pulse = std::move(sweep.pulse);
            result.clamp_events += sweep.clamp_events;
            psi_final = std::move(sweep.final_state);
            infidelity = candidate;
            accepted = true;
            break;
        }
        if (!accepted) break;  // step weight exhausted, no descent direction left
        ++result.iterations_run;
        result.infidelity_history.push_back(infidelity);
    }

    result.final_fidelity = 1.0 - infidelity;
    result.converged = infidelity < settings.infidelity_threshold;
    return result;
}

}  // namespace spinchain
