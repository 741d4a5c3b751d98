#pragma once

#include <cmath>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <vector>

#include "spinchain/model.hpp"
#include "spinchain/tridiag.hpp"

namespace spinchain {

enum class Direction { forward, backward };

struct RecordingOptions {
    int stride = 0;  // 0 -> ceil(n_steps/100)
    bool record_states = false;
    bool record_probabilities = false;
};

/// Time series of states and derived observables on the recorded grid.
struct Trajectory {
    std::vector<double> times;
    std::vector<QuantumState> states;  // only if requested
    std::vector<double> position_expectation;
    std::vector<double> energy_mean;
    std::vector<double> energy_spread;
    std::vector<std::vector<double>> site_probabilities;  // only if requested
    QuantumState final_state;
};

/// Dense per-step state storage, rows indexed by time-grid index 0..n_steps.
struct StateTable {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<Complex> data;

    void resize(int rows, int cols) {
        n_rows = rows;
        n_cols = cols;
        data.assign(static_cast<std::size_t>(rows) * cols, Complex(0.0, 0.0));
    }
    std::span<Complex> row(int r) {
        return {data.data() + static_cast<std::size_t>(r) * n_cols,
                static_cast<std::size_t>(n_cols)};
    }
    std::span<const Complex> row(int r) const {
        return {data.data() + static_cast<std::size_t>(r) * n_cols,
                static_cast<std::size_t>(n_cols)};
    }
};

inline void apply_hamiltonian(const StaticHamiltonian& h0, const std::vector<double>& control_diag,
                              const std::vector<Complex>& in, std::vector<Complex>& out) {
    const int n = static_cast<int>(in.size());
    out.resize(n);
    const double J = h0.off_diagonal;
    for (int i = 0; i < n; ++i) {
        Complex v = (h0.diagonal[i] + control_diag[i]) * in[i];
        if (i > 0) v += J * in[i - 1];
        if (i + 1 < n) v += J * in[i + 1];
        out[i] = v;
    }
}

/// One Crank-Nicolson step: solves (1 + i*H*dt/2) psi' = (1 - i*H*dt/2) psi.
/// The Cayley form is exactly unitary, and stepping with -dt is the exact
/// inverse of stepping with +dt, which is what backward propagation uses.
class CrankNicolson {
public:
    explicit CrankNicolson(const ChainConfig& cfg)
        : cfg_(&cfg), h0_(static_hamiltonian(cfg)), control_diag_(cfg.n_sites) {}

    void step(QuantumState& psi, double strength, double minimum, double dt) {
        for (int n = 0; n < cfg_->n_sites; ++n)
            control_diag_[n] = control_field(strength, minimum, cfg_->positions[n]);
        step_with_diagonal(psi, control_diag_, dt);
    }

    void step_with_diagonal(QuantumState& psi, const std::vector<double>& control_diag,
                            double dt) {
        const int n = cfg_->n_sites;
        if (psi.size() != n)
            throw std::invalid_argument("CrankNicolson::step: state size mismatch");
        const Complex ia(0.0, 0.5 * dt);
        const Complex off = ia * h0_.off_diagonal;

        lhs_diag_.resize(n);
        rhs_.resize(n);
        for (int i = 0; i < n; ++i) {
            const double h_ii = h0_.diagonal[i] + control_diag[i];
            lhs_diag_[i] = 1.0 + ia * h_ii;
            Complex v = (1.0 - ia * h_ii) * psi.amplitudes[i];
            if (i > 0) v -= off * psi.amplitudes[i - 1];
            if (i + 1 < n) v -= off * psi.amplitudes[i + 1];
            rhs_[i] = v;
        }
        solve_tridiagonal_const_off(lhs_diag_, off, rhs_, psi.amplitudes, scratch_);
    }

    const StaticHamiltonian& static_part() const { return h0_; }

private:
    const ChainConfig* cfg_;
    StaticHamiltonian h0_;
    std::vector<double> control_diag_;
    std::vector<Complex> lhs_diag_, rhs_, scratch_;
};

inline QuantumState cn_step(const ChainConfig& cfg, double strength, double minimum,
                            const QuantumState& state, double dt) {
    QuantumState out = state;
    CrankNicolson stepper(cfg);
    stepper.step(out, strength, minimum, dt);
    return out;
}

inline double fidelity(const QuantumState& state, const QuantumState& target) {
    return std::norm(inner_product(target, state));
}

inline double position_expectation(const QuantumState& state, const ChainConfig& cfg) {
    if (state.size() != cfg.n_sites)
        throw std::invalid_argument("position_expectation: state size mismatch");
    double x = 0.0;
    for (int n = 0; n < cfg.n_sites; ++n)
        x += cfg.positions[n] * std::norm(state.amplitudes[n]);
    return x;
}

struct EnergyMoments {
    double mean = 0.0;
    double spread = 0.0;
};

inline EnergyMoments energy_moments(const QuantumState& state, const HamiltonianParts& h) {
    static thread_local std::vector<Complex> h_psi;
    apply_hamiltonian(h.static_part, h.control_diagonal, state.amplitudes, h_psi);
    Complex mean(0.0, 0.0);
    double second = 0.0;
    for (int n = 0; n < state.size(); ++n) {
        mean += std::conj(state.amplitudes[n]) * h_psi[n];
        second += std::norm(h_psi[n]);
    }
    EnergyMoments m;
    m.mean = mean.real();
    m.spread = std::sqrt(std::max(0.0, second - m.mean * m.mean));
    return m;
}

inline void check_pulse_grid(const ChainConfig& cfg, const ControlPulse& pulse) {
    if (pulse.n_steps() != cfg.n_steps() ||
        pulse.d_samples.size() != pulse.c_samples.size() ||
        std::abs(pulse.dt - cfg.dt) > 1e-12 * std::max(1.0, std::abs(cfg.dt)))
        throw std::invalid_argument("pulse grid does not match the chain's time grid");
}

inline int default_stride(const ChainConfig& cfg) {
    const int m = cfg.n_steps();
    return std::max(1, (m + 99) / 100);
}

namespace detail {

inline void record_point(Trajectory& traj, const ChainConfig& cfg, const QuantumState& psi,
                         const ControlPulse& pulse, int grid_index,
                         const StaticHamiltonian& h0, const RecordingOptions& opt) {
    traj.times.push_back(cfg.time_at(grid_index));
    traj.position_expectation.push_back(position_expectation(psi, cfg));
    HamiltonianParts parts{h0, control_hamiltonian(cfg, pulse.c_samples[grid_index],
                                                   pulse.d_samples[grid_index])};
    const EnergyMoments m = energy_moments(psi, parts);
    traj.energy_mean.push_back(m.mean);
    traj.energy_spread.push_back(m.spread);
    if (opt.record_states) traj.states.push_back(psi);
    if (opt.record_probabilities) {
        std::vector<double> p(cfg.n_sites);
        for (int n = 0; n < cfg.n_sites; ++n) p[n] = std::norm(psi.amplitudes[n]);
        traj.site_probabilities.push_back(std::move(p));
    }
}

}  // namespace detail

/// Integrates the reduced Schroedinger equation over the configured grid.
/// Forward runs 0 -> T; backward runs T -> 0 under the same Hamiltonian,
/// each step being the exact inverse of the corresponding forward step.
/// Controls are evaluated at step midpoints (average of adjacent samples).
inline Trajectory propagate(const ChainConfig& cfg, const ControlPulse& pulse,
                            const QuantumState& initial, Direction direction,
                            const RecordingOptions& options = {}) {
    check_pulse_grid(cfg, pulse);
    if (initial.size() != cfg.n_sites)
        throw std::invalid_argument("propagate: initial state size mismatch");

    const int m = cfg.n_steps();
    const int stride = options.stride > 0 ? options.stride : default_stride(cfg);
    CrankNicolson stepper(cfg);
    QuantumState psi = initial;
    Trajectory traj;

    const bool fwd = direction == Direction::forward;
    const int start = fwd ? 0 : m;
    detail::record_point(traj, cfg, psi, pulse, start, stepper.static_part(), options);
    for (int k = 0; k < m; ++k) {
        const int lo = fwd ? k : m - 1 - k;           // interval [lo, lo+1]
        const int at = fwd ? lo + 1 : lo;             // grid index after the step
        const double mid_c = 0.5 * (pulse.c_samples[lo] + pulse.c_samples[lo + 1]);
        const double mid_d = 0.5 * (pulse.d_samples[lo] + pulse.d_samples[lo + 1]);
        stepper.step(psi, mid_c, mid_d, fwd ? cfg.dt : -cfg.dt);
        if ((k + 1) % stride == 0 || k + 1 == m)
            detail::record_point(traj, cfg, psi, pulse, at, stepper.static_part(), options);
    }
    traj.final_state = std::move(psi);
    return traj;
}

/// States at every grid point 0..n_steps, row = grid index for either direction.
inline StateTable propagate_table(const ChainConfig& cfg, const ControlPulse& pulse,
                                  const QuantumState& initial, Direction direction) {
    check_pulse_grid(cfg, pulse);
    const int m = cfg.n_steps();
    const int n = cfg.n_sites;
    StateTable table;
    table.resize(m + 1, n);
    CrankNicolson stepper(cfg);
    QuantumState psi = initial;

    const bool fwd = direction == Direction::forward;
    auto store = [&](int row) {
        std::span<Complex> dst = table.row(row);
        for (int i = 0; i < n; ++i) dst[i] = psi.amplitudes[i];
    };
    store(fwd ? 0 : m);
    for (int k = 0; k < m; ++k) {
        const int lo = fwd ? k : m - 1 - k;
        const double mid_c = 0.5 * (pulse.c_samples[lo] + pulse.c_samples[lo + 1]);
        const double mid_d = 0.5 * (pulse.d_samples[lo] + pulse.d_samples[lo + 1]);
        stepper.step(psi, mid_c, mid_d, fwd ? cfg.dt : -cfg.dt);
        store(fwd ? lo + 1 : lo);
    }
    return table;
}

}  // namespace spinchain
