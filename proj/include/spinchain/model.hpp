#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinchain {

using Complex = std::complex<double>;

/// Static description of the chain: site count, uniform coupling J,
/// site coordinates and the shared time grid. Immutable after construction.
struct ChainConfig {
    int n_sites = 0;
    double coupling_J = 1.0;
    std::vector<double> positions;  // site coordinates x_n, strictly increasing
    double dt = 0.0;                // time step, units of 1/J
    double total_time = 0.0;        // integer multiple of dt

    int n_steps() const { return static_cast<int>(std::llround(total_time / dt)); }
    double time_at(int step) const { return step * dt; }
};

/// Sampled control trajectories d(t) (field-minimum position) and
/// C(t) >= 0 (field strength) on a uniform grid of n_steps()+1 points.
struct ControlPulse {
    std::vector<double> d_samples;
    std::vector<double> c_samples;
    double dt = 0.0;

    int n_steps() const { return static_cast<int>(d_samples.size()) - 1; }
};

/// Amplitudes over the N single-excitation basis states |phi_1> ... |phi_N>.
struct QuantumState {
    std::vector<Complex> amplitudes;

    int size() const { return static_cast<int>(amplitudes.size()); }
    double norm_sq() const {
        double s = 0.0;
        for (const Complex& a : amplitudes) s += std::norm(a);
        return s;
    }
    double norm() const { return std::sqrt(norm_sq()); }
};

/// Symmetric tridiagonal matrix with a constant off-diagonal (uniform coupling).
struct StaticHamiltonian {
    std::vector<double> diagonal;
    double off_diagonal = 0.0;
};

/// The reduced Hamiltonian split as H(t) = static_part + diag(control_diagonal).
struct HamiltonianParts {
    StaticHamiltonian static_part;
    std::vector<double> control_diagonal;
};

/// Parabolic field value at a site: strength * (position - minimum)^2.
inline double control_field(double strength, double minimum, double position) {
    if (strength < 0.0)
        throw std::invalid_argument("control_field: strength must be non-negative");
    const double r = position - minimum;
    return strength * r * r;
}

inline ChainConfig make_chain(int n_sites, double coupling_J, double dt, double total_time) {
    if (n_sites < 2)
        throw std::invalid_argument("make_chain: need at least 2 sites");
    if (coupling_J <= 0.0)
        throw std::invalid_argument("make_chain: coupling_J must be positive");
    if (dt <= 0.0)
        throw std::invalid_argument("make_chain: dt must be positive");
    if (total_time < dt)
        throw std::invalid_argument("make_chain: total_time must be at least dt");

    ChainConfig cfg;
    cfg.n_sites = n_sites;
    cfg.coupling_J = coupling_J;
    cfg.dt = dt;
    cfg.total_time = std::llround(total_time / dt) * dt;  // snap to the grid
    cfg.positions.resize(n_sites);
    for (int n = 0; n < n_sites; ++n) cfg.positions[n] = static_cast<double>(n);
    return cfg;
}

/// H0: -2J on the diagonal, +J added at the two boundary sites,
/// J on the sub/super-diagonals.
inline StaticHamiltonian static_hamiltonian(const ChainConfig& cfg) {
    const double J = cfg.coupling_J;
    StaticHamiltonian h;
    h.off_diagonal = J;
    h.diagonal.assign(cfg.n_sites, -2.0 * J);
    h.diagonal.front() += J;
    h.diagonal.back() += J;
    return h;
}

/// H1 at one instant: diagonal entries strength * (x_n - minimum)^2.
inline std::vector<double> control_hamiltonian(const ChainConfig& cfg, double strength,
                                               double minimum) {
    if (strength < 0.0)
        throw std::invalid_argument("control_hamiltonian: strength must be non-negative");
    std::vector<double> diag(cfg.n_sites);
    for (int n = 0; n < cfg.n_sites; ++n)
        diag[n] = control_field(strength, minimum, cfg.positions[n]);
    return diag;
}

/// |phi_site>, site indexed from 1.
inline QuantumState basis_state(const ChainConfig& cfg, int site) {
    if (site < 1 || site > cfg.n_sites)
        throw std::out_of_range("basis_state: site " + std::to_string(site) +
                                " outside 1.." + std::to_string(cfg.n_sites));
    QuantumState s;
    s.amplitudes.assign(cfg.n_sites, Complex(0.0, 0.0));
    s.amplitudes[site - 1] = Complex(1.0, 0.0);
    return s;
}

/// Linear-ramp seed pulse d(t) = speed*t, C(t) = strength.
inline ControlPulse make_linear_ramp(const ChainConfig& cfg, double speed, double strength) {
    if (strength < 0.0)
        throw std::invalid_argument("make_linear_ramp: strength must be non-negative");
    const int m = cfg.n_steps();
    ControlPulse p;
    p.dt = cfg.dt;
    p.d_samples.resize(m + 1);
    p.c_samples.assign(m + 1, strength);
    for (int k = 0; k <= m; ++k) p.d_samples[k] = speed * cfg.time_at(k);
    return p;
}

inline Complex inner_product(const QuantumState& bra, const QuantumState& ket) {
    if (bra.size() != ket.size())
        throw std::invalid_argument("inner_product: state lengths differ");
    Complex s(0.0, 0.0);
    for (int n = 0; n < bra.size(); ++n)
        s += std::conj(bra.amplitudes[n]) * ket.amplitudes[n];
    return s;
}

}  // namespace spinchain
