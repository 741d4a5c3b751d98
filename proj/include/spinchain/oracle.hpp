#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "spinchain/model.hpp"
#include "spinchain/propagator.hpp"
#include "spinchain/tridiag.hpp"

namespace spinchain::oracle {

/// Brute-force validator for the single-excitation reduction: evolves the
/// unreduced 2^N-dimensional chain and compares against the reduced model.
/// Basis states are site-occupation bit strings; bit b set <=> site b+1 up.
///
/// Sign conventions follow the reduced model: the exchange term enters as
/// +(J/2) sigma.sigma and the on-site field as (f_n/2) sigma_z, so that the
/// single-excitation restriction reproduces the reduced H_0 + H_1 up to a
/// multiple of the identity (a global phase on the sector).

constexpr int kMaxSites = 10;

struct FullState {
    std::vector<Complex> amplitudes;  // length 2^n_sites

    int dim() const { return static_cast<int>(amplitudes.size()); }
    double norm_sq() const {
        double s = 0.0;
        for (const Complex& a : amplitudes) s += std::norm(a);
        return s;
    }
};

inline void check_sites(const ChainConfig& cfg) {
    if (cfg.n_sites > kMaxSites)
        throw std::length_error("oracle: full-space evolution is capped at 10 sites");
}

namespace detail {

inline void apply_full_hamiltonian(const ChainConfig& cfg, const std::vector<double>& half_field,
                                   const std::vector<Complex>& in, std::vector<Complex>& out) {
    const int n = cfg.n_sites;
    const int dim = 1 << n;
    const double half_J = 0.5 * cfg.coupling_J;
    out.assign(dim, Complex(0.0, 0.0));
    for (int s = 0; s < dim; ++s) {
        const Complex amp = in[s];
        if (amp == Complex(0.0, 0.0)) continue;
        double diag = 0.0;
        for (int b = 0; b + 1 < n; ++b) {
            const int bits = (s >> b) & 3;
            if (bits == 0 || bits == 3) {
                diag += half_J;  // aligned neighbours
            } else {
                diag -= half_J;
                out[s ^ (3 << b)] += 2.0 * half_J * amp;  // flip-flop exchange
            }
        }
        for (int b = 0; b < n; ++b)
            diag += ((s >> b) & 1) ? half_field[b] : -half_field[b];
        out[s] += diag * amp;
    }
}

inline std::vector<double> half_field_diag(const ChainConfig& cfg, double strength,
                                           double minimum) {
    std::vector<double> f(cfg.n_sites);
    for (int b = 0; b < cfg.n_sites; ++b)
        f[b] = 0.5 * control_field(strength, minimum, cfg.positions[b]);
    return f;
}

}  // namespace detail

inline FullState full_hamiltonian_apply(const ChainConfig& cfg, double strength, double minimum,
                                        const FullState& state) {
    check_sites(cfg);
    if (state.dim() != (1 << cfg.n_sites))
        throw std::invalid_argument("full_hamiltonian_apply: state dimension mismatch");
    FullState out;
    out.amplitudes.resize(state.dim());
    detail::apply_full_hamiltonian(cfg, detail::half_field_diag(cfg, strength, minimum),
                                   state.amplitudes, out.amplitudes);
    return out;
}

inline FullState embed(const QuantumState& subspace_state, const ChainConfig& cfg) {
    check_sites(cfg);
    if (subspace_state.size() != cfg.n_sites)
        throw std::invalid_argument("embed: state size mismatch");
    FullState full;
    full.amplitudes.assign(1 << cfg.n_sites, Complex(0.0, 0.0));
    for (int n = 0; n < cfg.n_sites; ++n)
        full.amplitudes[1 << n] = subspace_state.amplitudes[n];
    return full;
}

struct ProjectionResult {
    QuantumState state;          // normalized single-excitation component
    double leaked_weight = 0.0;  // probability weight outside the sector
};

inline ProjectionResult project(const FullState& full_state, const ChainConfig& cfg) {
    check_sites(cfg);
    if (full_state.dim() != (1 << cfg.n_sites))
        throw std::invalid_argument("project: state dimension mismatch");
    ProjectionResult result;
    result.state.amplitudes.resize(cfg.n_sites);
    double sector = 0.0;
    for (int n = 0; n < cfg.n_sites; ++n) {
        const Complex a = full_state.amplitudes[1 << n];
        result.state.amplitudes[n] = a;
        sector += std::norm(a);
    }
    if (sector == 0.0)
        throw std::runtime_error("project: no single-excitation weight to project onto");
    result.leaked_weight = full_state.norm_sq() - sector;
    return result;
}

namespace detail {

/// Solves (1 + i*(dt/2)*H) x = b by conjugate gradients on the normal
/// equations; the system is a tiny perturbation of the identity, so a
/// handful of iterations reaches machine precision.
class FullCrankNicolson {
public:
    explicit FullCrankNicolson(const ChainConfig& cfg) : cfg_(&cfg), dim_(1 << cfg.n_sites) {}

    void step(FullState& psi, double strength, double minimum, double dt) {
        const std::vector<double> field = half_field_diag(*cfg_, strength, minimum);
        const Complex ia(0.0, 0.5 * dt);

        // rhs = (1 - i*(dt/2)*H) psi
        apply_full_hamiltonian(*cfg_, field, psi.amplitudes, h_v_);
        rhs_.resize(dim_);
        for (int i = 0; i < dim_; ++i) rhs_[i] = psi.amplitudes[i] - ia * h_v_[i];

        auto apply_a = [&](const std::vector<Complex>& v, std::vector<Complex>& out) {
            apply_full_hamiltonian(*cfg_, field, v, h_v_);
            out.resize(dim_);
            for (int i = 0; i < dim_; ++i) out[i] = v[i] + ia * h_v_[i];
        };
        auto apply_a_dag = [&](const std::vector<Complex>& v, std::vector<Complex>& out) {
            apply_full_hamiltonian(*cfg_, field, v, h_v_);
            out.resize(dim_);
            for (int i = 0; i < dim_; ++i) out[i] = v[i] - ia * h_v_[i];
        };
        auto dot_re = [](const std::vector<Complex>& a, const std::vector<Complex>& b) {
            Complex s(0.0, 0.0);
            for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
            return s.real();
        };

        // CGNR on A^dag A x = A^dag rhs, started from x = rhs.
        std::vector<Complex>& x = psi.amplitudes;
        x = rhs_;
        apply_a(x, t1_);
        for (int i = 0; i < dim_; ++i) t1_[i] = rhs_[i] - t1_[i];
        apply_a_dag(t1_, r_);
        p_ = r_;
        double rr = dot_re(r_, r_);
        const double tol_sq = 1e-26 * dot_re(rhs_, rhs_);
        for (int it = 0; it < 200 && rr > tol_sq; ++it) {
            apply_a(p_, t1_);
            apply_a_dag(t1_, t2_);
            const double alpha = rr / dot_re(p_, t2_);
            if (!std::isfinite(alpha)) throw SolverError("full-space CN solve broke down");
            for (int i = 0; i < dim_; ++i) {
                x[i] += alpha * p_[i];
                r_[i] -= alpha * t2_[i];
            }
            const double rr_new = dot_re(r_, r_);
            const double beta = rr_new / rr;
            rr = rr_new;
            for (int i = 0; i < dim_; ++i) p_[i] = r_[i] + beta * p_[i];
        }
        if (rr > tol_sq * 1e6)
            throw SolverError("full-space CN solve did not converge");
    }

private:
    const ChainConfig* cfg_;
    int dim_;
    std::vector<Complex> h_v_, rhs_, r_, p_, t1_, t2_;
};

}  // namespace detail

inline FullState full_propagate(const ChainConfig& cfg, const ControlPulse& pulse,
                                const FullState& initial) {
    check_sites(cfg);
    check_pulse_grid(cfg, pulse);
    if (initial.dim() != (1 << cfg.n_sites))
        throw std::invalid_argument("full_propagate: state dimension mismatch");
    FullState psi = initial;
    detail::FullCrankNicolson stepper(cfg);
    const int m = cfg.n_steps();
    for (int k = 0; k < m; ++k) {
        const double mid_c = 0.5 * (pulse.c_samples[k] + pulse.c_samples[k + 1]);
        const double mid_d = 0.5 * (pulse.d_samples[k] + pulse.d_samples[k + 1]);
        stepper.step(psi, mid_c, mid_d, cfg.dt);
    }
    return psi;
}

/// Expectation of the total up-spin number, conserved by the dynamics.
inline double excitation_number(const FullState& state, const ChainConfig& cfg) {
    double total = 0.0;
    for (int s = 0; s < state.dim(); ++s) {
        const double w = std::norm(state.amplitudes[s]);
        if (w == 0.0) continue;
        int ups = 0;
        for (int b = 0; b < cfg.n_sites; ++b) ups += (s >> b) & 1;
        total += w * ups;
    }
    return total;
}

}  // namespace spinchain::oracle
