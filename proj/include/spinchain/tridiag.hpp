#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace spinchain {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thomas elimination for a complex tridiagonal system with a constant
/// off-diagonal (sub- and super-diagonal both equal to `off`):
///
///   diag[i]*x[i] + off*(x[i-1] + x[i+1]) = rhs[i]
///
/// Solves in-place into `x` (may alias rhs). `scratch` must have size n.
/// No pivoting; the Crank-Nicolson matrices 1 + i*(dt/2)*H are far from
/// singular for Hermitian H, so a vanishing pivot is treated as a failure.
inline void solve_tridiagonal_const_off(const std::vector<std::complex<double>>& diag,
                                        std::complex<double> off,
                                        const std::vector<std::complex<double>>& rhs,
                                        std::vector<std::complex<double>>& x,
                                        std::vector<std::complex<double>>& scratch) {
    const std::size_t n = diag.size();
    if (rhs.size() != n || n == 0)
        throw std::invalid_argument("solve_tridiagonal_const_off: size mismatch");
    x.resize(n);
    scratch.resize(n);

    std::complex<double> pivot = diag[0];
    if (std::abs(pivot) == 0.0) throw SolverError("tridiagonal solve: zero pivot at row 0");
    scratch[0] = off / pivot;
    x[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - off * scratch[i - 1];
        if (std::abs(pivot) == 0.0)
            throw SolverError("tridiagonal solve: zero pivot");
        scratch[i] = off / pivot;
        x[i] = (rhs[i] - off * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= scratch[i] * x[i + 1];
}

}  // namespace spinchain
