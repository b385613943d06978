#pragma once

#include <string>
#include <vector>

#include "qlens/model.hpp"

// Commutator machinery for the coupling-Hamiltonian pair, interaction-level
// non-demolition tests, and the characterization of which system variables
// survive continuous monitoring untouched.

namespace qlens {

// [L, H] = coeff_a * a + coeff_adag * a^#.
struct CommutatorCoefficients {
    ComplexMatrix coeff_a;     // m x n
    ComplexMatrix coeff_adag;  // m x n
    double max_residual() const;
    bool is_zero(double tol) const;
};

// Coefficients of [L, H]:
//   coeff_a = C_- Omega_- - C_+ Omega_+^dag,
//   coeff_adag = C_- Omega_+ - C_+ Omega_-^T.
CommutatorCoefficients commutator_lh(const SystemParams& params);

// Coefficients of [L^#, H].
CommutatorCoefficients commutator_lconj_h(const SystemParams& params);

// Coefficients of [L + L^#, H] (sign = +1) or [L - L^#, H] (sign = -1).
CommutatorCoefficients commutator_quadrature_h(const SystemParams& params, int sign);

// [L, H] = 0, tested both as the coefficient pair above and as
// C Omega = 2 Delta(C_-, 0) Omega; the two routes must agree.
bool is_qnd_interaction(const SystemParams& params, double tol = 1e-10);

// g = sum_j (|C_-,j|^2 - |C_+,j|^2), single channel only.
double siso_g(const SystemParams& params);

// Consequences of a non-demolition interaction with a self-adjoint,
// mutually commuting coupling vector: the transfer matrix reduces to pure
// feedthrough and the coupling operator is frozen. Structural facts are
// reported; the dynamical claims are checked numerically either way.
struct QndInteractionReport {
    bool self_adjoint;          // C_- = C_+^#
    bool mutually_commuting;    // C_- C_+^T symmetric
    double self_adjoint_residual;
    double commuting_residual;
    bool transfer_is_feedthrough;  // all Markov parameters vanish
    double markov_residual;
    bool dl_vanishes;  // Lambda A = 0 and Lambda B = 0
    double drift_residual;
    double diffusion_residual;
};

QndInteractionReport qnd_interaction_consequences(const SystemParams& params, double tol = 1e-8);

struct QNDVariableReport {
    enum class Target { Q, P, Combination };
    Target target;
    RealVector coefficients;  // length 2n in [q; p] coordinates
    bool uncontrollable;
    bool observable;
    bool is_qnd;  // uncontrollable && observable
    std::string detail;
};

// Characterize non-demolition variables. Under p-coupling with
// Omega_- = -Omega_+ the momentum quadratures close on themselves; under
// q-coupling with Omega_- = Omega_+ the positions do. In both cases the
// realization is checked against the closed-form dynamics. For general
// parameters, scans for uncontrollable-yet-observable directions.
std::vector<QNDVariableReport> qnd_characterize(const SystemParams& params, double tol = 1e-8);

}  // namespace qlens
