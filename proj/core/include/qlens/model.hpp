#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qlens/algebra.hpp"

// Physical description of an n-mode, m-channel linear quantum system by the
// quintuple (S, C_-, C_+, Omega_-, Omega_+), and construction of the two
// state-space realizations.

namespace qlens {

struct SystemParams {
    ComplexMatrix scattering;    // S, m x m unitary
    ComplexMatrix coupling_minus;  // C_-, m x n
    ComplexMatrix coupling_plus;   // C_+, m x n
    ComplexMatrix omega_minus;     // Omega_-, n x n Hermitian
    ComplexMatrix omega_plus;      // Omega_+, n x n symmetric

    Eigen::Index num_modes() const { return omega_minus.rows(); }
    Eigen::Index num_channels() const { return coupling_minus.rows(); }

    // Full 2n x 2n Hamiltonian matrix Delta(Omega_-, Omega_+).
    ComplexMatrix omega_full() const;
};

struct Violation {
    std::string field;
    std::string what;
    double residual;
};

// Empty report iff S is unitary, Omega_- Hermitian and Omega_+ symmetric,
// all at the given tolerance. Inconsistent shapes throw instead.
std::vector<Violation> validate(const SystemParams& params, double tol = 1e-10);

void require_valid(const SystemParams& params, double tol = 1e-10);

// State-space form in doubled-up annihilation-creation coordinates:
//   A = -i J_n Omega - 1/2 C^flat C,  B = -C^flat D,
//   C = Delta(C_-, C_+),              D = Delta(S, 0).
struct AnnihilationRealization {
    ComplexMatrix A, B, C, D;
    Eigen::Index num_modes() const { return A.rows() / 2; }
    Eigen::Index num_channels() const { return D.rows() / 2; }
};

// Real state-space form in [q; p] quadrature coordinates.
struct QuadratureRealization {
    RealMatrix A, B, C, D;
    Eigen::Index num_modes() const { return A.rows() / 2; }
    Eigen::Index num_channels() const { return D.rows() / 2; }
};

AnnihilationRealization annihilation_realization(const SystemParams& params);

// Built twice: from the closed block formulas, and by conjugating the
// annihilation realization with the quadrature transform. The two routes
// must agree to 1e-10 or the operation refuses.
QuadratureRealization quadrature_realization(const SystemParams& params);

// Quadrature rows of the coupling operator L = Lambda_q q + Lambda_p p:
// Lambda_q = (C_- + C_+)/sqrt(2), Lambda_p = i (C_- - C_+)/sqrt(2).
std::pair<ComplexMatrix, ComplexMatrix> coupling_rows(const SystemParams& params);

// Physical-realizability residuals, both expected to vanish:
//   annihilation:  A + A^flat + B B^flat
//   quadrature:    A JJ + JJ A^T + B JJ B^T
double realizability_residual(const AnnihilationRealization& r);
double realizability_residual(const QuadratureRealization& r);

// Gaussian parameter draw covering the full valid class:
// Omega_- = (G+G^dag)/2, Omega_+ = (F+F^T)/2, S from QR of a complex
// Gaussian matrix, Gaussian couplings.
SystemParams random_system(Eigen::Index n, Eigen::Index m, std::mt19937_64& rng);

}  // namespace qlens
