#pragma once

#include <vector>

#include "qlens/model.hpp"

// Transfer-matrix evaluation, Markov-parameter zero-block certification and
// the closed-form special cases available under commutation hypotheses.

namespace qlens {

enum class Quad { Q, P };

const char* to_string(Quad q);

// Addresses one m x m block of the 2m x 2m quadrature transfer matrix,
// with outputs ordered [q_out; p_out] and inputs [q_in; p_in].
struct BlockSelector {
    Quad output;
    Quad input;
};

// Extract the selected block of a 2m x 2m (or 2m x 2n) matrix.
RealMatrix output_rows(const RealMatrix& m, Quad which);
RealMatrix input_cols(const RealMatrix& m, Quad which);
RealMatrix select_block(const RealMatrix& g, BlockSelector sel);

// G[s] = D + C (sI - A)^{-1} B. Refuses s within 1e-8 of an eigenvalue of A.
ComplexMatrix evaluate(const QuadratureRealization& r, Complex s);
ComplexMatrix evaluate(const AnnihilationRealization& r, Complex s);

// Markov parameters C A^k B for k = 0..k_max.
std::vector<RealMatrix> markov(const QuadratureRealization& r, int k_max);

// Proof object that one transfer block vanishes identically: the feedthrough
// block plus all Markov parameter blocks up to the Cayley-Hamilton horizon
// 2n, cross-checked by sampling the block at a few random frequencies.
struct ZeroBlockCertificate {
    BlockSelector selector;
    int horizon;          // number of Markov parameters tested (state dim)
    double max_residual;  // max over feedthrough block and Markov blocks
    double tolerance;
    bool verdict;
    double sampled_max;   // max block magnitude over the sampled frequencies
};

ZeroBlockCertificate certify_zero_block(const QuadratureRealization& r, BlockSelector sel,
                                        double tol = 1e-8);

// Real-coefficient scalar rational function; coefficients ascending in s.
struct RationalScalar {
    std::vector<double> numerator;
    std::vector<double> denominator;
    Complex evaluate(Complex s) const;
};

// Single-channel closed form (s - g/2)/(s + g/2) with
// g = sum_j (|C_-,j|^2 - |C_+,j|^2). Requires m = 1, identity scattering,
// and the corresponding quadrature commutation condition; which = Q needs
// [L + L^#, H] = 0, which = P needs [L - L^#, H] = 0.
RationalScalar siso_closed_form(const SystemParams& params, Quad which, double tol = 1e-8);

// Diagonal blocks of the annihilation-picture transfer matrix under a full
// interaction-commutation hypothesis with one of four degeneracies:
//   1: C_+ = 0            2: C_- = 0
//   3: Omega_+ = 0 and C_- C_+^T symmetric
//   4: Omega_- = 0 and C_- C_+^T symmetric
// In all cases G splits as diag(G1, G2) with
//   G1[s] = (sI - E)(sI + E)^{-1} S,  G2[s] = (sI - E^#)(sI + E^#)^{-1} S^#,
// where E = (C_- C_-^dag - C_+ C_+^dag)/2.
struct BlockDiagonalForm {
    ComplexMatrix gain;  // E
    ComplexMatrix scattering;
    ComplexMatrix block_minus(Complex s) const;  // annihilation block G1
    ComplexMatrix block_plus(Complex s) const;   // creation block G2
};

BlockDiagonalForm blockdiag_closed_form(const SystemParams& params, int which_case,
                                        double tol = 1e-8);

}  // namespace qlens
