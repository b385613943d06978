#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "qlens/errors.hpp"

// Dense complex kernel plus the special matrix operations of linear quantum
// systems: doubled-up matrices, the two J-weighted adjoints, and the unitary
// that maps annihilation-creation coordinates to quadratures.

namespace qlens {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

struct Tolerance {
    double atol = 1e-12;
    double rtol = 1e-9;
};

// Largest entry magnitude; 0 for empty matrices.
double max_abs(const ComplexMatrix& x);
double max_abs(const RealMatrix& x);

// |a-b| <= atol + rtol*max(|a|,|b|), entrywise for matrices.
bool approx_equal(Complex a, Complex b, Tolerance tol = {});
bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, Tolerance tol = {});

// J_k = diag(I_k, -I_k)
RealMatrix j_diag(Eigen::Index k);
// JJ_k = [[0, I_k], [-I_k, 0]]  (quadrature symplectic form)
RealMatrix j_symplectic(Eigen::Index k);

// Block form [[U, V], [V^#, U^#]], closed under +, * and the flat adjoint.
class DoubledMatrix {
   public:
    DoubledMatrix(ComplexMatrix upper_left, ComplexMatrix upper_right);

    const ComplexMatrix& upper_left() const { return upper_left_; }
    const ComplexMatrix& upper_right() const { return upper_right_; }
    Eigen::Index block_rows() const { return upper_left_.rows(); }
    Eigen::Index block_cols() const { return upper_left_.cols(); }

    // Realized 2k x 2r matrix.
    ComplexMatrix full() const;

    DoubledMatrix operator+(const DoubledMatrix& rhs) const;
    DoubledMatrix operator*(const DoubledMatrix& rhs) const;
    // Blockwise flat adjoint: Delta(U,V)^flat = Delta(U^dag, -V^T).
    DoubledMatrix flat() const;

    // Residual of the doubled-up structure of a full matrix
    // (lower half vs conjugate of the swapped upper half).
    static double structure_residual(const ComplexMatrix& x);
    static bool is_doubled(const ComplexMatrix& x, double tol = 0.0);
    static DoubledMatrix from_full(const ComplexMatrix& x, double tol = 1e-12);

   private:
    ComplexMatrix upper_left_;
    ComplexMatrix upper_right_;
};

DoubledMatrix doubled_up(const ComplexMatrix& u, const ComplexMatrix& v);

// X^flat = J_r X^dag J_k for X of size 2k x 2r.
ComplexMatrix flat_adjoint(const ComplexMatrix& x);

// X^sharp = -JJ_r X^dag JJ_k for X of size 2k x 2r.
ComplexMatrix sharp_adjoint(const ComplexMatrix& x);

// V_n = (1/sqrt(2)) [[I, I], [-iI, iI]]; unitary change of basis taking
// doubled-up annihilation-creation coordinates to [q; p] quadratures.
ComplexMatrix quad_transform(Eigen::Index n);

enum class StructureClass { Zero, Real, PurelyImaginary, Neither };

std::string to_string(StructureClass c);

// Real iff max|Im| <= tol*(1+max_abs); PurelyImaginary analogously on Re;
// Zero takes precedence when both pass.
StructureClass classify(const ComplexMatrix& x, double tol = 1e-10);

// Zero passes both the "real" and the "purely imaginary" hypotheses.
bool passes_real(StructureClass c);
bool passes_imaginary(StructureClass c);

}  // namespace qlens
