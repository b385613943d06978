#include "qlens/algebra.hpp"

#include <algorithm>
#include <cmath>

namespace qlens {

double max_abs(const ComplexMatrix& x) {
    if (x.size() == 0) return 0.0;
    return x.cwiseAbs().maxCoeff();
}

double max_abs(const RealMatrix& x) {
    if (x.size() == 0) return 0.0;
    return x.cwiseAbs().maxCoeff();
}

bool approx_equal(Complex a, Complex b, Tolerance tol) {
    return std::abs(a - b) <= tol.atol + tol.rtol * std::max(std::abs(a), std::abs(b));
}

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, Tolerance tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (!approx_equal(a(i, j), b(i, j), tol)) return false;
    return true;
}

RealMatrix j_diag(Eigen::Index k) {
    RealMatrix j = RealMatrix::Identity(2 * k, 2 * k);
    j.bottomRightCorner(k, k) *= -1.0;
    return j;
}

RealMatrix j_symplectic(Eigen::Index k) {
    RealMatrix j = RealMatrix::Zero(2 * k, 2 * k);
    j.topRightCorner(k, k) = RealMatrix::Identity(k, k);
    j.bottomLeftCorner(k, k) = -RealMatrix::Identity(k, k);
    return j;
}

DoubledMatrix::DoubledMatrix(ComplexMatrix upper_left, ComplexMatrix upper_right)
    : upper_left_(std::move(upper_left)), upper_right_(std::move(upper_right)) {
    if (upper_left_.rows() != upper_right_.rows() || upper_left_.cols() != upper_right_.cols())
        throw ShapeError("doubled_up: blocks must have identical shape");
}

ComplexMatrix DoubledMatrix::full() const {
    const Eigen::Index k = block_rows(), r = block_cols();
    ComplexMatrix m(2 * k, 2 * r);
    m.topLeftCorner(k, r) = upper_left_;
    m.topRightCorner(k, r) = upper_right_;
    m.bottomLeftCorner(k, r) = upper_right_.conjugate();
    m.bottomRightCorner(k, r) = upper_left_.conjugate();
    return m;
}

DoubledMatrix DoubledMatrix::operator+(const DoubledMatrix& rhs) const {
    if (block_rows() != rhs.block_rows() || block_cols() != rhs.block_cols())
        throw ShapeError("doubled sum: shape mismatch");
    return {upper_left_ + rhs.upper_left_, upper_right_ + rhs.upper_right_};
}

DoubledMatrix DoubledMatrix::operator*(const DoubledMatrix& rhs) const {
    if (block_cols() != rhs.block_rows())
        throw ShapeError("doubled product: shape mismatch");
    // Delta(U1,V1) Delta(U2,V2) = Delta(U1 U2 + V1 V2^#, U1 V2 + V1 U2^#)
    return {upper_left_ * rhs.upper_left_ + upper_right_ * rhs.upper_right_.conjugate(),
            upper_left_ * rhs.upper_right_ + upper_right_ * rhs.upper_left_.conjugate()};
}

DoubledMatrix DoubledMatrix::flat() const {
    return {upper_left_.adjoint(), -upper_right_.transpose()};
}

double DoubledMatrix::structure_residual(const ComplexMatrix& x) {
    if (x.rows() % 2 != 0 || x.cols() % 2 != 0) throw ShapeError("doubled structure: odd dimension");
    const Eigen::Index k = x.rows() / 2, r = x.cols() / 2;
    double res = max_abs(ComplexMatrix(x.bottomLeftCorner(k, r) - x.topRightCorner(k, r).conjugate()));
    res = std::max(res, max_abs(ComplexMatrix(x.bottomRightCorner(k, r) - x.topLeftCorner(k, r).conjugate())));
    return res;
}

bool DoubledMatrix::is_doubled(const ComplexMatrix& x, double tol) {
    return structure_residual(x) <= tol;
}

DoubledMatrix DoubledMatrix::from_full(const ComplexMatrix& x, double tol) {
    const double res = structure_residual(x);
    if (res > tol)
        throw ShapeError("from_full: matrix is not doubled-up (residual " + std::to_string(res) + ")");
    const Eigen::Index k = x.rows() / 2, r = x.cols() / 2;
    return {x.topLeftCorner(k, r), x.topRightCorner(k, r)};
}

DoubledMatrix doubled_up(const ComplexMatrix& u, const ComplexMatrix& v) {
    return {u, v};
}

namespace {

void require_even(const ComplexMatrix& x, const char* who) {
    if (x.rows() % 2 != 0 || x.cols() % 2 != 0)
        throw ShapeError(std::string(who) + ": dimensions must be even");
}

}  // namespace

ComplexMatrix flat_adjoint(const ComplexMatrix& x) {
    require_even(x, "flat_adjoint");
    const Eigen::Index r = x.cols() / 2, k = x.rows() / 2;
    ComplexMatrix m = x.adjoint();  // 2r x 2k
    // J_r M J_k negates the off-diagonal quadrants.
    m.topRightCorner(r, k) *= -1.0;
    m.bottomLeftCorner(r, k) *= -1.0;
    return m;
}

ComplexMatrix sharp_adjoint(const ComplexMatrix& x) {
    require_even(x, "sharp_adjoint");
    const Eigen::Index r = x.cols() / 2, k = x.rows() / 2;
    const ComplexMatrix m = x.adjoint();  // 2r x 2k
    ComplexMatrix out(2 * r, 2 * k);
    // -JJ_r M JJ_k = [[M22, -M21], [-M12, M11]]
    out.topLeftCorner(r, k) = m.bottomRightCorner(r, k);
    out.topRightCorner(r, k) = -m.bottomLeftCorner(r, k);
    out.bottomLeftCorner(r, k) = -m.topRightCorner(r, k);
    out.bottomRightCorner(r, k) = m.topLeftCorner(r, k);
    return out;
}

ComplexMatrix quad_transform(Eigen::Index n) {
    if (n < 1) throw ShapeError("quad_transform: n must be positive");
    const double s = 1.0 / std::sqrt(2.0);
    const Complex i(0.0, 1.0);
    ComplexMatrix v = ComplexMatrix::Zero(2 * n, 2 * n);
    v.topLeftCorner(n, n) = s * ComplexMatrix::Identity(n, n);
    v.topRightCorner(n, n) = s * ComplexMatrix::Identity(n, n);
    v.bottomLeftCorner(n, n) = -i * s * ComplexMatrix::Identity(n, n);
    v.bottomRightCorner(n, n) = i * s * ComplexMatrix::Identity(n, n);
    return v;
}

std::string to_string(StructureClass c) {
    switch (c) {
        case StructureClass::Zero: return "zero";
        case StructureClass::Real: return "real";
        case StructureClass::PurelyImaginary: return "purely-imaginary";
        case StructureClass::Neither: return "neither";
    }
    return "?";
}

StructureClass classify(const ComplexMatrix& x, double tol) {
    const double scale = tol * (1.0 + max_abs(x));
    const double im = x.size() ? x.imag().cwiseAbs().maxCoeff() : 0.0;
    const double re = x.size() ? x.real().cwiseAbs().maxCoeff() : 0.0;
    const bool is_real = im <= scale;
    const bool is_imag = re <= scale;
    if (is_real && is_imag) return StructureClass::Zero;
    if (is_real) return StructureClass::Real;
    if (is_imag) return StructureClass::PurelyImaginary;
    return StructureClass::Neither;
}

bool passes_real(StructureClass c) {
    return c == StructureClass::Real || c == StructureClass::Zero;
}

bool passes_imaginary(StructureClass c) {
    return c == StructureClass::PurelyImaginary || c == StructureClass::Zero;
}

}  // namespace qlens
