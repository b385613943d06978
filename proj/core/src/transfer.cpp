#include "qlens/transfer.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "qlens/qnd.hpp"
#include "qlens/rng.hpp"

namespace qlens {

const char* to_string(Quad q) {
    return q == Quad::Q ? "q" : "p";
}

RealMatrix output_rows(const RealMatrix& m, Quad which) {
    const Eigen::Index half = m.rows() / 2;
    return which == Quad::Q ? m.topRows(half) : m.bottomRows(half);
}

RealMatrix input_cols(const RealMatrix& m, Quad which) {
    const Eigen::Index half = m.cols() / 2;
    return which == Quad::Q ? m.leftCols(half) : m.rightCols(half);
}

RealMatrix select_block(const RealMatrix& g, BlockSelector sel) {
    return input_cols(output_rows(g, sel.output), sel.input);
}

namespace {

constexpr double kPoleGuard = 1e-8;

ComplexVector system_poles(const RealMatrix& a) {
    Eigen::EigenSolver<RealMatrix> es(a);
    if (es.info() != Eigen::Success) throw NumericalError("evaluate: eigenvalue solve failed");
    return es.eigenvalues();
}

void require_off_pole(const ComplexVector& poles, Complex s) {
    for (Eigen::Index i = 0; i < poles.size(); ++i) {
        const double d = std::abs(s - poles(i));
        if (d < kPoleGuard)
            throw PoleError("evaluate: s is within 1e-8 of a pole of the realization", d);
    }
}

template <typename MatA, typename MatB, typename MatC, typename MatD>
ComplexMatrix eval_state_space(const MatA& a, const MatB& b, const MatC& c, const MatD& d,
                               Complex s) {
    const Eigen::Index dim = a.rows();
    ComplexMatrix resolvent = s * ComplexMatrix::Identity(dim, dim) - a.template cast<Complex>();
    return d.template cast<Complex>() +
           c.template cast<Complex>() * resolvent.partialPivLu().solve(b.template cast<Complex>());
}

}  // namespace

ComplexMatrix evaluate(const QuadratureRealization& r, Complex s) {
    require_off_pole(system_poles(r.A), s);
    return eval_state_space(r.A, r.B, r.C, r.D, s);
}

ComplexMatrix evaluate(const AnnihilationRealization& r, Complex s) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(r.A);
    if (es.info() != Eigen::Success) throw NumericalError("evaluate: eigenvalue solve failed");
    require_off_pole(es.eigenvalues(), s);
    return eval_state_space(r.A, r.B, r.C, r.D, s);
}

std::vector<RealMatrix> markov(const QuadratureRealization& r, int k_max) {
    if (k_max < 0) throw ShapeError("markov: k_max must be nonnegative");
    std::vector<RealMatrix> out;
    out.reserve(static_cast<std::size_t>(k_max) + 1);
    RealMatrix akb = r.B;
    out.push_back(r.C * akb);
    for (int k = 1; k <= k_max; ++k) {
        akb = r.A * akb;
        out.push_back(r.C * akb);
    }
    return out;
}

ZeroBlockCertificate certify_zero_block(const QuadratureRealization& r, BlockSelector sel,
                                        double tol) {
    if (tol <= 0) throw DomainError("certify_zero_block: tolerance must be positive");
    const int horizon = static_cast<int>(r.A.rows());  // Cayley-Hamilton bound 2n

    double residual = max_abs(select_block(r.D, sel));
    RealMatrix akb = r.B;
    residual = std::max(residual, max_abs(RealMatrix(select_block(r.C * akb, sel))));
    for (int k = 1; k < horizon; ++k) {
        akb = r.A * akb;
        residual = std::max(residual, max_abs(RealMatrix(select_block(r.C * akb, sel))));
    }
    const bool verdict = residual <= tol;

    // Independent spot check: the block evaluated at a handful of
    // frequencies must agree with the Markov-parameter verdict.
    const ComplexVector poles = system_poles(r.A);
    double pole_radius = 0.0;
    for (Eigen::Index i = 0; i < poles.size(); ++i)
        pole_radius = std::max(pole_radius, std::abs(poles(i)));
    const double radius = 1.0 + pole_radius;

    std::mt19937_64 rng = make_engine(0x5a6fc2e1u, static_cast<std::uint64_t>(r.A.rows()));
    double sampled_max = 0.0;
    int accepted = 0;
    while (accepted < 5) {
        const double rho = radius * (0.25 + 1.75 * uniform_unit(rng));
        const double theta = 6.283185307179586 * uniform_unit(rng);
        const Complex s(rho * std::cos(theta), rho * std::sin(theta));
        bool near_pole = false;
        for (Eigen::Index i = 0; i < poles.size(); ++i)
            if (std::abs(s - poles(i)) < 1e-3 * radius) near_pole = true;
        if (near_pole) continue;
        const ComplexMatrix g = eval_state_space(r.A, r.B, r.C, r.D, s);
        const Eigen::Index m = r.num_channels();
        const Eigen::Index row0 = sel.output == Quad::Q ? 0 : m;
        const Eigen::Index col0 = sel.input == Quad::Q ? 0 : m;
        sampled_max = std::max(sampled_max, max_abs(ComplexMatrix(g.block(row0, col0, m, m))));
        ++accepted;
    }

    const double scale = 1.0 + max_abs(r.C) * max_abs(r.B) + max_abs(r.D);
    if (verdict && sampled_max > 1e-6 * scale)
        throw NumericalError("certify_zero_block: Markov verdict contradicts sampled transfer values");

    return {sel, horizon, residual, tol, verdict, sampled_max};
}

Complex RationalScalar::evaluate(Complex s) const {
    auto horner = [&s](const std::vector<double>& coeffs) {
        Complex acc(0, 0);
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * s + *it;
        return acc;
    };
    return horner(numerator) / horner(denominator);
}

RationalScalar siso_closed_form(const SystemParams& params, Quad which, double tol) {
    require_valid(params);
    if (params.num_channels() != 1)
        throw ShapeError("siso_closed_form: single-channel systems only");

    const double s_res = max_abs(ComplexMatrix(
        params.scattering - ComplexMatrix::Identity(1, 1)));
    if (s_res > tol)
        throw HypothesisError("siso_closed_form: identity scattering required", s_res);

    const int sign = which == Quad::Q ? +1 : -1;
    const auto comm = commutator_quadrature_h(params, sign);
    const double scale = 1.0 + max_abs(params.omega_full()) *
                                   (max_abs(params.coupling_minus) + max_abs(params.coupling_plus));
    if (comm.max_residual() > tol * scale)
        throw HypothesisError(std::string("siso_closed_form: commutation hypothesis for the ") +
                                  to_string(which) + " quadrature not satisfied",
                              comm.max_residual());

    const double g = siso_g(params);
    return {{-g / 2.0, 1.0}, {g / 2.0, 1.0}};
}

ComplexMatrix BlockDiagonalForm::block_minus(Complex s) const {
    const Eigen::Index m = gain.rows();
    const ComplexMatrix si = s * ComplexMatrix::Identity(m, m);
    return (si + gain).partialPivLu().solve((si - gain) * scattering);
}

ComplexMatrix BlockDiagonalForm::block_plus(Complex s) const {
    const Eigen::Index m = gain.rows();
    const ComplexMatrix gc = gain.conjugate();
    const ComplexMatrix si = s * ComplexMatrix::Identity(m, m);
    return (si + gc).partialPivLu().solve((si - gc) * scattering.conjugate());
}

BlockDiagonalForm blockdiag_closed_form(const SystemParams& params, int which_case, double tol) {
    require_valid(params);
    const auto comm = commutator_lh(params);
    if (!comm.is_zero(tol))
        throw HypothesisError("blockdiag_closed_form: [L,H] != 0", comm.max_residual());

    const ComplexMatrix& cm = params.coupling_minus;
    const ComplexMatrix& cp = params.coupling_plus;
    const ComplexMatrix prod = cm * cp.transpose();
    const double sym_res = max_abs(ComplexMatrix(prod - prod.transpose()));

    switch (which_case) {
        case 1:
            if (max_abs(cp) > tol)
                throw HypothesisError("case 1 requires C_+ = 0", max_abs(cp));
            break;
        case 2:
            if (max_abs(cm) > tol)
                throw HypothesisError("case 2 requires C_- = 0", max_abs(cm));
            break;
        case 3:
            if (max_abs(params.omega_plus) > tol)
                throw HypothesisError("case 3 requires Omega_+ = 0", max_abs(params.omega_plus));
            if (sym_res > tol)
                throw HypothesisError("case 3 requires C_- C_+^T symmetric", sym_res);
            break;
        case 4:
            if (max_abs(params.omega_minus) > tol)
                throw HypothesisError("case 4 requires Omega_- = 0", max_abs(params.omega_minus));
            if (sym_res > tol)
                throw HypothesisError("case 4 requires C_- C_+^T symmetric", sym_res);
            break;
        default:
            throw DomainError("blockdiag_closed_form: case must be 1..4");
    }

    return {0.5 * (cm * cm.adjoint() - cp * cp.adjoint()), params.scattering};
}

}  // namespace qlens
