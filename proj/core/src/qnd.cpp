#include "qlens/qnd.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "qlens/kalman.hpp"
#include "qlens/transfer.hpp"

namespace qlens {

double CommutatorCoefficients::max_residual() const {
    return std::max(max_abs(coeff_a), max_abs(coeff_adag));
}

bool CommutatorCoefficients::is_zero(double tol) const {
    return max_residual() <= tol;
}

CommutatorCoefficients commutator_lh(const SystemParams& p) {
    require_valid(p);
    return {p.coupling_minus * p.omega_minus - p.coupling_plus * p.omega_plus.adjoint(),
            p.coupling_minus * p.omega_plus - p.coupling_plus * p.omega_minus.transpose()};
}

CommutatorCoefficients commutator_lconj_h(const SystemParams& p) {
    require_valid(p);
    const ComplexMatrix cmc = p.coupling_minus.conjugate();
    const ComplexMatrix cpc = p.coupling_plus.conjugate();
    return {cpc * p.omega_minus - cmc * p.omega_plus.adjoint(),
            cpc * p.omega_plus - cmc * p.omega_minus.transpose()};
}

CommutatorCoefficients commutator_quadrature_h(const SystemParams& p, int sign) {
    require_valid(p);
    if (sign != 1 && sign != -1) throw DomainError("commutator_quadrature_h: sign must be +-1");
    const double s = static_cast<double>(sign);
    const ComplexMatrix e = p.coupling_minus + s * p.coupling_plus.conjugate();
    const ComplexMatrix f = p.coupling_plus + s * p.coupling_minus.conjugate();
    return {e * p.omega_minus - f * p.omega_plus.adjoint(),
            e * p.omega_plus - f * p.omega_minus.transpose()};
}

bool is_qnd_interaction(const SystemParams& p, double tol) {
    const auto pair = commutator_lh(p);
    const double scale =
        1.0 + (max_abs(p.coupling_minus) + max_abs(p.coupling_plus)) * max_abs(p.omega_full());
    const bool verdict = pair.max_residual() <= tol * scale;

    // second route: C Omega = 2 Delta(C_-, 0) Omega on the doubled-up level
    const ComplexMatrix omega = p.omega_full();
    const ComplexMatrix lhs = doubled_up(p.coupling_minus, p.coupling_plus).full() * omega;
    const ComplexMatrix rhs =
        2.0 * doubled_up(p.coupling_minus,
                         ComplexMatrix::Zero(p.num_channels(), p.num_modes())).full() * omega;
    const bool doubled_verdict = max_abs(ComplexMatrix(lhs - rhs)) <= tol * scale;

    if (verdict != doubled_verdict)
        throw NumericalError("is_qnd_interaction: the two algebraic routes disagree");
    return verdict;
}

double siso_g(const SystemParams& p) {
    require_valid(p);
    if (p.num_channels() != 1) throw ShapeError("siso_g: single-channel systems only");
    return p.coupling_minus.squaredNorm() - p.coupling_plus.squaredNorm();
}

QndInteractionReport qnd_interaction_consequences(const SystemParams& p, double tol) {
    const auto pair = commutator_lh(p);
    if (!is_qnd_interaction(p))
        throw HypothesisError("qnd_interaction_consequences: [L,H] != 0", pair.max_residual());

    QndInteractionReport rep{};
    rep.self_adjoint_residual =
        max_abs(ComplexMatrix(p.coupling_minus - p.coupling_plus.conjugate()));
    rep.self_adjoint = rep.self_adjoint_residual <= tol;

    const ComplexMatrix prod = p.coupling_minus * p.coupling_plus.transpose();
    rep.commuting_residual = max_abs(ComplexMatrix(prod - prod.transpose()));
    rep.mutually_commuting = rep.commuting_residual <= tol;

    const QuadratureRealization r = quadrature_realization(p);
    const auto params = markov(r, static_cast<int>(r.A.rows()) - 1);
    rep.markov_residual = 0.0;
    for (const auto& m : params) rep.markov_residual = std::max(rep.markov_residual, max_abs(m));
    rep.transfer_is_feedthrough = rep.markov_residual <= tol;

    const auto [lambda_q, lambda_p] = coupling_rows(p);
    ComplexMatrix lambda(p.num_channels(), 2 * p.num_modes());
    lambda << lambda_q, lambda_p;
    rep.drift_residual = max_abs(ComplexMatrix(lambda * r.A.cast<Complex>()));
    rep.diffusion_residual = max_abs(ComplexMatrix(lambda * r.B.cast<Complex>()));
    rep.dl_vanishes = rep.drift_residual <= tol && rep.diffusion_residual <= tol;
    return rep;
}

namespace {

RealMatrix orth_complement(const RealMatrix& basis, Eigen::Index ambient) {
    if (basis.cols() == 0) return RealMatrix::Identity(ambient, ambient);
    Eigen::BDCSVD<RealMatrix> svd(basis, Eigen::ComputeFullU);
    return svd.matrixU().rightCols(ambient - basis.cols());
}

// eq-of-motion closed forms under the two degenerate coupling patterns
struct ClosedForms {
    RealMatrix a, b, c;
};

ClosedForms closed_form_p_case(const SystemParams& p) {
    const Eigen::Index n = p.num_modes(), m = p.num_channels();
    const RealMatrix re_c = p.coupling_minus.real(), im_c = p.coupling_minus.imag();
    const RealMatrix re_cd = p.coupling_minus.adjoint().real(),
                     im_cd = p.coupling_minus.adjoint().imag();
    ClosedForms f;
    f.a = RealMatrix::Zero(2 * n, 2 * n);
    f.a.topRightCorner(n, n) =
        2.0 * (p.omega_minus.real() + re_cd * im_c + im_cd * re_c);
    f.a.bottomRightCorner(n, n) = 2.0 * p.omega_minus.imag();
    f.b = RealMatrix::Zero(2 * n, 2 * m);
    f.b.topLeftCorner(n, m) = -2.0 * re_cd;
    f.b.topRightCorner(n, m) = 2.0 * im_cd;
    f.c = RealMatrix::Zero(2 * m, 2 * n);
    f.c.topRightCorner(m, n) = -2.0 * im_c;
    f.c.bottomRightCorner(m, n) = 2.0 * re_c;
    return f;
}

ClosedForms closed_form_q_case(const SystemParams& p) {
    const Eigen::Index n = p.num_modes(), m = p.num_channels();
    const RealMatrix re_c = p.coupling_minus.real(), im_c = p.coupling_minus.imag();
    const RealMatrix re_cd = p.coupling_minus.adjoint().real(),
                     im_cd = p.coupling_minus.adjoint().imag();
    ClosedForms f;
    f.a = RealMatrix::Zero(2 * n, 2 * n);
    f.a.topLeftCorner(n, n) = 2.0 * p.omega_minus.imag();
    f.a.bottomLeftCorner(n, n) =
        -2.0 * (p.omega_minus.real() + im_cd * re_c + re_cd * im_c);
    f.b = RealMatrix::Zero(2 * n, 2 * m);
    f.b.bottomLeftCorner(n, m) = -2.0 * im_cd;
    f.b.bottomRightCorner(n, m) = -2.0 * re_cd;
    f.c = RealMatrix::Zero(2 * m, 2 * n);
    f.c.topLeftCorner(m, n) = 2.0 * re_c;
    f.c.bottomLeftCorner(m, n) = 2.0 * im_c;
    return f;
}

}  // namespace

std::vector<QNDVariableReport> qnd_characterize(const SystemParams& p, double tol) {
    require_valid(p);
    const Eigen::Index n = p.num_modes();
    const QuadratureRealization r = quadrature_realization(p);

    const double c_scale = 1.0 + max_abs(p.coupling_minus) + max_abs(p.coupling_plus);
    const double o_scale = 1.0 + max_abs(p.omega_minus) + max_abs(p.omega_plus);
    const bool q_coupling =
        max_abs(ComplexMatrix(p.coupling_minus - p.coupling_plus)) <= tol * c_scale;
    const bool p_coupling =
        max_abs(ComplexMatrix(p.coupling_minus + p.coupling_plus)) <= tol * c_scale;
    const bool omega_opposite =
        max_abs(ComplexMatrix(p.omega_minus + p.omega_plus)) <= tol * o_scale;
    const bool omega_equal =
        max_abs(ComplexMatrix(p.omega_minus - p.omega_plus)) <= tol * o_scale;

    std::vector<QNDVariableReport> out;

    const bool p_case = p_coupling && omega_opposite && !q_coupling;
    const bool q_case = q_coupling && omega_equal && !p_coupling;
    if (p_case || q_case) {
        const ClosedForms f = p_case ? closed_form_p_case(p) : closed_form_q_case(p);
        double gap = std::max(max_abs(RealMatrix(r.A - f.a)), max_abs(RealMatrix(r.C - f.c)));
        if (max_abs(ComplexMatrix(p.scattering -
                                  ComplexMatrix::Identity(p.num_channels(), p.num_channels()))) <=
            tol)
            gap = std::max(gap, max_abs(RealMatrix(r.B - f.b)));
        if (gap > 1e-10 * (1.0 + max_abs(r.A)))
            throw NumericalError("qnd_characterize: realization deviates from the closed-form dynamics");

        const ComplexMatrix im_omega = p.omega_minus.imag().cast<Complex>();
        const bool obs =
            pair_observable(im_omega, p.coupling_minus.imag().cast<Complex>()) ||
            pair_observable(im_omega, p.coupling_minus.real().cast<Complex>());

        const auto ctrl = controllable_subspace(r.A, r.B);
        RealMatrix axes = RealMatrix::Zero(2 * n, n);
        for (Eigen::Index i = 0; i < n; ++i) axes((p_case ? n : 0) + i, i) = 1.0;
        const double ctrl_overlap =
            ctrl.dim() == 0 ? 0.0 : max_abs(RealMatrix(ctrl.basis.transpose() * axes));

        QNDVariableReport rep;
        rep.target = p_case ? QNDVariableReport::Target::P : QNDVariableReport::Target::Q;
        rep.coefficients = RealVector::Zero(2 * n);
        for (Eigen::Index i = 0; i < n; ++i)
            rep.coefficients((p_case ? n : 0) + i) = 1.0 / std::sqrt(static_cast<double>(n));
        rep.uncontrollable = ctrl_overlap <= 1e-8;
        rep.observable = obs;
        rep.is_qnd = rep.uncontrollable && rep.observable;
        rep.detail = p_case ? "momentum quadratures close on themselves"
                            : "position quadratures close on themselves";
        out.push_back(std::move(rep));
    }

    // general scan: directions orthogonal to the controllable subspace that
    // lie in the row space of the observability map
    const auto ctrl = controllable_subspace(r.A, r.B);
    const auto unobs = unobservable_subspace(r.A, r.C);
    const RealMatrix unctrl_vars = orth_complement(ctrl.basis, 2 * n);
    const RealMatrix obs_vars = orth_complement(unobs.basis, 2 * n);
    const RealMatrix qnd_dirs = subspace_intersection(unctrl_vars, obs_vars);
    for (Eigen::Index j = 0; j < qnd_dirs.cols(); ++j) {
        QNDVariableReport rep;
        rep.target = QNDVariableReport::Target::Combination;
        rep.coefficients = qnd_dirs.col(j);
        rep.uncontrollable = true;
        rep.observable = true;
        rep.is_qnd = true;
        rep.detail = "uncontrollable yet observable direction";
        out.push_back(std::move(rep));
    }
    return out;
}

}  // namespace qlens
