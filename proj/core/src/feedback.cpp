#include "qlens/feedback.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "qlens/kalman.hpp"
#include "qlens/rng.hpp"

namespace qlens {

ComplexMatrix PartitionedPlant::assembled_scattering() const {
    ComplexMatrix s(m1 + m2, m1 + m2);
    s.topLeftCorner(m1, m1) = s11;
    s.topRightCorner(m1, m2) = s12;
    s.bottomLeftCorner(m2, m1) = s21;
    s.bottomRightCorner(m2, m2) = s22;
    return s;
}

void validate_plant(const PartitionedPlant& p, double tol) {
    const Eigen::Index n = p.num_modes_count;
    if (p.s11.rows() != p.m1 || p.s11.cols() != p.m1 || p.s12.rows() != p.m1 ||
        p.s12.cols() != p.m2 || p.s21.rows() != p.m2 || p.s21.cols() != p.m1 ||
        p.s22.rows() != p.m2 || p.s22.cols() != p.m2)
        throw ShapeError("plant: scattering blocks inconsistent with (m1, m2)");
    if (p.k11.rows() != p.m1 || p.k12.rows() != p.m1 || p.k21.rows() != p.m2 ||
        p.k22.rows() != p.m2 || p.k11.cols() != n || p.k12.cols() != n || p.k21.cols() != n ||
        p.k22.cols() != n)
        throw ShapeError("plant: coupling blocks inconsistent with (m1, m2, n)");

    SystemParams whole;
    whole.scattering = p.assembled_scattering();
    whole.coupling_minus = ComplexMatrix(p.m1 + p.m2, n);
    whole.coupling_minus << p.k11, p.k21;
    whole.coupling_plus = ComplexMatrix(p.m1 + p.m2, n);
    whole.coupling_plus << p.k12, p.k22;
    whole.omega_minus = p.omega_minus;
    whole.omega_plus = p.omega_plus;
    require_valid(whole, tol);
}

namespace {

struct RawReduction {
    ComplexMatrix scattering, coupling_minus, coupling_plus;
    ComplexMatrix omega_minus, omega_plus;  // before symmetry repair
};

ComplexMatrix loop_gain(const PartitionedPlant& p, const BeamsplitterParams& bs) {
    const ComplexMatrix loop = ComplexMatrix::Identity(p.m2, p.m2) - p.s22 * bs.s_b;
    Eigen::BDCSVD<ComplexMatrix> svd(loop);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin < 1e-10)
        throw DomainError("reduce_network: ill-posed loop, smallest singular value " +
                          std::to_string(smin));
    return p.s12 * bs.s_b * loop.inverse();
}

RawReduction reduce_raw(const PartitionedPlant& p, const BeamsplitterParams& bs,
                        const ComplexMatrix& w) {
    const Complex i(0, 1);
    RawReduction out;
    out.scattering = p.s11 + w * p.s21;
    out.coupling_minus = p.k11 + w * p.k21;
    out.coupling_plus = p.k12 + w * p.k22;
    out.omega_minus =
        p.omega_minus -
        i * (p.k11.adjoint() * bs.s_b * p.k21 - p.k21.adjoint() * bs.s_b.adjoint() * p.k11);
    out.omega_plus =
        p.omega_plus -
        i * (p.k11.adjoint() * bs.s_b * p.k22 - p.k21.adjoint() * bs.s_b.adjoint() * p.k12);
    return out;
}

}  // namespace

SystemParams reduce_network(const PartitionedPlant& p, const BeamsplitterParams& bs) {
    validate_plant(p);
    if (bs.s_b.rows() != p.m2 || bs.s_b.cols() != p.m2)
        throw ShapeError("beamsplitter: must act on the m2 loop channels");
    const double bs_unit = max_abs(
        ComplexMatrix(bs.s_b * bs.s_b.adjoint() - ComplexMatrix::Identity(p.m2, p.m2)));
    if (bs_unit > 1e-10 * (1.0 + max_abs(bs.s_b)))
        throw DomainError("beamsplitter: not unitary");

    const RawReduction raw = reduce_raw(p, bs, loop_gain(p, bs));

    const double herm_defect = max_abs(ComplexMatrix(raw.omega_minus - raw.omega_minus.adjoint()));
    const double sym_defect = max_abs(ComplexMatrix(raw.omega_plus - raw.omega_plus.transpose()));
    if (herm_defect > 1e-8 || sym_defect > 1e-8)
        throw DomainError("reduce_network: reduced Hamiltonian blocks violate their symmetry "
                          "beyond tolerance (convention mismatch?)");

    SystemParams out;
    out.scattering = raw.scattering;
    out.coupling_minus = raw.coupling_minus;
    out.coupling_plus = raw.coupling_plus;
    out.omega_minus = 0.5 * (raw.omega_minus + raw.omega_minus.adjoint());
    out.omega_plus = 0.5 * (raw.omega_plus + raw.omega_plus.transpose());
    require_valid(out);
    return out;
}

FeedbackBaeResult verify_feedback_bae(const PartitionedPlant& plant, const BeamsplitterParams& bs,
                                      double certificate_tol) {
    FeedbackBaeResult result{reduce_network(plant, bs), {}, false};
    result.report = analyze(result.reduced, certificate_tol);
    const auto& prof = result.report.profile;
    result.conditions_met =
        passes_imaginary(prof.omega_class) &&
        (passes_real(prof.c_class) || passes_imaginary(prof.c_class)) &&
        !result.report.predictions.empty() && result.report.confirmed();
    return result;
}

namespace {

struct PinMask {
    Eigen::ArrayXXd k11, k12, k21, k22;  // 1 where free, 0 where pinned
};

PinMask make_mask(const PartitionedPlant& p) {
    auto mask = [](const ComplexMatrix& k) {
        return (k.array().abs() > 0.0).cast<double>().eval();
    };
    return {mask(p.k11), mask(p.k12), mask(p.k21), mask(p.k22)};
}

// Residual vector whose squared norm is the search objective, for a fixed
// real/imaginary branch of the coupling term.
RealVector objective_residual(const PartitionedPlant& p, const BeamsplitterParams& bs,
                              const ComplexMatrix& w, bool imag_branch) {
    const RawReduction red = reduce_raw(p, bs, w);
    ComplexMatrix c(red.coupling_minus.rows(), 2 * red.coupling_minus.cols());
    c << red.coupling_minus, red.coupling_plus;
    const RealMatrix cpart = imag_branch ? RealMatrix(c.imag()) : RealMatrix(c.real());
    const RealMatrix rom = red.omega_minus.real();
    const RealMatrix rop = red.omega_plus.real();
    const ComplexMatrix asym = red.omega_plus - red.omega_plus.transpose();

    RealVector r(rom.size() + rop.size() + 2 * asym.size() + cpart.size());
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < rom.size(); ++i) r(at++) = rom(i);
    for (Eigen::Index i = 0; i < rop.size(); ++i) r(at++) = rop(i);
    for (Eigen::Index i = 0; i < asym.size(); ++i) r(at++) = asym(i).real();
    for (Eigen::Index i = 0; i < asym.size(); ++i) r(at++) = asym(i).imag();
    for (Eigen::Index i = 0; i < cpart.size(); ++i) r(at++) = cpart(i);
    return r;
}

double objective_value(const PartitionedPlant& p, const BeamsplitterParams& bs,
                       const ComplexMatrix& w) {
    return std::min(objective_residual(p, bs, w, true).squaredNorm(),
                    objective_residual(p, bs, w, false).squaredNorm());
}

void pack(const ComplexMatrix& k, const Eigen::ArrayXXd& mask, RealVector& v, Eigen::Index& at) {
    for (Eigen::Index j = 0; j < k.cols(); ++j)
        for (Eigen::Index i = 0; i < k.rows(); ++i)
            if (mask(i, j) > 0) {
                v(at++) = k(i, j).real();
                v(at++) = k(i, j).imag();
            }
}

void unpack(ComplexMatrix& k, const Eigen::ArrayXXd& mask, const RealVector& v, Eigen::Index& at) {
    for (Eigen::Index j = 0; j < k.cols(); ++j)
        for (Eigen::Index i = 0; i < k.rows(); ++i)
            if (mask(i, j) > 0) {
                const double re = v(at++);
                const double im = v(at++);
                k(i, j) = Complex(re, im);
            }
}

}  // namespace

std::optional<CouplingSearchResult> search_couplings(const PartitionedPlant& plant_template,
                                                     const BeamsplitterParams& bs, int budget,
                                                     std::uint64_t seed) {
    if (budget < 1) throw DomainError("search_couplings: budget must be positive");
    validate_plant(plant_template);
    constexpr double kTarget = 1e-10;

    PartitionedPlant work = plant_template;
    const ComplexMatrix w = loop_gain(work, bs);

    if (objective_value(work, bs, w) <= kTarget)
        return CouplingSearchResult{work.k11, work.k12, work.k21, work.k22,
                                    objective_value(work, bs, w), 0};

    const PinMask mask = make_mask(plant_template);
    const Eigen::Index dim =
        2 * static_cast<Eigen::Index>(mask.k11.sum() + mask.k12.sum() + mask.k21.sum() +
                                      mask.k22.sum());
    if (dim == 0) return std::nullopt;

    std::mt19937_64 rng = make_engine(seed);
    int evaluations = 0;
    int restart = 0;

    auto pack_all = [&]() {
        RealVector v(dim);
        Eigen::Index at = 0;
        pack(work.k11, mask.k11, v, at);
        pack(work.k12, mask.k12, v, at);
        pack(work.k21, mask.k21, v, at);
        pack(work.k22, mask.k22, v, at);
        return v;
    };
    auto apply_all = [&](const RealVector& v) {
        Eigen::Index at = 0;
        unpack(work.k11, mask.k11, v, at);
        unpack(work.k12, mask.k12, v, at);
        unpack(work.k21, mask.k21, v, at);
        unpack(work.k22, mask.k22, v, at);
    };

    while (evaluations < budget) {
        ++restart;
        auto reseed = [&](ComplexMatrix& k, const Eigen::ArrayXXd& m) {
            for (Eigen::Index j = 0; j < k.cols(); ++j)
                for (Eigen::Index i = 0; i < k.rows(); ++i)
                    if (m(i, j) > 0) k(i, j) = Complex(standard_normal(rng), standard_normal(rng));
        };
        reseed(work.k11, mask.k11);
        reseed(work.k12, mask.k12);
        reseed(work.k21, mask.k21);
        reseed(work.k22, mask.k22);
        const bool imag_branch = uniform_unit(rng) < 0.5;

        // Levenberg-Marquardt on the fixed-branch residual; it is quadratic
        // in the couplings, so zero-residual solutions attract quadratically.
        // Iterates are polished well past the acceptance threshold so the
        // reduced Hamiltonian also clears the symmetry gate.
        constexpr double kPolish = 1e-22;
        RealVector x = pack_all();
        double obj = objective_residual(work, bs, w, imag_branch).squaredNorm();
        ++evaluations;
        double lambda = 1e-3;
        for (int iter = 0; iter < 150 && evaluations < budget && obj > kPolish; ++iter) {
            apply_all(x);
            const RealVector r0 = objective_residual(work, bs, w, imag_branch);
            RealMatrix jac(r0.size(), dim);
            for (Eigen::Index j = 0; j < dim; ++j) {
                const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
                RealVector xp = x;
                xp(j) += h;
                apply_all(xp);
                const RealVector fwd = objective_residual(work, bs, w, imag_branch);
                xp(j) = x(j) - h;
                apply_all(xp);
                jac.col(j) = (fwd - objective_residual(work, bs, w, imag_branch)) / (2.0 * h);
                evaluations += 2;
            }
            const RealMatrix jtj = jac.transpose() * jac;
            const RealVector grad = jac.transpose() * r0;
            bool accepted = false;
            for (int tries = 0; tries < 8 && evaluations < budget; ++tries) {
                const RealMatrix damped = jtj + lambda * RealMatrix::Identity(dim, dim);
                const RealVector step = damped.ldlt().solve(-grad);
                apply_all(RealVector(x + step));
                const double cand = objective_residual(work, bs, w, imag_branch).squaredNorm();
                ++evaluations;
                if (cand < obj) {
                    x += step;
                    obj = cand;
                    lambda = std::max(lambda / 3.0, 1e-12);
                    accepted = true;
                    break;
                }
                lambda *= 5.0;
            }
            if (!accepted) break;  // stalled; take a fresh restart
        }
        apply_all(x);
        if (obj <= kTarget)
            return CouplingSearchResult{work.k11, work.k12, work.k21, work.k22,
                                        objective_value(work, bs, w), restart};
    }
    return std::nullopt;
}

QuadratureRealization build_optomech(const OptomechParams& p) {
    if (p.damping <= 0) throw DomainError("optomech: damping must be positive");
    if (p.coupling1 < 0 || p.coupling2 < 0)
        throw DomainError("optomech: couplings must be nonnegative");
    const double sk = std::sqrt(p.damping);

    QuadratureRealization r;
    r.A = RealMatrix::Zero(6, 6);
    // states (q1, p1, q2, p2, q3, p3)
    r.A(0, 1) = -p.detuning1;
    r.A(1, 0) = p.detuning1;
    r.A(1, 4) = -p.coupling1;
    r.A(2, 3) = -p.detuning2;
    r.A(3, 2) = p.detuning2;
    r.A(3, 4) = -p.coupling2;
    r.A(4, 4) = -p.damping / 2.0;
    r.A(4, 5) = p.mechanical_freq;
    r.A(5, 0) = -p.coupling1;
    r.A(5, 2) = -p.coupling2;
    r.A(5, 4) = -p.mechanical_freq;
    r.A(5, 5) = -p.damping / 2.0;

    r.B = RealMatrix::Zero(6, 2);
    r.B(4, 0) = -sk;
    r.B(5, 1) = -sk;

    r.C = RealMatrix::Zero(2, 6);
    r.C(0, 4) = sk;
    r.C(1, 5) = sk;

    r.D = RealMatrix::Identity(2, 2);
    return r;
}

RealMatrix optomech_grouping_permutation() {
    RealMatrix perm = RealMatrix::Zero(6, 6);
    // grouped index <- interleaved index: (q1,q2,q3,p1,p2,p3) <- (q1,p1,q2,p2,q3,p3)
    const int interleaved_of_grouped[6] = {0, 2, 4, 1, 3, 5};
    for (int g = 0; g < 6; ++g) perm(g, interleaved_of_grouped[g]) = 1.0;
    return perm;
}

VariableFlags variable_flags(const QuadratureRealization& r, const RealVector& c, double tol) {
    const Eigen::Index dim = r.A.rows();
    if (c.size() != dim) throw ShapeError("variable_flags: coefficient length mismatch");

    RealMatrix ctrl(dim, dim * r.B.cols());
    ctrl.leftCols(r.B.cols()) = r.B;
    for (Eigen::Index k = 1; k < dim; ++k)
        ctrl.middleCols(k * r.B.cols(), r.B.cols()) =
            r.A * ctrl.middleCols((k - 1) * r.B.cols(), r.B.cols());

    VariableFlags f{};
    f.controllability_residual = max_abs(RealMatrix(c.transpose() * ctrl));
    f.uncontrollable = f.controllability_residual <= tol * (1.0 + c.norm());

    const SubspaceBasis unobs = unobservable_subspace(r.A, r.C);
    const double proj =
        unobs.dim() == 0 ? 0.0 : (unobs.basis * (unobs.basis.transpose() * c)).norm();
    f.unobservable_fraction = proj / (c.norm() > 0 ? c.norm() : 1.0);
    // visible as soon as part of the variable escapes the unobservable span
    f.observable = f.unobservable_fraction < 1.0 - 1e-8;
    f.is_qnd = f.uncontrollable && f.observable;
    return f;
}

OptomechQndReport optomech_qnd_report(const OptomechParams& p, double tol) {
    const QuadratureRealization r = build_optomech(p);

    OptomechQndReport rep{};
    rep.combination = RealVector::Zero(6);
    rep.combination(0) = p.coupling1;
    rep.combination(2) = p.coupling2;
    rep.flags = variable_flags(r, rep.combination, tol);

    const bool paired = std::abs(p.detuning1 + p.detuning2) <= tol &&
                        std::abs(p.coupling1 - p.coupling2) <= tol;
    if (paired) {
        RealVector partner = RealVector::Zero(6);
        partner(1) = p.coupling1;
        partner(3) = -p.coupling2;
        rep.conjugate_partner = partner;
    }

    RealVector e1 = RealVector::Zero(6), e2 = RealVector::Zero(6);
    e1(0) = 1.0;
    e2(2) = 1.0;
    rep.mode1 = variable_flags(r, e1, tol);
    rep.mode2 = variable_flags(r, e2, tol);
    return rep;
}

}  // namespace qlens
