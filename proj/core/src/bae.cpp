#include "qlens/bae.hpp"

#include <algorithm>

#include "qlens/kalman.hpp"

namespace qlens {

std::string to_string(ReOmegaRelation r) {
    switch (r) {
        case ReOmegaRelation::Equal: return "equal";
        case ReOmegaRelation::Opposite: return "opposite";
        case ReOmegaRelation::Both: return "both";
        case ReOmegaRelation::Neither: return "neither";
    }
    return "?";
}

std::string to_string(CouplingPattern c) {
    switch (c) {
        case CouplingPattern::QCoupling: return "q-coupling";
        case CouplingPattern::PCoupling: return "p-coupling";
        case CouplingPattern::General: return "general";
    }
    return "?";
}

std::string to_string(BaeRule r) {
    switch (r) {
        case BaeRule::BilateralCross: return "bilateral-cross";
        case BaeRule::BilateralSame: return "bilateral-same";
        case BaeRule::UnilateralEqual: return "unilateral-equal-re";
        case BaeRule::UnilateralOpposite: return "unilateral-opposite-re";
        case BaeRule::CouplingDirect: return "single-quadrature-coupling";
    }
    return "?";
}

StructureProfile profile(const SystemParams& p, double tol) {
    require_valid(p);
    StructureProfile out;
    out.tolerance = tol;
    out.s_class = classify(p.scattering, tol);
    out.c_class = classify(doubled_up(p.coupling_minus, p.coupling_plus).full(), tol);
    out.omega_class = classify(p.omega_full(), tol);

    const RealMatrix re_m = p.omega_minus.real(), re_p = p.omega_plus.real();
    const double scale = tol * (1.0 + std::max(max_abs(re_m), max_abs(re_p)));
    const bool eq = max_abs(RealMatrix(re_m - re_p)) <= scale;
    const bool opp = max_abs(RealMatrix(re_m + re_p)) <= scale;
    out.re_omega_relation = eq && opp   ? ReOmegaRelation::Both
                            : eq        ? ReOmegaRelation::Equal
                            : opp       ? ReOmegaRelation::Opposite
                                        : ReOmegaRelation::Neither;

    const double c_scale =
        tol * (1.0 + max_abs(p.coupling_minus) + max_abs(p.coupling_plus));
    const bool qc = max_abs(ComplexMatrix(p.coupling_minus - p.coupling_plus)) <= c_scale;
    const bool pc = max_abs(ComplexMatrix(p.coupling_minus + p.coupling_plus)) <= c_scale;
    out.coupling_pattern = qc   ? CouplingPattern::QCoupling
                           : pc ? CouplingPattern::PCoupling
                                : CouplingPattern::General;
    return out;
}

namespace {

bool c_real_or_imag(const StructureProfile& p) {
    return passes_real(p.c_class) || passes_imaginary(p.c_class);
}

bool re_equal(const StructureProfile& p) {
    return p.re_omega_relation == ReOmegaRelation::Equal ||
           p.re_omega_relation == ReOmegaRelation::Both;
}

bool re_opposite(const StructureProfile& p) {
    return p.re_omega_relation == ReOmegaRelation::Opposite ||
           p.re_omega_relation == ReOmegaRelation::Both;
}

// Row lookup for the two unilateral tables. Selector depends on the (S, C)
// classes; `equal_re` picks which table.
BlockSelector table_row(bool s_real, bool c_real, bool equal_re) {
    if (equal_re) {
        if (s_real && c_real) return {Quad::Q, Quad::P};
        if (s_real && !c_real) return {Quad::P, Quad::Q};
        if (!s_real && c_real) return {Quad::Q, Quad::Q};
        return {Quad::P, Quad::P};
    }
    if (s_real && c_real) return {Quad::P, Quad::Q};
    if (s_real && !c_real) return {Quad::Q, Quad::P};
    if (!s_real && c_real) return {Quad::P, Quad::P};
    return {Quad::Q, Quad::Q};
}

}  // namespace

bool rule_hypothesis_holds(BaeRule rule, const StructureProfile& p) {
    switch (rule) {
        case BaeRule::BilateralCross:
            return passes_real(p.s_class) && passes_imaginary(p.omega_class) && c_real_or_imag(p);
        case BaeRule::BilateralSame:
            return passes_imaginary(p.s_class) && passes_imaginary(p.omega_class) &&
                   c_real_or_imag(p);
        case BaeRule::UnilateralEqual:
            return re_equal(p) &&
                   (passes_real(p.s_class) || passes_imaginary(p.s_class)) && c_real_or_imag(p);
        case BaeRule::UnilateralOpposite:
            return re_opposite(p) &&
                   (passes_real(p.s_class) || passes_imaginary(p.s_class)) && c_real_or_imag(p);
        case BaeRule::CouplingDirect:
            return passes_real(p.s_class) && passes_imaginary(p.c_class) &&
                   p.coupling_pattern != CouplingPattern::General;
    }
    return false;
}

std::vector<Prediction> predict(const StructureProfile& p) {
    std::vector<Prediction> out;
    auto add = [&out](BlockSelector sel, BaeRule rule, const std::string& why) {
        out.push_back({sel, rule, to_string(rule) + ": " + why});
    };

    if (rule_hypothesis_holds(BaeRule::BilateralCross, p)) {
        const std::string why = "imaginary Hamiltonian matrix, real scattering, " +
                                to_string(p.c_class) + " coupling";
        add({Quad::Q, Quad::P}, BaeRule::BilateralCross, why);
        add({Quad::P, Quad::Q}, BaeRule::BilateralCross, why);
    }
    if (rule_hypothesis_holds(BaeRule::BilateralSame, p)) {
        const std::string why = "imaginary Hamiltonian matrix, imaginary scattering, " +
                                to_string(p.c_class) + " coupling";
        add({Quad::Q, Quad::Q}, BaeRule::BilateralSame, why);
        add({Quad::P, Quad::P}, BaeRule::BilateralSame, why);
    }

    // unilateral tables; entries for every matching (S, C) class pair
    for (const bool equal_re : {true, false}) {
        const BaeRule rule = equal_re ? BaeRule::UnilateralEqual : BaeRule::UnilateralOpposite;
        if (!rule_hypothesis_holds(rule, p)) continue;
        for (const bool s_real : {true, false}) {
            if (s_real ? !passes_real(p.s_class) : !passes_imaginary(p.s_class)) continue;
            for (const bool c_real : {true, false}) {
                if (c_real ? !passes_real(p.c_class) : !passes_imaginary(p.c_class)) continue;
                const std::string why =
                    std::string(equal_re ? "equal" : "opposite") +
                    " real Hamiltonian blocks, " + (s_real ? "real" : "imaginary") +
                    " scattering, " + (c_real ? "real" : "imaginary") + " coupling";
                add(table_row(s_real, c_real, equal_re), rule, why);
            }
        }
    }

    if (rule_hypothesis_holds(BaeRule::CouplingDirect, p)) {
        if (p.coupling_pattern == CouplingPattern::QCoupling)
            add({Quad::Q, Quad::P}, BaeRule::CouplingDirect,
                "imaginary position-only coupling, real scattering");
        else
            add({Quad::P, Quad::Q}, BaeRule::CouplingDirect,
                "imaginary momentum-only coupling, real scattering");
    }
    return out;
}

bool BAEReport::confirmed() const {
    if (predictions.empty()) return true;
    return std::all_of(verifications.begin(), verifications.end(),
                       [](const ZeroBlockCertificate& c) { return c.verdict; });
}

BAEReport analyze(const SystemParams& params, double certificate_tol, double profile_tol) {
    BAEReport report;
    report.profile = profile(params, profile_tol);
    report.predictions = predict(report.profile);

    const QuadratureRealization r = quadrature_realization(params);
    std::vector<BlockSelector> distinct;
    for (const auto& pred : report.predictions) {
        const bool seen = std::any_of(distinct.begin(), distinct.end(), [&](BlockSelector s) {
            return s.output == pred.selector.output && s.input == pred.selector.input;
        });
        if (!seen) distinct.push_back(pred.selector);
    }
    for (const auto sel : distinct)
        report.verifications.push_back(certify_zero_block(r, sel, certificate_tol));

    // bilateral rules carry a non-demolition side condition on the coupled
    // quadrature: observability of (i(Omega_- +- Omega_+), C_-)
    const bool bilateral =
        std::any_of(report.predictions.begin(), report.predictions.end(), [](const Prediction& p) {
            return p.rule == BaeRule::BilateralCross || p.rule == BaeRule::BilateralSame;
        });
    if (bilateral && report.profile.coupling_pattern != CouplingPattern::General) {
        const bool q = report.profile.coupling_pattern == CouplingPattern::QCoupling;
        const ComplexMatrix m =
            Complex(0, 1) * (q ? ComplexMatrix(params.omega_minus + params.omega_plus)
                               : ComplexMatrix(params.omega_minus - params.omega_plus));
        const bool obs = pair_observable(m, params.coupling_minus);
        report.qnd_flags.push_back(
            {q ? "q" : "p", obs,
             obs ? "coupled quadrature observable: non-demolition variable"
                 : "coupled quadrature not observable"});
    }
    return report;
}

}  // namespace qlens
