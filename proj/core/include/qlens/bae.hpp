#pragma once

#include <string>
#include <vector>

#include "qlens/model.hpp"
#include "qlens/transfer.hpp"

// Structural classification against the sufficient conditions for
// back-action-evading measurement, prediction of which transfer blocks must
// vanish, and numeric confirmation of every prediction.

namespace qlens {

enum class ReOmegaRelation { Equal, Opposite, Both, Neither };
enum class CouplingPattern { QCoupling, PCoupling, General };

std::string to_string(ReOmegaRelation r);
std::string to_string(CouplingPattern c);

struct StructureProfile {
    StructureClass s_class;
    StructureClass c_class;      // class of the doubled-up coupling matrix
    StructureClass omega_class;  // class of the doubled-up Hamiltonian matrix
    ReOmegaRelation re_omega_relation;
    CouplingPattern coupling_pattern;
    double tolerance;
};

StructureProfile profile(const SystemParams& params, double tol = 1e-10);

// The closed rule table. Every rule is a sufficient condition on the
// profile; predictions outside the table are never made.
enum class BaeRule {
    BilateralCross,      // S real, Omega imaginary, C real or imaginary
    BilateralSame,       // S imaginary, Omega imaginary, C real or imaginary
    UnilateralEqual,     // Re(Omega_-) = Re(Omega_+), row selected by (S, C)
    UnilateralOpposite,  // Re(Omega_-) = -Re(Omega_+), row selected by (S, C)
    CouplingDirect,      // S real, C imaginary, C_- = +-C_+
};

std::string to_string(BaeRule r);

struct Prediction {
    BlockSelector selector;
    BaeRule rule;
    std::string citation;  // rule id plus the hypothesis that fired
};

std::vector<Prediction> predict(const StructureProfile& p);

// Re-evaluates the hypothesis behind a prediction; used to keep citations
// machine-checked rather than decorative.
bool rule_hypothesis_holds(BaeRule rule, const StructureProfile& p);

struct QndFlag {
    std::string variable;
    bool observable;
    std::string detail;
};

struct BAEReport {
    StructureProfile profile;
    std::vector<Prediction> predictions;
    std::vector<ZeroBlockCertificate> verifications;  // one per distinct selector
    std::vector<QndFlag> qnd_flags;
    bool confirmed() const;  // every predicted certificate verdict true
};

BAEReport analyze(const SystemParams& params, double certificate_tol = 1e-8,
                  double profile_tol = 1e-10);

}  // namespace qlens
