#pragma once

#include <optional>

#include "qlens/bae.hpp"
#include "qlens/model.hpp"

// Coherent feedback composition: closing a beamsplitter loop over the second
// channel group of a partitioned plant, searching for coupling strengths
// that make the closed loop satisfy the evasion conditions, and the
// direct-coupling optomechanical construction.

namespace qlens {

// Plant with m1 retained channels (couplings k11, k12) and m2 loop channels
// (k21, k22). The assembled scattering must be unitary.
struct PartitionedPlant {
    Eigen::Index num_modes_count;  // n
    Eigen::Index m1, m2;
    ComplexMatrix s11, s12, s21, s22;
    ComplexMatrix k11, k12;  // m1 x n
    ComplexMatrix k21, k22;  // m2 x n
    ComplexMatrix omega_minus, omega_plus;

    ComplexMatrix assembled_scattering() const;
};

struct BeamsplitterParams {
    ComplexMatrix s_b;  // m2 x m2 unitary
};

void validate_plant(const PartitionedPlant& plant, double tol = 1e-10);

// Closed-loop reduction:
//   S_red   = S11 + W S21,              W = S12 S_b (I - S22 S_b)^{-1}
//   C_red_- = k11 + W k21,  C_red_+ = k12 + W k22
//   Omega_red_- = Omega_- - i (k11^dag S_b k21 - k21^dag S_b^dag k11)
//   Omega_red_+ = Omega_+ - i (k11^dag S_b k22 - k21^dag S_b^dag k12)
// Refuses loops with smallest singular value of I - S22 S_b below 1e-10.
// A symmetry defect of the reduced Hamiltonian blocks below 1e-8 is
// repaired by averaging; beyond that the call fails.
SystemParams reduce_network(const PartitionedPlant& plant, const BeamsplitterParams& bs);

struct FeedbackBaeResult {
    SystemParams reduced;
    BAEReport report;
    // Sufficient conditions for synthesized bilateral evasion: imaginary
    // Hamiltonian matrix and real-or-imaginary coupling, confirmed.
    bool conditions_met;
};

FeedbackBaeResult verify_feedback_bae(const PartitionedPlant& plant, const BeamsplitterParams& bs,
                                      double certificate_tol = 1e-8);

struct CouplingSearchResult {
    ComplexMatrix k11, k12, k21, k22;
    double objective;
    int restarts_used;
};

// Randomized multi-start alternating least squares on the coupling entries,
// minimizing |Re Omega_red_-|^2 + |Re Omega_red_+|^2 + |asym Omega_red_+|^2
// + min(|Im C_red|^2, |Re C_red|^2). Entries that are exactly zero in the
// template are structural zeros and stay pinned. Returns the first iterate
// with objective below 1e-10, or nothing once the evaluation budget is
// spent. Deterministic for a fixed seed.
std::optional<CouplingSearchResult> search_couplings(const PartitionedPlant& plant_template,
                                                     const BeamsplitterParams& bs, int budget,
                                                     std::uint64_t seed);

// Two driven cavity modes coupled to a damped mechanical mode through
// positions; the only dissipation is the mechanical channel.
struct OptomechParams {
    double detuning1;        // Delta_1
    double detuning2;        // Delta_2
    double mechanical_freq;  // omega_m
    double coupling1;        // lambda_1 > 0
    double coupling2;        // lambda_2 > 0
    double damping;          // kappa > 0
};

// Six-state realization with states ordered (q1, p1, q2, p2, q3, p3) and
// output rows sqrt(kappa) (q3, p3) plus unit feedthrough. Note the
// interleaved state order, matching the equations of motion rather than the
// [q; p] grouping used elsewhere.
QuadratureRealization build_optomech(const OptomechParams& p);

// Permutation taking the interleaved optomech state order to [q; p] grouping.
RealMatrix optomech_grouping_permutation();

// Flags for one candidate variable c^T x of a realization: annihilated by
// the controllability matrix, and visible in the observability row space.
struct VariableFlags {
    bool uncontrollable;
    double controllability_residual;  // max |c^T [B AB ...]|
    bool observable;                  // c has a component outside ker(obs map)
    double unobservable_fraction;     // |proj of c on ker| / |c|
    bool is_qnd;
};

VariableFlags variable_flags(const QuadratureRealization& r, const RealVector& c,
                             double tol = 1e-10);

struct OptomechQndReport {
    RealVector combination;  // lambda_1 q1 + lambda_2 q2, interleaved coords
    VariableFlags flags;
    // conjugate partner lambda_1 p1 - lambda_2 p2 and its flags, present
    // when the detunings are opposite and the couplings equal
    std::optional<RealVector> conjugate_partner;
    // individual cavity positions; both qualify in the zero-detuning regime
    VariableFlags mode1;
    VariableFlags mode2;
};

OptomechQndReport optomech_qnd_report(const OptomechParams& p, double tol = 1e-10);

}  // namespace qlens
