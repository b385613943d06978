#pragma once

#include <string>
#include <vector>

#include "qlens/model.hpp"

// Controllability/observability subspaces, verification of supplied
// canonical-form partitions, and the co-subsystem block criteria for
// back-action-evading measurement.

namespace qlens {

struct SubspaceBasis {
    enum class Kind { Controllable, Unobservable };
    RealMatrix basis;  // orthonormal columns
    Kind kind;
    Eigen::Index dim() const { return basis.cols(); }
};

// Orthonormal basis of range [B, AB, ..., A^{d-1}B], d = state dimension.
// Rank cut: singular values below 1e-9 * sigma_max.
SubspaceBasis controllable_subspace(const RealMatrix& a, const RealMatrix& b);

// Orthonormal basis of ker [C; CA; ...; CA^{d-1}].
SubspaceBasis unobservable_subspace(const RealMatrix& a, const RealMatrix& c);

// Observability of a complex pair (M, C): rank of the stacked matrix.
bool pair_observable(const ComplexMatrix& m, const ComplexMatrix& c);

// Orthonormal basis of the intersection of two column spans.
RealMatrix subspace_intersection(const RealMatrix& u, const RealMatrix& w);

// Mode counts of the three-part canonical decomposition: controllable and
// observable (n1), fully isolated (n2), and the conjugately paired part
// hosting non-demolition variables (n3). The physical-realizability pairing
// dim(controllable) + dim(unobservable) = state dimension is asserted.
struct SubsystemDimensions {
    Eigen::Index n_co;
    Eigen::Index n_isolated;
    Eigen::Index n_paired;
};

SubsystemDimensions subsystem_dimensions(const QuadratureRealization& r);
SubsystemDimensions subsystem_dimensions(const RealMatrix& a, const RealMatrix& b,
                                         const RealMatrix& c);

// A realization supplied in canonical coordinates [q_h, p_h, x_co, x_iso]
// together with the partition sizes. Blocks are addressed by the sparsity
// pattern
//   A = [A_h11 A_h12 A_12  A_13 ]   B = [B_h ]   C = [0 C_h C_co 0]
//       [0     A_h22 0     0    ]       [0   ]
//       [0     A_21  A_co  0    ]       [B_co]
//       [0     A_31  A_x1  A_iso]       [0   ]
struct KalmanPartition {
    Eigen::Index n_co, n_isolated, n_paired, channels;
    RealMatrix a, b, c;

    RealMatrix a_co() const;
    RealMatrix b_co() const;
    RealMatrix c_co() const;
    RealMatrix c_h() const;
};

KalmanPartition make_partition(Eigen::Index n_co, Eigen::Index n_isolated, Eigen::Index n_paired,
                               Eigen::Index channels, RealMatrix a, RealMatrix b, RealMatrix c);

struct KalmanFormVerdict {
    bool valid;
    struct BlockResidual {
        std::string block;
        double residual;
    };
    std::vector<BlockResidual> residuals;  // one entry per required zero block
};

KalmanFormVerdict verify_kalman_form(const KalmanPartition& partition, double tol = 1e-10);

// Consistency consequence of a coupling that commutes with the Hamiltonian,
// expressed on the partition blocks:
//   C_h A_h22 + C_co JJ_n1 A_12^T + (1/2) C_co B_co JJ_m B_h^T.
// Vanishes for commuting interactions; returned as a residual matrix.
RealMatrix commutation_coupling_residual(const KalmanPartition& partition);

// Criteria on the co-subsystem blocks: the (q_out, p_in) transfer block
// vanishes iff C_co,q B_co,p = 0, and (p_out, q_in) iff C_co,p B_co,q = 0;
// equivalently, symmetry of the real (resp. imaginary) Gamma products.
struct KalmanBaeCriteria {
    bool q_wrt_p;
    bool p_wrt_q;
    double q_wrt_p_residual;
    double p_wrt_q_residual;
    double re_gamma_symmetry_residual;       // Re(G_q) Re(G_p^T) symmetry defect
    double im_gamma_symmetry_residual;       // Im(G_q) Im(G_p^T) symmetry defect
    double re_gamma_product_symmetry_residual;  // Re(G_q G_p^T) symmetry defect
};

KalmanBaeCriteria kalman_bae_criteria(const RealMatrix& c_co, const RealMatrix& b_co,
                                      double tol = 1e-10);

}  // namespace qlens
