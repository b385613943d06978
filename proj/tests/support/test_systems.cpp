#include "test_systems.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "qlens/rng.hpp"

namespace qlens::testing {

SystemParams make_michelson(double mass, double mech_freq, double strength) {
    SystemParams p;
    const double restoring = mass * mech_freq * mech_freq;
    p.omega_minus = 0.5 * (restoring + 1.0 / mass) * ComplexMatrix::Identity(2, 2);
    p.omega_plus = 0.5 * (restoring - 1.0 / mass) * ComplexMatrix::Identity(2, 2);
    ComplexMatrix c(2, 2);
    const Complex z = Complex(0, 1) * std::sqrt(strength) / 2.0;
    c << z, z, z, -z;
    p.coupling_minus = c;
    p.coupling_plus = c;
    p.scattering = ComplexMatrix::Identity(2, 2);
    return p;
}

SystemParams make_ndpa(double gain, double pump) {
    SystemParams p;
    p.scattering = ComplexMatrix::Identity(1, 1);
    p.coupling_minus = ComplexMatrix::Constant(1, 1, gain);
    p.coupling_plus = ComplexMatrix::Constant(1, 1, 0.3 * gain);
    p.omega_minus = ComplexMatrix::Zero(1, 1);
    p.omega_plus = ComplexMatrix::Constant(1, 1, Complex(0, pump));
    return p;
}

PartitionedPlant make_feedback_plant() {
    PartitionedPlant p;
    p.num_modes_count = 2;
    p.m1 = 1;
    p.m2 = 1;
    p.s11 = ComplexMatrix::Zero(1, 1);
    p.s12 = ComplexMatrix::Identity(1, 1);
    p.s21 = ComplexMatrix::Identity(1, 1);
    p.s22 = ComplexMatrix::Zero(1, 1);
    p.k11 = ComplexMatrix(1, 2);
    p.k11 << Complex(1, 1), Complex(1, 1);
    p.k12 = ComplexMatrix(1, 2);
    p.k12 << Complex(1, 1), Complex(2, 2);
    p.k21 = ComplexMatrix(1, 2);
    p.k21 << Complex(1, 0), Complex(1, 1);
    p.k22 = ComplexMatrix(1, 2);
    p.k22 << Complex(1, 0), Complex(2, -1);
    p.omega_minus = ComplexMatrix(2, 2);
    p.omega_minus << Complex(2, 0), Complex(3, 2), Complex(3, -2), Complex(4, 0);
    p.omega_plus = ComplexMatrix(2, 2);
    p.omega_plus << Complex(2, 0), Complex(3, -1), Complex(3, -1), Complex(5, 0);
    return p;
}

BeamsplitterParams make_feedback_beamsplitter() {
    return {ComplexMatrix::Constant(1, 1, Complex(0, -1))};
}

ComplexMatrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
    const ComplexMatrix g = random_complex_matrix(n, n, rng);
    return 0.5 * (g + g.adjoint());
}

ComplexMatrix random_complex_symmetric(Eigen::Index n, std::mt19937_64& rng) {
    const ComplexMatrix g = random_complex_matrix(n, n, rng);
    return 0.5 * (g + g.transpose());
}

ComplexMatrix imaginary_hermitian(Eigen::Index n, std::mt19937_64& rng) {
    const RealMatrix g = random_normal_matrix(n, n, rng);
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    out.imag() = 0.5 * (g - g.transpose());
    return out;
}

ComplexMatrix imaginary_symmetric(Eigen::Index n, std::mt19937_64& rng) {
    const RealMatrix g = random_normal_matrix(n, n, rng);
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    out.imag() = 0.5 * (g + g.transpose());
    return out;
}

SystemParams make_bilateral(Eigen::Index n, Eigen::Index m, bool s_imaginary, bool c_imaginary,
                            std::mt19937_64& rng) {
    SystemParams p;
    p.omega_minus = imaginary_hermitian(n, rng);
    p.omega_plus = imaginary_symmetric(n, rng);
    const Complex phase = c_imaginary ? Complex(0, 1) : Complex(1, 0);
    p.coupling_minus = phase * random_normal_matrix(m, n, rng).cast<Complex>();
    p.coupling_plus = phase * random_normal_matrix(m, n, rng).cast<Complex>();
    const Complex s_phase = s_imaginary ? Complex(0, 1) : Complex(1, 0);
    p.scattering = s_phase * random_orthogonal(m, rng).cast<Complex>();
    return p;
}

SystemParams make_table_row(Eigen::Index n, Eigen::Index m, bool equal_re, bool s_imaginary,
                            bool c_imaginary, std::mt19937_64& rng) {
    SystemParams p = make_bilateral(n, m, s_imaginary, c_imaginary, rng);
    const RealMatrix shared = [&] {
        const RealMatrix g = random_normal_matrix(n, n, rng);
        return RealMatrix(0.5 * (g + g.transpose()));
    }();
    p.omega_minus.real() = shared;
    p.omega_plus.real() = equal_re ? shared : RealMatrix(-shared);
    return p;
}

SystemParams make_single_quadrature_coupling(Eigen::Index n, Eigen::Index m, bool q_coupling,
                                             std::mt19937_64& rng) {
    SystemParams p;
    p.omega_minus = random_hermitian(n, rng);
    p.omega_plus = random_complex_symmetric(n, rng);
    p.coupling_minus = Complex(0, 1) * random_normal_matrix(m, n, rng).cast<Complex>();
    p.coupling_plus = q_coupling ? p.coupling_minus : ComplexMatrix(-p.coupling_minus);
    p.scattering = random_orthogonal(m, rng).cast<Complex>();
    return p;
}

namespace {

Eigen::Index sym_params(Eigen::Index n) { return n * (n + 1) / 2; }
Eigen::Index antisym_params(Eigen::Index n) { return n * (n - 1) / 2; }

// Hermitian X+iY, symmetric P+iQ from a packed real parameter vector.
std::pair<ComplexMatrix, ComplexMatrix> unpack_omega(const RealVector& v, Eigen::Index n) {
    Eigen::Index at = 0;
    RealMatrix x = RealMatrix::Zero(n, n), y = RealMatrix::Zero(n, n);
    RealMatrix pr = RealMatrix::Zero(n, n), qi = RealMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            x(i, j) = x(j, i) = v(at++);
        }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            y(i, j) = v(at);
            y(j, i) = -v(at);
            ++at;
        }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            pr(i, j) = pr(j, i) = v(at++);
        }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            qi(i, j) = qi(j, i) = v(at++);
        }
    ComplexMatrix omega_minus(n, n), omega_plus(n, n);
    omega_minus.real() = x;
    omega_minus.imag() = y;
    omega_plus.real() = pr;
    omega_plus.imag() = qi;
    return {omega_minus, omega_plus};
}

}  // namespace

std::optional<std::pair<ComplexMatrix, ComplexMatrix>> solve_omega_nullspace(
    const ComplexMatrix& e, const ComplexMatrix& f, std::mt19937_64& rng) {
    const Eigen::Index n = e.cols(), m = e.rows();
    const Eigen::Index dim = sym_params(n) + antisym_params(n) + 2 * sym_params(n);

    // real-linear constraint map, probed column by column
    const Eigen::Index out_dim = 4 * m * n;
    RealMatrix constraint(out_dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        RealVector basis = RealVector::Zero(dim);
        basis(k) = 1.0;
        const auto [om, op] = unpack_omega(basis, n);
        const ComplexMatrix coeff_a = e * om - f * op.adjoint();
        const ComplexMatrix coeff_adag = e * op - f * om.transpose();
        Eigen::Index at = 0;
        for (Eigen::Index i = 0; i < coeff_a.size(); ++i) {
            constraint(at++, k) = coeff_a(i).real();
            constraint(at++, k) = coeff_a(i).imag();
        }
        for (Eigen::Index i = 0; i < coeff_adag.size(); ++i) {
            constraint(at++, k) = coeff_adag(i).real();
            constraint(at++, k) = coeff_adag(i).imag();
        }
    }

    Eigen::BDCSVD<RealMatrix> svd(constraint, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    const double cut = sv.size() ? 1e-10 * std::max(1.0, sv(0)) : 0.0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;
    const Eigen::Index nullity = dim - rank;
    if (nullity == 0) return std::nullopt;

    RealVector coeffs(nullity);
    for (Eigen::Index i = 0; i < nullity; ++i) coeffs(i) = standard_normal(rng);
    RealVector v = svd.matrixV().rightCols(nullity) * coeffs;
    const double scale = v.cwiseAbs().maxCoeff();
    if (scale < 1e-12) return std::nullopt;
    v /= scale;
    return unpack_omega(v, n);
}

SystemParams make_qnd_interaction(Eigen::Index n, Eigen::Index m, std::mt19937_64& rng) {
    SystemParams p;
    // global phase on a real matrix keeps L self-adjoint and the channel
    // operators mutually commuting
    const double phi = 6.283185307179586 * uniform_unit(rng);
    p.coupling_minus =
        Complex(std::cos(phi), std::sin(phi)) * random_normal_matrix(m, n, rng).cast<Complex>();
    p.coupling_plus = p.coupling_minus.conjugate();
    const auto omega = solve_omega_nullspace(p.coupling_minus, p.coupling_plus, rng);
    if (omega) {
        p.omega_minus = omega->first;
        p.omega_plus = omega->second;
    } else {
        p.omega_minus = ComplexMatrix::Zero(n, n);
        p.omega_plus = ComplexMatrix::Zero(n, n);
    }
    p.scattering = ComplexMatrix::Identity(m, m);
    return p;
}

SystemParams make_siso_commuting(Eigen::Index n, int sign, std::mt19937_64& rng) {
    SystemParams p;
    p.coupling_minus = random_complex_matrix(1, n, rng);
    p.coupling_plus = random_complex_matrix(1, n, rng);
    const double s = static_cast<double>(sign);
    const ComplexMatrix e = p.coupling_minus + s * p.coupling_plus.conjugate();
    const ComplexMatrix f = p.coupling_plus + s * p.coupling_minus.conjugate();
    const auto omega = solve_omega_nullspace(e, f, rng);
    if (omega) {
        p.omega_minus = omega->first;
        p.omega_plus = omega->second;
    } else {
        p.omega_minus = ComplexMatrix::Zero(n, n);
        p.omega_plus = ComplexMatrix::Zero(n, n);
    }
    p.scattering = ComplexMatrix::Identity(1, 1);
    return p;
}

SystemParams make_siso_balanced(Eigen::Index n, std::mt19937_64& rng) {
    SystemParams p;
    p.coupling_minus = random_complex_matrix(1, n, rng);
    p.coupling_plus = p.coupling_minus;
    const ComplexMatrix e = p.coupling_minus + p.coupling_plus.conjugate();
    const auto omega = solve_omega_nullspace(e, e, rng);
    if (omega) {
        p.omega_minus = omega->first;
        p.omega_plus = omega->second;
    } else {
        p.omega_minus = ComplexMatrix::Zero(n, n);
        p.omega_plus = ComplexMatrix::Zero(n, n);
    }
    p.scattering = ComplexMatrix::Identity(1, 1);
    return p;
}

CoSubsystem make_commuting_co_subsystem(Eigen::Index n1, Eigen::Index m, bool force_q_bae,
                                        std::mt19937_64& rng) {
    RealMatrix re_gq = random_normal_matrix(m, n1, rng);
    RealMatrix re_gp = random_normal_matrix(m, n1, rng);
    const RealMatrix im_gq = random_normal_matrix(m, n1, rng);
    const RealMatrix im_gp = random_normal_matrix(m, n1, rng);
    if (force_q_bae) {
        // Re(G_q) Re(G_p)^T symmetric by construction
        const RealMatrix g = random_normal_matrix(n1, n1, rng);
        re_gp = re_gq * (0.5 * (g + g.transpose()));
    }

    const double s = std::sqrt(2.0);
    CoSubsystem sub;
    sub.c = RealMatrix(2 * m, 2 * n1);
    sub.c.topLeftCorner(m, n1) = s * re_gq;
    sub.c.topRightCorner(m, n1) = s * re_gp;
    sub.c.bottomLeftCorner(m, n1) = s * im_gq;
    sub.c.bottomRightCorner(m, n1) = s * im_gp;

    const RealMatrix jn = j_symplectic(n1), jm = j_symplectic(m);
    sub.b = jn * sub.c.transpose() * jm;

    // symmetric H with range inside ker(C J) makes the coupling commute
    // with the Hamiltonian while keeping the realization physical
    Eigen::BDCSVD<RealMatrix> svd(RealMatrix(sub.c * jn), Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-10 * std::max(1.0, sv(0))) ++rank;
    const Eigen::Index nullity = 2 * n1 - rank;
    RealMatrix h = RealMatrix::Zero(2 * n1, 2 * n1);
    if (nullity > 0) {
        const RealMatrix kernel = svd.matrixV().rightCols(nullity);
        const RealMatrix g = random_normal_matrix(nullity, nullity, rng);
        h = kernel * (0.5 * (g + g.transpose())) * kernel.transpose();
    }
    sub.a = jn * h + 0.5 * jn * sub.c.transpose() * jm * sub.c;
    return sub;
}

}  // namespace qlens::testing
