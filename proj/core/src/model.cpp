#include "qlens/model.hpp"

#include <cmath>

#include "qlens/rng.hpp"

namespace qlens {

ComplexMatrix SystemParams::omega_full() const {
    return doubled_up(omega_minus, omega_plus).full();
}

namespace {

void check_shapes(const SystemParams& p) {
    const Eigen::Index n = p.omega_minus.rows();
    const Eigen::Index m = p.coupling_minus.rows();
    if (p.omega_minus.cols() != n) throw ShapeError("Omega_minus must be square");
    if (p.omega_plus.rows() != n || p.omega_plus.cols() != n)
        throw ShapeError("Omega_plus must be n x n");
    if (p.coupling_minus.cols() != n) throw ShapeError("C_minus must be m x n");
    if (p.coupling_plus.rows() != m || p.coupling_plus.cols() != n)
        throw ShapeError("C_plus must be m x n");
    if (p.scattering.rows() != m || p.scattering.cols() != m)
        throw ShapeError("S must be m x m");
    if (n < 1 || m < 1) throw ShapeError("system needs at least one mode and one channel");
}

}  // namespace

std::vector<Violation> validate(const SystemParams& p, double tol) {
    check_shapes(p);
    std::vector<Violation> out;
    const Eigen::Index m = p.num_channels();

    const double unit_res = max_abs(ComplexMatrix(p.scattering * p.scattering.adjoint() -
                                                   ComplexMatrix::Identity(m, m)));
    if (unit_res > tol * (1.0 + max_abs(p.scattering)))
        out.push_back({"S", "not unitary", unit_res});

    const double herm_res = max_abs(ComplexMatrix(p.omega_minus - p.omega_minus.adjoint()));
    if (herm_res > tol * (1.0 + max_abs(p.omega_minus)))
        out.push_back({"Omega_minus", "not Hermitian", herm_res});

    const double sym_res = max_abs(ComplexMatrix(p.omega_plus - p.omega_plus.transpose()));
    if (sym_res > tol * (1.0 + max_abs(p.omega_plus)))
        out.push_back({"Omega_plus", "not symmetric", sym_res});

    return out;
}

void require_valid(const SystemParams& p, double tol) {
    const auto report = validate(p, tol);
    if (report.empty()) return;
    std::string msg = "invalid system parameters:";
    for (const auto& v : report) msg += " [" + v.field + " " + v.what + "]";
    throw DomainError(msg);
}

AnnihilationRealization annihilation_realization(const SystemParams& p) {
    require_valid(p);
    const Eigen::Index n = p.num_modes();

    AnnihilationRealization r;
    r.C = doubled_up(p.coupling_minus, p.coupling_plus).full();
    r.D = doubled_up(p.scattering, ComplexMatrix::Zero(p.num_channels(), p.num_channels())).full();
    const ComplexMatrix c_flat = flat_adjoint(r.C);
    r.B = -c_flat * r.D;
    r.A = Complex(0, -1) * j_diag(n) * p.omega_full() - 0.5 * c_flat * r.C;
    return r;
}

namespace {

// The four real block formulas of the quadrature realization. The sharp-
// adjoint product C^sharp C is expanded in C_-, C_+ products; the cross
// blocks are fixed against direct conjugation (see quadrature_realization's
// two-route check and the unit tests).
struct QuadBlocks {
    RealMatrix a, b, c, d;
};

QuadBlocks quadrature_block_formulas(const SystemParams& p) {
    const Eigen::Index n = p.num_modes(), m = p.num_channels();
    const ComplexMatrix& cm = p.coupling_minus;
    const ComplexMatrix& cp = p.coupling_plus;
    const ComplexMatrix& om = p.omega_minus;
    const ComplexMatrix& op = p.omega_plus;

    QuadBlocks q;

    q.d.resize(2 * m, 2 * m);
    q.d.topLeftCorner(m, m) = p.scattering.real();
    q.d.topRightCorner(m, m) = -p.scattering.imag();
    q.d.bottomLeftCorner(m, m) = p.scattering.imag();
    q.d.bottomRightCorner(m, m) = p.scattering.real();

    q.c.resize(2 * m, 2 * n);
    q.c.topLeftCorner(m, n) = (cm + cp).real();
    q.c.topRightCorner(m, n) = -(cm - cp).imag();
    q.c.bottomLeftCorner(m, n) = (cm + cp).imag();
    q.c.bottomRightCorner(m, n) = (cm - cp).real();

    RealMatrix bfac(2 * n, 2 * m);
    const ComplexMatrix cmd = cm.adjoint(), cpd = cp.adjoint();
    bfac.topLeftCorner(n, m) = (cmd - cpd).real();
    bfac.topRightCorner(n, m) = -(cmd - cpd).imag();
    bfac.bottomLeftCorner(n, m) = (cmd + cpd).imag();
    bfac.bottomRightCorner(n, m) = (cmd + cpd).real();
    q.b = -bfac * q.d;

    RealMatrix jh(2 * n, 2 * n);
    jh.topLeftCorner(n, n) = (om + op).imag();
    jh.topRightCorner(n, n) = (om - op).real();
    jh.bottomLeftCorner(n, n) = -(om + op).real();
    jh.bottomRightCorner(n, n) = (om - op).imag();

    const ComplexMatrix g1 = cmd * cm;
    const ComplexMatrix g2 = cpd * cp;
    const ComplexMatrix g3 = cmd * cp;
    const ComplexMatrix g4 = cp.transpose() * cm.conjugate();
    RealMatrix csc(2 * n, 2 * n);
    csc.topLeftCorner(n, n) = (g1 - g2 + g3 - g4).real();
    csc.topRightCorner(n, n) = -(g1 + g2 - g3 + g4).imag();
    csc.bottomLeftCorner(n, n) = (g1 + g2 + g3 - g4).imag();
    csc.bottomRightCorner(n, n) = (g1 - g2 - g3 + g4).real();

    q.a = jh - 0.5 * csc;
    return q;
}

}  // namespace

QuadratureRealization quadrature_realization(const SystemParams& p) {
    const AnnihilationRealization ann = annihilation_realization(p);
    const QuadBlocks direct = quadrature_block_formulas(p);

    const Eigen::Index n = p.num_modes(), m = p.num_channels();
    const ComplexMatrix vn = quad_transform(n);
    const ComplexMatrix vm = quad_transform(m);

    const ComplexMatrix a2 = vn * ann.A * vn.adjoint();
    const ComplexMatrix b2 = vn * ann.B * vm.adjoint();
    const ComplexMatrix c2 = vm * ann.C * vn.adjoint();
    const ComplexMatrix d2 = vm * ann.D * vm.adjoint();

    const double imag_residue =
        std::max(std::max(max_abs(RealMatrix(a2.imag())), max_abs(RealMatrix(b2.imag()))),
                 std::max(max_abs(RealMatrix(c2.imag())), max_abs(RealMatrix(d2.imag()))));

    double route_gap = max_abs(RealMatrix(direct.a - a2.real()));
    route_gap = std::max(route_gap, max_abs(RealMatrix(direct.b - b2.real())));
    route_gap = std::max(route_gap, max_abs(RealMatrix(direct.c - c2.real())));
    route_gap = std::max(route_gap, max_abs(RealMatrix(direct.d - d2.real())));

    const double scale = 1.0 + std::max(max_abs(direct.a), max_abs(direct.b));
    if (imag_residue > 1e-10 * scale || route_gap > 1e-10 * scale)
        throw NumericalError("quadrature_realization: block formulas and conjugation route disagree (gap " +
                             std::to_string(std::max(route_gap, imag_residue)) + ")");

    return {direct.a, direct.b, direct.c, direct.d};
}

std::pair<ComplexMatrix, ComplexMatrix> coupling_rows(const SystemParams& p) {
    check_shapes(p);
    const double s = 1.0 / std::sqrt(2.0);
    return {s * (p.coupling_minus + p.coupling_plus),
            Complex(0, 1) * s * (p.coupling_minus - p.coupling_plus)};
}

double realizability_residual(const AnnihilationRealization& r) {
    return max_abs(ComplexMatrix(r.A + flat_adjoint(r.A) + r.B * flat_adjoint(r.B)));
}

double realizability_residual(const QuadratureRealization& r) {
    const RealMatrix jn = j_symplectic(r.num_modes());
    const RealMatrix jm = j_symplectic(r.num_channels());
    return max_abs(RealMatrix(r.A * jn + jn * r.A.transpose() + r.B * jm * r.B.transpose()));
}

SystemParams random_system(Eigen::Index n, Eigen::Index m, std::mt19937_64& rng) {
    SystemParams p;
    const ComplexMatrix g = random_complex_matrix(n, n, rng);
    const ComplexMatrix f = random_complex_matrix(n, n, rng);
    p.omega_minus = 0.5 * (g + g.adjoint());
    p.omega_plus = 0.5 * (f + f.transpose());
    p.coupling_minus = random_complex_matrix(m, n, rng);
    p.coupling_plus = random_complex_matrix(m, n, rng);
    p.scattering = random_unitary(m, rng);
    return p;
}

}  // namespace qlens
