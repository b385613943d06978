#include "qlens/kalman.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace qlens {

namespace {

constexpr double kRankRel = 1e-9;

Eigen::Index svd_rank(const Eigen::VectorXd& sv) {
    if (sv.size() == 0) return 0;
    const double cut = kRankRel * sv(0);
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    return r;
}

RealMatrix stack_controllability(const RealMatrix& a, const RealMatrix& b) {
    const Eigen::Index d = a.rows(), m = b.cols();
    RealMatrix k(d, d * m);
    k.leftCols(m) = b;
    for (Eigen::Index i = 1; i < d; ++i)
        k.middleCols(i * m, m) = a * k.middleCols((i - 1) * m, m);
    return k;
}

}  // namespace

SubspaceBasis controllable_subspace(const RealMatrix& a, const RealMatrix& b) {
    if (a.rows() != a.cols() || b.rows() != a.rows())
        throw ShapeError("controllable_subspace: inconsistent shapes");
    const RealMatrix k = stack_controllability(a, b);
    Eigen::BDCSVD<RealMatrix> svd(k, Eigen::ComputeThinU);
    const Eigen::Index r = svd_rank(svd.singularValues());
    SubspaceBasis out{svd.matrixU().leftCols(r), SubspaceBasis::Kind::Controllable};

    // invariance sanity: A * range must stay inside the range
    if (r > 0) {
        const RealMatrix img = a * out.basis;
        const RealMatrix residual = img - out.basis * (out.basis.transpose() * img);
        if (max_abs(residual) > 1e-8 * (1.0 + max_abs(a)))
            throw NumericalError("controllable_subspace: basis not A-invariant");
    }
    return out;
}

SubspaceBasis unobservable_subspace(const RealMatrix& a, const RealMatrix& c) {
    if (a.rows() != a.cols() || c.cols() != a.rows())
        throw ShapeError("unobservable_subspace: inconsistent shapes");
    const Eigen::Index d = a.rows(), p = c.rows();
    RealMatrix obs(d * p, d);
    obs.topRows(p) = c;
    for (Eigen::Index i = 1; i < d; ++i)
        obs.middleRows(i * p, p) = obs.middleRows((i - 1) * p, p) * a;
    Eigen::BDCSVD<RealMatrix> svd(obs, Eigen::ComputeFullV);
    const Eigen::Index r = svd_rank(svd.singularValues());
    SubspaceBasis out{svd.matrixV().rightCols(d - r), SubspaceBasis::Kind::Unobservable};

    if (out.dim() > 0) {
        const RealMatrix img = a * out.basis;
        const RealMatrix residual = img - out.basis * (out.basis.transpose() * img);
        if (max_abs(residual) > 1e-8 * (1.0 + max_abs(a)))
            throw NumericalError("unobservable_subspace: basis not A-invariant");
    }
    return out;
}

bool pair_observable(const ComplexMatrix& m, const ComplexMatrix& c) {
    if (m.rows() != m.cols() || c.cols() != m.rows())
        throw ShapeError("pair_observable: inconsistent shapes");
    const Eigen::Index n = m.rows(), p = c.rows();
    ComplexMatrix obs(n * p, n);
    obs.topRows(p) = c;
    for (Eigen::Index i = 1; i < n; ++i)
        obs.middleRows(i * p, p) = obs.middleRows((i - 1) * p, p) * m;
    Eigen::BDCSVD<ComplexMatrix> svd(obs);
    return svd_rank(svd.singularValues()) == n;
}

RealMatrix subspace_intersection(const RealMatrix& u, const RealMatrix& w) {
    const Eigen::Index d = u.rows();
    if (w.rows() != d) throw ShapeError("subspace_intersection: ambient dimensions differ");
    if (u.cols() == 0 || w.cols() == 0) return RealMatrix(d, 0);
    // null space of [U, -W] gives coefficient pairs with U x = W y
    RealMatrix stacked(d, u.cols() + w.cols());
    stacked.leftCols(u.cols()) = u;
    stacked.rightCols(w.cols()) = -w;
    Eigen::BDCSVD<RealMatrix> svd(stacked, Eigen::ComputeFullV);
    const Eigen::Index rank = svd_rank(svd.singularValues());
    const Eigen::Index nullity = stacked.cols() - rank;
    if (nullity == 0) return RealMatrix(d, 0);
    const RealMatrix coeffs = svd.matrixV().rightCols(nullity).topRows(u.cols());
    const RealMatrix raw = u * coeffs;
    Eigen::BDCSVD<RealMatrix> orth(raw, Eigen::ComputeThinU);
    const Eigen::Index r = svd_rank(orth.singularValues());
    return orth.matrixU().leftCols(r);
}

SubsystemDimensions subsystem_dimensions(const RealMatrix& a, const RealMatrix& b,
                                         const RealMatrix& c) {
    const Eigen::Index dim = a.rows();
    const SubspaceBasis ctrl = controllable_subspace(a, b);
    const SubspaceBasis unobs = unobservable_subspace(a, c);
    const Eigen::Index r = ctrl.dim(), u = unobs.dim();

    if (r + u != dim)
        throw DomainError("subsystem_dimensions: not physically realizable "
                          "(controllable and unobservable dimensions do not pair up)");

    const Eigen::Index shared = subspace_intersection(ctrl.basis, unobs.basis).cols();
    const Eigen::Index co = r - shared;          // controllable and observable
    const Eigen::Index iso = u - shared;         // untouched by inputs and outputs
    if (co % 2 != 0 || iso % 2 != 0)
        throw DomainError("subsystem_dimensions: odd subsystem dimension");

    // the conjugately paired part contributes `shared` on each side
    return {co / 2, iso / 2, shared};
}

SubsystemDimensions subsystem_dimensions(const QuadratureRealization& r) {
    return subsystem_dimensions(r.A, r.B, r.C);
}

KalmanPartition make_partition(Eigen::Index n_co, Eigen::Index n_isolated, Eigen::Index n_paired,
                               Eigen::Index channels, RealMatrix a, RealMatrix b, RealMatrix c) {
    const Eigen::Index dim = 2 * (n_co + n_isolated + n_paired);
    if (a.rows() != dim || a.cols() != dim) throw ShapeError("partition: A must be 2n x 2n");
    if (b.rows() != dim || b.cols() != 2 * channels)
        throw ShapeError("partition: B must be 2n x 2m");
    if (c.rows() != 2 * channels || c.cols() != dim)
        throw ShapeError("partition: C must be 2m x 2n");
    return {n_co, n_isolated, n_paired, channels, std::move(a), std::move(b), std::move(c)};
}

RealMatrix KalmanPartition::a_co() const {
    return a.block(2 * n_paired, 2 * n_paired, 2 * n_co, 2 * n_co);
}

RealMatrix KalmanPartition::b_co() const {
    return b.middleRows(2 * n_paired, 2 * n_co);
}

RealMatrix KalmanPartition::c_co() const {
    return c.middleCols(2 * n_paired, 2 * n_co);
}

RealMatrix KalmanPartition::c_h() const {
    return c.middleCols(n_paired, n_paired);
}

KalmanFormVerdict verify_kalman_form(const KalmanPartition& p, double tol) {
    const Eigen::Index h = p.n_paired, co = 2 * p.n_co, iso = 2 * p.n_isolated;
    KalmanFormVerdict verdict{true, {}};
    auto check = [&](const std::string& name, const RealMatrix& block) {
        const double res = max_abs(block);
        verdict.residuals.push_back({name, res});
        if (res > tol) verdict.valid = false;
    };

    // rows: [q_h (h), p_h (h), x_co (co), x_iso (iso)]
    const Eigen::Index rq = 0, rp = h, rc = 2 * h, ri = 2 * h + co;
    check("A[p_h][q_h]", p.a.block(rp, rq, h, h));
    check("A[p_h][x_co]", p.a.block(rp, rc, h, co));
    check("A[p_h][x_iso]", p.a.block(rp, ri, h, iso));
    check("A[x_co][q_h]", p.a.block(rc, rq, co, h));
    check("A[x_co][x_iso]", p.a.block(rc, ri, co, iso));
    check("A[x_iso][q_h]", p.a.block(ri, rq, iso, h));
    check("B[p_h]", p.b.middleRows(rp, h));
    check("B[x_iso]", p.b.middleRows(ri, iso));
    check("C[q_h]", p.c.middleCols(rq, h));
    check("C[x_iso]", p.c.middleCols(ri, iso));
    return verdict;
}

RealMatrix commutation_coupling_residual(const KalmanPartition& p) {
    const Eigen::Index h = p.n_paired;
    if (h == 0) return RealMatrix::Zero(2 * p.channels, 0);
    const RealMatrix a_h22 = p.a.block(h, h, h, h);
    const RealMatrix a_12 = p.a.block(0, 2 * h, h, 2 * p.n_co);
    const RealMatrix b_h = p.b.topRows(h);
    if (p.n_co == 0) return RealMatrix(p.c_h() * a_h22);
    return p.c_h() * a_h22 + p.c_co() * j_symplectic(p.n_co) * a_12.transpose() +
           0.5 * p.c_co() * p.b_co() * j_symplectic(p.channels) * b_h.transpose();
}

KalmanBaeCriteria kalman_bae_criteria(const RealMatrix& c_co, const RealMatrix& b_co, double tol) {
    if (c_co.rows() % 2 != 0 || b_co.cols() % 2 != 0 || c_co.cols() != b_co.rows() ||
        c_co.rows() != b_co.cols())
        throw ShapeError("kalman_bae_criteria: C_co must be 2m x 2n1 and B_co its transpose shape");
    const Eigen::Index m = c_co.rows() / 2;
    const Eigen::Index n1 = c_co.cols() / 2;

    const RealMatrix cq = c_co.topRows(m), cp = c_co.bottomRows(m);
    const RealMatrix bq = b_co.leftCols(m), bp = b_co.rightCols(m);

    KalmanBaeCriteria out{};
    out.q_wrt_p_residual = max_abs(RealMatrix(cq * bp));
    out.p_wrt_q_residual = max_abs(RealMatrix(cp * bq));
    out.q_wrt_p = out.q_wrt_p_residual <= tol;
    out.p_wrt_q = out.p_wrt_q_residual <= tol;

    // C_co = sqrt(2) [[Re(G_q), Re(G_p)], [Im(G_q), Im(G_p)]]
    const double inv_s = 1.0 / std::sqrt(2.0);
    const RealMatrix re_gq = inv_s * cq.leftCols(n1), re_gp = inv_s * cq.rightCols(n1);
    const RealMatrix im_gq = inv_s * cp.leftCols(n1), im_gp = inv_s * cp.rightCols(n1);

    auto symmetry_defect = [](const RealMatrix& x) { return max_abs(RealMatrix(x - x.transpose())); };
    out.re_gamma_symmetry_residual = symmetry_defect(re_gq * re_gp.transpose());
    out.im_gamma_symmetry_residual = symmetry_defect(im_gq * im_gp.transpose());
    const RealMatrix re_prod =
        re_gq * re_gp.transpose() - im_gq * im_gp.transpose();  // Re(G_q G_p^T)
    out.re_gamma_product_symmetry_residual = symmetry_defect(re_prod);
    return out;
}

}  // namespace qlens
