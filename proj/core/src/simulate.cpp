#include "qlens/simulate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "qlens/qnd.hpp"
#include "qlens/rng.hpp"

namespace qlens {

namespace {

constexpr double kVacuumCov = 0.5;

double inf_norm(const RealMatrix& a) {
    if (a.size() == 0) return 0.0;
    return a.cwiseAbs().rowwise().sum().maxCoeff();
}

RealVector input_at(const RealMatrix& injected, Eigen::Index step, Eigen::Index width) {
    if (injected.size() == 0) return RealVector::Zero(width);
    return injected.row(std::min<Eigen::Index>(step, injected.rows() - 1)).transpose();
}

void check_finite(const RealMatrix& m, const char* who) {
    if (!m.allFinite() || max_abs(m) > 1e12)
        throw DomainError(std::string(who) + ": step instability, reduce dt");
}

struct FilterOperators {
    RealMatrix c_meas;    // m x 2n, position rows of C
    RealMatrix d_meas;    // m x 2m
    RealMatrix process_noise;      // (1/2) B B^T
    RealMatrix meas_noise;         // (1/2) D_q D_q^T
    RealMatrix cross_noise;        // (1/2) B D_q^T
    RealMatrix meas_noise_inv;
    RealMatrix whitener;  // R^{-1/2}
};

FilterOperators make_filter_operators(const QuadratureRealization& r) {
    const Eigen::Index m = r.num_channels();
    FilterOperators ops;
    ops.c_meas = r.C.topRows(m);
    ops.d_meas = r.D.topRows(m);
    ops.process_noise = kVacuumCov * r.B * r.B.transpose();
    ops.meas_noise = kVacuumCov * ops.d_meas * ops.d_meas.transpose();
    ops.cross_noise = kVacuumCov * r.B * ops.d_meas.transpose();

    Eigen::SelfAdjointEigenSolver<RealMatrix> es(ops.meas_noise);
    if (es.eigenvalues().minCoeff() < 1e-12)
        throw DomainError("gaussian_filter: measurement-noise matrix not invertible");
    ops.meas_noise_inv = es.operatorInverseSqrt() * es.operatorInverseSqrt();
    ops.whitener = es.operatorInverseSqrt();
    return ops;
}

}  // namespace

TimeGrid resolve_grid(const QuadratureRealization& r, const SimConfig& cfg) {
    double dt = cfg.dt;
    if (dt <= 0.0) dt = 1e-3 / std::max(1.0, inf_norm(r.A));
    if (cfg.horizon < dt) throw DomainError("sim config: horizon must cover at least one step");
    const int steps = static_cast<int>(std::llround(cfg.horizon / dt));
    return {dt, std::max(steps, 1)};
}

MomentFlow moment_flow(const QuadratureRealization& r, const SimConfig& cfg) {
    const auto [dt, steps] = resolve_grid(r, cfg);
    const Eigen::Index dim = r.A.rows(), width = r.B.cols();
    if (cfg.injected_mean.size() != 0 && cfg.injected_mean.cols() != width)
        throw ShapeError("moment_flow: injected mean must have 2m columns");

    MomentFlow out;
    out.times.resize(steps + 1);
    out.means.resize(steps + 1, dim);
    out.output_means.resize(steps + 1, r.C.rows());
    out.covariances.reserve(steps + 1);

    RealVector mean = cfg.x0_mean.size() ? cfg.x0_mean : RealVector::Zero(dim);
    if (mean.size() != dim) throw ShapeError("moment_flow: x0 mean length mismatch");
    RealMatrix cov = kVacuumCov * RealMatrix::Identity(dim, dim);
    const RealMatrix noise = kVacuumCov * r.B * r.B.transpose();

    auto mean_rate = [&](const RealVector& x, const RealVector& u) -> RealVector {
        return r.A * x + r.B * u;
    };
    auto cov_rate = [&](const RealMatrix& p) -> RealMatrix {
        return r.A * p + p * r.A.transpose() + noise;
    };

    for (int k = 0; k <= steps; ++k) {
        out.times(k) = k * dt;
        out.means.row(k) = mean.transpose();
        out.covariances.push_back(cov);
        const RealVector u_k = input_at(cfg.injected_mean, k, width);
        out.output_means.row(k) = (r.C * mean + r.D * u_k).transpose();
        if (k == steps) break;

        const RealVector u_next = input_at(cfg.injected_mean, k + 1, width);
        const RealVector u_half = 0.5 * (u_k + u_next);

        const RealVector k1 = mean_rate(mean, u_k);
        const RealVector k2 = mean_rate(mean + 0.5 * dt * k1, u_half);
        const RealVector k3 = mean_rate(mean + 0.5 * dt * k2, u_half);
        const RealVector k4 = mean_rate(mean + dt * k3, u_next);
        mean += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        const RealMatrix p1 = cov_rate(cov);
        const RealMatrix p2 = cov_rate(cov + 0.5 * dt * p1);
        const RealMatrix p3 = cov_rate(cov + 0.5 * dt * p2);
        const RealMatrix p4 = cov_rate(cov + dt * p3);
        cov += (dt / 6.0) * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
        check_finite(cov, "moment_flow");
    }
    return out;
}

TrajectoryRecords stochastic_trajectories(const QuadratureRealization& r, const SimConfig& cfg) {
    const auto [dt, steps] = resolve_grid(r, cfg);
    const Eigen::Index dim = r.A.rows(), width = r.B.cols(), out_dim = r.C.rows();
    if (cfg.ensemble < 1) throw DomainError("sim config: ensemble must be positive");

    TrajectoryRecords rec;
    rec.dt = dt;
    rec.times.resize(steps + 1);
    for (int k = 0; k <= steps; ++k) rec.times(k) = k * dt;
    rec.outputs.reserve(cfg.ensemble);

    const RealVector x0_mean = cfg.x0_mean.size() ? cfg.x0_mean : RealVector::Zero(dim);
    if (x0_mean.size() != dim) throw ShapeError("stochastic_trajectories: x0 mean length mismatch");
    const double x0_sd = std::sqrt(kVacuumCov);
    const double noise_sd = std::sqrt(kVacuumCov * dt);

    for (int traj = 0; traj < cfg.ensemble; ++traj) {
        std::mt19937_64 rng = make_engine(cfg.seed, static_cast<std::uint64_t>(traj));
        RealVector x(dim);
        for (Eigen::Index i = 0; i < dim; ++i) x(i) = x0_mean(i) + x0_sd * standard_normal(rng);

        RealMatrix y = RealMatrix::Zero(steps + 1, out_dim);
        RealVector y_acc = RealVector::Zero(out_dim);
        for (int k = 0; k < steps; ++k) {
            RealVector du = input_at(cfg.injected_mean, k, width) * dt;
            for (Eigen::Index i = 0; i < width; ++i) du(i) += noise_sd * standard_normal(rng);
            y_acc += r.C * x * dt + r.D * du;
            x += r.A * x * dt + r.B * du;
            y.row(k + 1) = y_acc.transpose();
        }
        check_finite(y, "stochastic_trajectories");
        rec.outputs.push_back(std::move(y));
    }
    return rec;
}

namespace {

// One Riccati sweep shared by the filter entry points. Returns gains per
// step and tracks the uncertainty-compatibility of the solution.
struct RiccatiFlow {
    std::vector<RealMatrix> cov;
    std::vector<RealMatrix> gain;  // K_k dt applied to raw innovations
    double min_uncertainty_eig;
};

RiccatiFlow riccati_flow(const QuadratureRealization& r, const FilterOperators& ops, double dt,
                         int steps, bool store_cov) {
    const Eigen::Index dim = r.A.rows();
    const Eigen::Index n = r.num_modes();
    RealMatrix cov = kVacuumCov * RealMatrix::Identity(dim, dim);

    ComplexMatrix half_comm = ComplexMatrix::Zero(dim, dim);
    half_comm.imag() = 0.5 * j_symplectic(n);

    auto rate = [&](const RealMatrix& p) -> RealMatrix {
        const RealMatrix kmat = (p * ops.c_meas.transpose() + ops.cross_noise) * ops.meas_noise_inv;
        return r.A * p + p * r.A.transpose() + ops.process_noise -
               kmat * (p * ops.c_meas.transpose() + ops.cross_noise).transpose();
    };

    RiccatiFlow flow;
    flow.min_uncertainty_eig = std::numeric_limits<double>::infinity();
    flow.gain.reserve(steps);
    if (store_cov) flow.cov.reserve(steps + 1);

    for (int k = 0; k <= steps; ++k) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(cov.cast<Complex>() + half_comm);
        flow.min_uncertainty_eig = std::min(flow.min_uncertainty_eig, es.eigenvalues().minCoeff());
        if (store_cov) flow.cov.push_back(cov);
        if (k == steps) break;

        flow.gain.push_back((cov * ops.c_meas.transpose() + ops.cross_noise) * ops.meas_noise_inv);

        const RealMatrix p1 = rate(cov);
        const RealMatrix p2 = rate(cov + 0.5 * dt * p1);
        const RealMatrix p3 = rate(cov + 0.5 * dt * p2);
        const RealMatrix p4 = rate(cov + dt * p3);
        cov += (dt / 6.0) * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
        cov = 0.5 * (cov + cov.transpose()).eval();
        check_finite(cov, "riccati");
    }
    return flow;
}

}  // namespace

FilterEnsemble gaussian_filter(const QuadratureRealization& r, const TrajectoryRecords& records,
                               const SimConfig& cfg) {
    const Eigen::Index dim = r.A.rows(), width = r.B.cols(), m = r.num_channels();
    const int steps = static_cast<int>(records.times.size()) - 1;
    const double dt = records.dt;
    const FilterOperators ops = make_filter_operators(r);
    const RiccatiFlow flow = riccati_flow(r, ops, dt, steps, true);

    FilterEnsemble out;
    out.times = records.times;
    out.conditional_cov = flow.cov;
    out.min_uncertainty_eig = flow.min_uncertainty_eig;
    out.uncertainty_ok = flow.min_uncertainty_eig >= -1e-8;

    const RealVector m0 = cfg.x0_mean.size() ? cfg.x0_mean : RealVector::Zero(dim);
    const double sqrt_dt = std::sqrt(dt);

    for (const RealMatrix& y : records.outputs) {
        RealVector mean = m0;
        RealMatrix means(steps + 1, dim);
        RealMatrix innov(steps, m);
        means.row(0) = mean.transpose();
        for (int k = 0; k < steps; ++k) {
            const RealVector u_k = input_at(cfg.injected_mean, k, width);
            const RealVector dy_meas =
                (y.row(k + 1) - y.row(k)).transpose().head(m);
            const RealVector predicted = (ops.c_meas * mean + ops.d_meas * u_k) * dt;
            const RealVector raw_innov = dy_meas - predicted;
            innov.row(k) = (ops.whitener * raw_innov / sqrt_dt).transpose();
            mean += (r.A * mean + r.B * u_k) * dt + flow.gain[k] * raw_innov;
            means.row(k + 1) = mean.transpose();
        }
        check_finite(means, "gaussian_filter");
        out.conditional_means.push_back(std::move(means));
        out.innovations.push_back(std::move(innov));
    }
    return out;
}

WhitenessReport innovation_whiteness(const FilterEnsemble& f, int max_lag) {
    WhitenessReport rep{0.0, 0.0, 0.0, true};
    if (f.innovations.empty()) return rep;
    const Eigen::Index m = f.innovations.front().cols();

    for (Eigen::Index ch = 0; ch < m; ++ch) {
        // pool the channel across the ensemble
        Eigen::Index total = 0;
        for (const auto& z : f.innovations) total += z.rows();
        RealVector pooled(total);
        Eigen::Index at = 0;
        for (const auto& z : f.innovations) {
            pooled.segment(at, z.rows()) = z.col(ch);
            at += z.rows();
        }
        const double n = static_cast<double>(total);
        const double mean = pooled.mean();
        const double var = (pooled.array() - mean).square().sum() / (n - 1.0);
        rep.max_mean_sigma = std::max(rep.max_mean_sigma, std::abs(mean) / (1.0 / std::sqrt(n)));
        rep.max_var_dev_sigma =
            std::max(rep.max_var_dev_sigma, std::abs(var - 1.0) / std::sqrt(2.0 / n));

        for (int lag = 1; lag <= max_lag; ++lag) {
            double acc = 0.0;
            double count = 0.0;
            for (const auto& z : f.innovations) {
                const Eigen::Index len = z.rows();
                if (len <= lag) continue;
                for (Eigen::Index k = 0; k + lag < len; ++k)
                    acc += (z(k, ch) - mean) * (z(k + lag, ch) - mean);
                count += static_cast<double>(len - lag);
            }
            if (count > 0) {
                const double rho = acc / count / var;
                rep.max_autocorr_sigma =
                    std::max(rep.max_autocorr_sigma, std::abs(rho) * std::sqrt(count));
            }
        }
    }
    rep.pass = rep.max_mean_sigma <= 3.0 && rep.max_var_dev_sigma <= 3.0 &&
               rep.max_autocorr_sigma <= 3.0;
    return rep;
}

MartingaleReport martingale_check(const SystemParams& params, const SimConfig& cfg, bool enforce) {
    const double self_adjoint_res =
        max_abs(ComplexMatrix(params.coupling_minus - params.coupling_plus.conjugate()));
    if (enforce) {
        if (!is_qnd_interaction(params))
            throw HypothesisError("martingale_check: coupling does not commute with the Hamiltonian",
                                  commutator_lh(params).max_residual());
        if (self_adjoint_res > 1e-8)
            throw HypothesisError("martingale_check: coupling operator not self-adjoint",
                                  self_adjoint_res);
    }

    const QuadratureRealization r = quadrature_realization(params);
    const auto [dt, steps] = resolve_grid(r, cfg);
    const Eigen::Index dim = r.A.rows(), width = r.B.cols(), m = r.num_channels();
    const auto [lambda_q, lambda_p] = coupling_rows(params);
    RealMatrix lambda(m, dim);
    lambda << lambda_q.real(), lambda_p.real();

    const FilterOperators ops = make_filter_operators(r);
    const RiccatiFlow flow = riccati_flow(r, ops, dt, steps, false);

    RealVector m0 = cfg.x0_mean;
    if (m0.size() == 0) m0 = RealVector::Constant(dim, 0.5);
    if (m0.size() != dim) throw ShapeError("martingale_check: x0 mean length mismatch");

    const double x0_sd = std::sqrt(kVacuumCov);
    const double noise_sd = std::sqrt(kVacuumCov * dt);
    const RealVector initial = lambda * m0;

    RealMatrix finals(cfg.ensemble, m);
    for (int traj = 0; traj < cfg.ensemble; ++traj) {
        std::mt19937_64 rng = make_engine(cfg.seed, static_cast<std::uint64_t>(traj));
        RealVector x(dim);
        for (Eigen::Index i = 0; i < dim; ++i) x(i) = m0(i) + x0_sd * standard_normal(rng);
        RealVector mean = m0;
        for (int k = 0; k < steps; ++k) {
            RealVector du = input_at(cfg.injected_mean, k, width) * dt;
            for (Eigen::Index i = 0; i < width; ++i) du(i) += noise_sd * standard_normal(rng);
            const RealVector dy = (ops.c_meas * x) * dt + ops.d_meas * du;
            const RealVector u_k = input_at(cfg.injected_mean, k, width);
            const RealVector raw_innov = dy - (ops.c_meas * mean + ops.d_meas * u_k) * dt;
            mean += (r.A * mean + r.B * u_k) * dt + flow.gain[k] * raw_innov;
            x += r.A * x * dt + r.B * du;
        }
        check_finite(mean, "martingale_check");
        finals.row(traj) = (lambda * mean).transpose();
    }

    MartingaleReport rep;
    rep.pass = true;
    const double ens = static_cast<double>(cfg.ensemble);
    for (Eigen::Index ch = 0; ch < m; ++ch) {
        MartingaleReport::Channel c{};
        c.initial_mean = initial(ch);
        c.final_mean = finals.col(ch).mean();
        const double sd =
            std::sqrt((finals.col(ch).array() - c.final_mean).square().sum() / (ens - 1.0));
        c.standard_error = sd / std::sqrt(ens);
        c.zscore = c.standard_error > 0
                       ? std::abs(c.final_mean - c.initial_mean) / c.standard_error
                       : (std::abs(c.final_mean - c.initial_mean) > 1e-12 ? 1e9 : 0.0);
        c.pass = c.zscore <= 3.0;
        rep.pass = rep.pass && c.pass;
        rep.channels.push_back(c);
    }
    return rep;
}

double injection_bae_test(const QuadratureRealization& r, Quad in_block, Quad out_block,
                          const RealMatrix& signal, const SimConfig& cfg) {
    const Eigen::Index m = r.num_channels();
    const auto [dt, steps] = resolve_grid(r, cfg);
    (void)dt;
    if (signal.size() != 0 && signal.cols() != m)
        throw ShapeError("injection_bae_test: signal needs one column per channel");

    SimConfig base = cfg;
    base.injected_mean = RealMatrix();
    SimConfig driven = cfg;
    driven.injected_mean = RealMatrix::Zero(steps + 1, 2 * m);
    const Eigen::Index col0 = in_block == Quad::Q ? 0 : m;
    for (int k = 0; k <= steps; ++k) {
        if (signal.size() == 0) break;
        const Eigen::Index row = std::min<Eigen::Index>(k, signal.rows() - 1);
        driven.injected_mean.block(k, col0, 1, m) = signal.row(row);
    }

    const MomentFlow quiet = moment_flow(r, base);
    const MomentFlow excited = moment_flow(r, driven);

    const Eigen::Index row0 = out_block == Quad::Q ? 0 : m;
    double deviation = 0.0;
    for (Eigen::Index k = 0; k < quiet.output_means.rows(); ++k) {
        const RealVector diff = (excited.output_means.row(k) - quiet.output_means.row(k))
                                    .segment(row0, m)
                                    .transpose();
        deviation = std::max(deviation, diff.cwiseAbs().maxCoeff());
    }
    return deviation;
}

}  // namespace qlens
