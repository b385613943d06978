#include <doctest.h>

#include "qlens/qnd.hpp"
#include "qlens/rng.hpp"
#include "qlens/transfer.hpp"
#include "test_systems.hpp"

using namespace qlens;

namespace {

SystemParams frozen_position_probe() {
    SystemParams p;
    p.scattering = ComplexMatrix::Identity(1, 1);
    p.coupling_minus = ComplexMatrix(1, 2);
    p.coupling_minus << Complex(1, 0), Complex(0, 0);
    p.coupling_plus = ComplexMatrix::Zero(1, 2);
    p.omega_minus = ComplexMatrix::Zero(2, 2);
    p.omega_minus(1, 1) = 1.0;
    p.omega_plus = ComplexMatrix::Zero(2, 2);
    return p;
}

}  // namespace

TEST_SUITE("qnd") {

TEST_CASE("coupling-Hamiltonian commutator coefficients") {
    SUBCASE("zero Hamiltonian commutes with everything") {
        auto rng = make_engine(79);
        SystemParams p = random_system(3, 2, rng);
        p.omega_minus.setZero();
        p.omega_plus.setZero();
        const auto c = commutator_lh(p);
        CHECK(c.max_residual() == 0.0);
    }
    SUBCASE("passive probe with a decoupled oscillator commutes") {
        const auto c = commutator_lh(frozen_position_probe());
        CHECK(c.max_residual() == 0.0);
    }
    SUBCASE("generic parameters do not commute") {
        auto rng = make_engine(83);
        const auto c = commutator_lh(random_system(2, 2, rng));
        CHECK(c.max_residual() > 1e-3);
    }
}

TEST_CASE("the two interaction tests agree") {
    auto rng = make_engine(89);
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 3);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % 2);
        const SystemParams p =
            trial % 4 == 0 ? testing::make_qnd_interaction(n, m, rng) : random_system(n, m, rng);
        CHECK_NOTHROW(is_qnd_interaction(p));  // throws precisely on disagreement
    }
}

TEST_CASE("interaction commutation implies the conjugate commutation") {
    auto rng = make_engine(97);
    for (int trial = 0; trial < 50; ++trial) {
        const SystemParams p = testing::make_qnd_interaction(3, 2, rng);
        REQUIRE(is_qnd_interaction(p));
        CHECK(commutator_lconj_h(p).max_residual() < 1e-10);
        CHECK(commutator_quadrature_h(p, +1).max_residual() < 1e-10);
        CHECK(commutator_quadrature_h(p, -1).max_residual() < 1e-10);
    }
}

TEST_CASE("interferometer interaction does not commute") {
    CHECK(!is_qnd_interaction(testing::make_michelson()));
}

TEST_CASE("net gain of a single channel") {
    SystemParams p;
    p.scattering = ComplexMatrix::Identity(1, 1);
    p.omega_minus = ComplexMatrix::Zero(2, 2);
    p.omega_plus = ComplexMatrix::Zero(2, 2);

    p.coupling_minus = ComplexMatrix(1, 2);
    p.coupling_minus << Complex(std::sqrt(2.0), 0), Complex(0, 0);
    p.coupling_plus = ComplexMatrix(1, 2);
    p.coupling_plus << Complex(0, 0), Complex(1, 0);
    CHECK(siso_g(p) == doctest::Approx(1.0));

    p.coupling_plus = p.coupling_minus;
    CHECK(siso_g(p) == 0.0);

    p.coupling_minus.setZero();
    p.coupling_plus.setZero();
    p.coupling_plus(0, 0) = 1.0;
    CHECK(siso_g(p) == doctest::Approx(-1.0));

    p.coupling_minus = ComplexMatrix::Zero(2, 2);
    CHECK_THROWS_AS(siso_g(testing::make_michelson()), ShapeError);
}

TEST_CASE("interaction consequences") {
    SUBCASE("self-adjoint commuting coupling freezes the record") {
        auto rng = make_engine(101);
        const SystemParams p = testing::make_qnd_interaction(3, 2, rng);
        const auto rep = qnd_interaction_consequences(p);
        CHECK(rep.self_adjoint);
        CHECK(rep.mutually_commuting);
        CHECK(rep.transfer_is_feedthrough);
        CHECK(rep.dl_vanishes);
        CHECK(rep.markov_residual < 1e-10);
    }
    SUBCASE("commuting but not self-adjoint: drift survives, reported either way") {
        SystemParams p;
        p.scattering = ComplexMatrix::Identity(1, 1);
        p.coupling_minus = ComplexMatrix(1, 2);
        p.coupling_minus << Complex(1, 0), Complex(0.3, 0);
        p.coupling_plus = ComplexMatrix(1, 2);
        p.coupling_plus << Complex(0.2, 0), Complex(0.1, 0);
        p.omega_minus = ComplexMatrix::Zero(2, 2);
        p.omega_plus = ComplexMatrix::Zero(2, 2);
        REQUIRE(is_qnd_interaction(p));
        const auto rep = qnd_interaction_consequences(p);
        CHECK(!rep.self_adjoint);
        CHECK(!rep.dl_vanishes);
        CHECK(rep.markov_residual > 1e-3);
    }
    SUBCASE("zero coupling is trivially frozen") {
        auto rng = make_engine(103);
        SystemParams p;
        p.scattering = ComplexMatrix::Identity(1, 1);
        p.coupling_minus = ComplexMatrix::Zero(1, 2);
        p.coupling_plus = ComplexMatrix::Zero(1, 2);
        p.omega_minus = testing::random_hermitian(2, rng);
        p.omega_plus = ComplexMatrix::Zero(2, 2);
        const auto rep = qnd_interaction_consequences(p);
        CHECK(rep.transfer_is_feedthrough);
        CHECK(rep.dl_vanishes);
    }
    SUBCASE("non-commuting interaction is refused") {
        CHECK_THROWS_AS(qnd_interaction_consequences(testing::make_michelson()), HypothesisError);
    }
}

TEST_CASE("all four blocks of the transfer deviation vanish under the frozen interaction") {
    auto rng = make_engine(107);
    for (int trial = 0; trial < 25; ++trial) {
        const SystemParams p = testing::make_qnd_interaction(2, 2, rng);
        QuadratureRealization r = quadrature_realization(p);
        r.D.setZero();  // certify blocks of G - D
        for (const Quad out : {Quad::Q, Quad::P})
            for (const Quad in : {Quad::Q, Quad::P})
                CHECK(certify_zero_block(r, {out, in}, 1e-9).verdict);
    }
}

TEST_CASE("momentum closes on itself under momentum coupling with opposite blocks") {
    SystemParams p;
    p.scattering = ComplexMatrix::Identity(1, 1);
    p.coupling_minus = ComplexMatrix::Constant(1, 1, Complex(0, 1));
    p.coupling_plus = -p.coupling_minus;
    p.omega_minus = ComplexMatrix::Constant(1, 1, 0.7);
    p.omega_plus = ComplexMatrix::Constant(1, 1, -0.7);
    REQUIRE(is_qnd_interaction(p));

    const auto reports = qnd_characterize(p);
    REQUIRE(!reports.empty());
    CHECK(reports.front().target == QNDVariableReport::Target::P);
    CHECK(reports.front().uncontrollable);
    CHECK(reports.front().observable);
    CHECK(reports.front().is_qnd);

    // the momentum rows of the drift follow the closed form: frozen here
    const auto r = quadrature_realization(p);
    CHECK(max_abs(RealMatrix(r.A.bottomRows(1))) < 1e-14);
}

TEST_CASE("annihilation-only real coupling with equal blocks leaves no protected variable") {
    // every mode is read out, so despite the lower-triangular dynamics the
    // whole state stays controllable: evasion is feasible, protection is not
    SystemParams p;
    p.scattering = ComplexMatrix::Identity(2, 2);
    p.coupling_minus = ComplexMatrix(2, 2);
    p.coupling_minus << Complex(1, 0), Complex(0.2, 0), Complex(0.1, 0), Complex(0.8, 0);
    p.coupling_plus = ComplexMatrix::Zero(2, 2);
    ComplexMatrix shared(2, 2);
    shared << Complex(0.3, 0), Complex(0.1, 0), Complex(0.1, 0), Complex(0.2, 0);
    p.omega_minus = shared;
    p.omega_plus = shared;

    CHECK(qnd_characterize(p).empty());
}

TEST_CASE("general scan finds combination variables") {
    // frozen position coupling plus a decoupled oscillator: the scan reports
    // the frozen quadrature as an uncontrollable-yet-observable direction
    SystemParams p = frozen_position_probe();
    p.coupling_plus = p.coupling_minus;
    const auto reports = qnd_characterize(p);
    bool found = false;
    for (const auto& rep : reports) {
        if (rep.target != QNDVariableReport::Target::Combination) continue;
        if (std::abs(rep.coefficients(0)) > 0.9) found = true;  // q1 direction
        CHECK(rep.is_qnd);
    }
    CHECK(found);
}

}  // TEST_SUITE
