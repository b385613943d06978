#include <doctest.h>

#include "qlens/algebra.hpp"
#include "qlens/rng.hpp"

using namespace qlens;

TEST_SUITE("algebra") {

TEST_CASE("doubled identity blocks realize the identity") {
    const auto d = doubled_up(ComplexMatrix::Identity(2, 2), ComplexMatrix::Zero(2, 2));
    CHECK(max_abs(ComplexMatrix(d.full() - ComplexMatrix::Identity(4, 4))) == 0.0);
}

TEST_CASE("doubled product matches the brute-force full product") {
    auto rng = make_engine(42);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = doubled_up(random_complex_matrix(2, 2, rng), random_complex_matrix(2, 2, rng));
        const auto b = doubled_up(random_complex_matrix(2, 2, rng), random_complex_matrix(2, 2, rng));
        const ComplexMatrix brute = a.full() * b.full();
        CHECK(max_abs(ComplexMatrix((a * b).full() - brute)) < 1e-12 * (1.0 + max_abs(brute)));
    }
}

TEST_CASE("doubled michelson coupling realizes the interferometer block") {
    ComplexMatrix c(2, 2);
    const Complex z(0, 0.5);
    c << z, z, z, -z;
    const ComplexMatrix full = doubled_up(c, c).full();
    CHECK(full(0, 0) == z);
    CHECK(full(2, 0) == std::conj(z));
    CHECK(DoubledMatrix::is_doubled(full));
}

TEST_CASE("doubled closure under sum, product and flat adjoint") {
    auto rng = make_engine(7);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = doubled_up(random_complex_matrix(3, 3, rng), random_complex_matrix(3, 3, rng));
        const auto b = doubled_up(random_complex_matrix(3, 3, rng), random_complex_matrix(3, 3, rng));
        CHECK(DoubledMatrix::structure_residual((a + b).full()) == 0.0);
        CHECK(DoubledMatrix::structure_residual((a * b).full()) == 0.0);
        CHECK(DoubledMatrix::structure_residual(a.flat().full()) == 0.0);
        CHECK(max_abs(ComplexMatrix(a.flat().full() - flat_adjoint(a.full()))) < 1e-14);
    }
}

TEST_CASE("flat adjoint basics") {
    CHECK(max_abs(ComplexMatrix(flat_adjoint(ComplexMatrix::Identity(4, 4)) -
                                ComplexMatrix::Identity(4, 4))) == 0.0);

    auto rng = make_engine(3);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexMatrix a = random_complex_matrix(4, 4, rng);
        const ComplexMatrix b = random_complex_matrix(4, 2, rng);
        const ComplexMatrix lhs = flat_adjoint(ComplexMatrix(a * b));
        const ComplexMatrix rhs = flat_adjoint(b) * flat_adjoint(a);
        CHECK(max_abs(ComplexMatrix(lhs - rhs)) < 1e-12 * (1.0 + max_abs(lhs)));
        CHECK(max_abs(ComplexMatrix(flat_adjoint(flat_adjoint(a)) - a)) < 1e-14);

        const ComplexMatrix s = random_unitary(2, rng);
        const ComplexMatrix lhs2 = flat_adjoint(doubled_up(s, ComplexMatrix::Zero(2, 2)).full());
        const ComplexMatrix rhs2 = doubled_up(s.adjoint(), ComplexMatrix::Zero(2, 2)).full();
        CHECK(max_abs(ComplexMatrix(lhs2 - rhs2)) < 1e-14);
    }
}

TEST_CASE("flat and sharp adjoints are conjugate-linear") {
    auto rng = make_engine(5);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexMatrix a = random_complex_matrix(4, 4, rng);
        const ComplexMatrix b = random_complex_matrix(4, 4, rng);
        const Complex x1(standard_normal(rng), standard_normal(rng));
        const Complex x2(standard_normal(rng), standard_normal(rng));
        const ComplexMatrix lin = ComplexMatrix(x1 * a + x2 * b);
        CHECK(max_abs(ComplexMatrix(flat_adjoint(lin) - std::conj(x1) * flat_adjoint(a) -
                                    std::conj(x2) * flat_adjoint(b))) < 1e-12);
        CHECK(max_abs(ComplexMatrix(sharp_adjoint(lin) - std::conj(x1) * sharp_adjoint(a) -
                                    std::conj(x2) * sharp_adjoint(b))) < 1e-12);
    }
}

TEST_CASE("sharp adjoint basics") {
    CHECK(max_abs(ComplexMatrix(sharp_adjoint(ComplexMatrix::Identity(4, 4)) -
                                ComplexMatrix::Identity(4, 4))) == 0.0);
    auto rng = make_engine(9);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexMatrix x = random_complex_matrix(4, 4, rng);
        CHECK(max_abs(ComplexMatrix(sharp_adjoint(sharp_adjoint(x)) - x)) < 1e-14);
        const ComplexMatrix y = random_complex_matrix(4, 2, rng);
        CHECK(max_abs(ComplexMatrix(sharp_adjoint(ComplexMatrix(x * y)) -
                                    sharp_adjoint(y) * sharp_adjoint(x))) < 1e-12);
    }
}

TEST_CASE("sharp product of a real coupling block is block diagonal") {
    auto rng = make_engine(11);
    const RealMatrix cm = random_normal_matrix(2, 3, rng);
    const RealMatrix cp = random_normal_matrix(2, 3, rng);
    RealMatrix c(4, 6);
    c.setZero();
    c.topLeftCorner(2, 3) = cm + cp;
    c.bottomRightCorner(2, 3) = cm - cp;
    const ComplexMatrix prod = sharp_adjoint(c.cast<Complex>()) * c.cast<Complex>();
    RealMatrix expected = RealMatrix::Zero(6, 6);
    expected.topLeftCorner(3, 3) = (cm - cp).transpose() * (cm + cp);
    expected.bottomRightCorner(3, 3) = (cm + cp).transpose() * (cm - cp);
    CHECK(max_abs(ComplexMatrix(prod - expected.cast<Complex>())) < 1e-12);
}

TEST_CASE("quadrature transform values and unitarity") {
    const ComplexMatrix v1 = quad_transform(1);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(approx_equal(v1(0, 0), Complex(s, 0)));
    CHECK(approx_equal(v1(0, 1), Complex(s, 0)));
    CHECK(approx_equal(v1(1, 0), Complex(0, -s)));
    CHECK(approx_equal(v1(1, 1), Complex(0, s)));

    for (Eigen::Index n = 1; n <= 8; ++n) {
        const ComplexMatrix v = quad_transform(n);
        CHECK(max_abs(ComplexMatrix(v * v.adjoint() - ComplexMatrix::Identity(2 * n, 2 * n))) <
              1e-12);
    }
}

TEST_CASE("quadrature transform conjugates scattering to its rotation form") {
    auto rng = make_engine(13);
    for (int trial = 0; trial < 10; ++trial) {
        const ComplexMatrix s = random_unitary(3, rng);
        const ComplexMatrix v = quad_transform(3);
        const ComplexMatrix lhs = v * doubled_up(s, ComplexMatrix::Zero(3, 3)).full() * v.adjoint();
        RealMatrix expected(6, 6);
        expected.topLeftCorner(3, 3) = s.real();
        expected.topRightCorner(3, 3) = -s.imag();
        expected.bottomLeftCorner(3, 3) = s.imag();
        expected.bottomRightCorner(3, 3) = s.real();
        CHECK(max_abs(ComplexMatrix(lhs - expected.cast<Complex>())) < 1e-12);
    }
}

TEST_CASE("classification") {
    CHECK(classify(ComplexMatrix::Zero(2, 2)) == StructureClass::Zero);

    ComplexMatrix pauli_y(2, 2);
    pauli_y << Complex(0, 0), Complex(0, 1), Complex(0, -1), Complex(0, 0);
    CHECK(classify(pauli_y) == StructureClass::PurelyImaginary);

    ComplexMatrix mixed(2, 2);
    mixed << Complex(1, 0), Complex(0, 1), Complex(0, 0), Complex(0, 0);
    CHECK(classify(mixed) == StructureClass::Neither);

    // scaling by positive reals leaves the class unchanged
    auto rng = make_engine(17);
    for (int trial = 0; trial < 25; ++trial) {
        ComplexMatrix x = random_complex_matrix(3, 3, rng);
        if (trial % 3 == 0) x.imag().setZero();
        if (trial % 3 == 1) x.real().setZero();
        const double factor = std::exp(3.0 * standard_normal(rng));
        CHECK(classify(x) == classify(ComplexMatrix(factor * x)));
    }

    CHECK(passes_real(StructureClass::Zero));
    CHECK(passes_imaginary(StructureClass::Zero));
    CHECK(!passes_real(StructureClass::PurelyImaginary));
}

TEST_CASE("shape errors") {
    CHECK_THROWS_AS(doubled_up(ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 3)), ShapeError);
    CHECK_THROWS_AS(flat_adjoint(ComplexMatrix::Zero(3, 3)), ShapeError);
    CHECK_THROWS_AS(sharp_adjoint(ComplexMatrix::Zero(2, 3)), ShapeError);
}

}  // TEST_SUITE
