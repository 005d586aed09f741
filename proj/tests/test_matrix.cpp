#include "doctest.h"

#include <cmath>

#include "centershift/errors.hpp"
#include "centershift/matrix.hpp"
#include "centershift/rng.hpp"

using namespace centershift;

TEST_CASE("matmul identity leaves any 2x2 matrix unchanged") {
    Matrix2D eye(2, 2);
    eye(0, 0) = 1.0;
    eye(1, 1) = 1.0;
    Matrix2D m(2, 2);
    m(0, 0) = 3.5; m(0, 1) = -2.0;
    m(1, 0) = 0.25; m(1, 1) = 7.0;
    const Matrix2D out = matmul(eye, m);
    for (std::size_t i = 0; i < 4; ++i) CHECK(out.data[i] == m.data[i]);
}

TEST_CASE("matmul hand-evaluated product") {
    Matrix2D a(2, 2);
    a(0, 0) = 1; a(0, 1) = 2;
    a(1, 0) = 3; a(1, 1) = 4;
    Matrix2D b(2, 1, 1.0);
    const Matrix2D out = matmul(a, b);
    CHECK(out.rows == 2);
    CHECK(out.cols == 1);
    CHECK(out(0, 0) == doctest::Approx(3.0));
    CHECK(out(1, 0) == doctest::Approx(7.0));
}

TEST_CASE("matmul by zero matrix gives zeros") {
    Matrix2D zero(3, 2, 0.0);
    Matrix2D m(2, 4, 1.5);
    const Matrix2D out = matmul(zero, m);
    for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("matmul rejects mismatched dims") {
    CHECK_THROWS_AS(matmul(Matrix2D(2, 3), Matrix2D(4, 2)), config_error);
}

TEST_CASE("matmul_nt agrees with matmul of the transpose") {
    Rng rng(7);
    Matrix2D a(3, 4);
    Matrix2D b(5, 4);
    for (double& v : a.data) v = rng.normal();
    for (double& v : b.data) v = rng.normal();
    const Matrix2D direct = matmul_nt(a, b);
    const Matrix2D reference = matmul(a, transpose(b));
    REQUIRE(same_shape(direct, reference));
    for (std::size_t i = 0; i < direct.data.size(); ++i) {
        CHECK(direct.data[i] == doctest::Approx(reference.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("squared_euclidean basics") {
    const std::vector<double> a{0.0, 0.0};
    const std::vector<double> b{3.0, 4.0};
    CHECK(squared_euclidean(a, a) == 0.0);
    CHECK(squared_euclidean(a, b) == doctest::Approx(25.0));
    CHECK_THROWS_AS(squared_euclidean(a, std::vector<double>{1.0}), config_error);
}

TEST_CASE("squared_euclidean is symmetric and non-negative on random vectors") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(6), b(6);
        for (double& v : a) v = rng.normal(0.0, 2.0);
        for (double& v : b) v = rng.normal(0.0, 2.0);
        const double ab = squared_euclidean(a, b);
        CHECK(ab >= 0.0);
        CHECK(ab == squared_euclidean(b, a));
    }
}

TEST_CASE("rectifier clamps negatives only") {
    CHECK(rectifier(-0.5) == 0.0);
    CHECK(rectifier(0.0) == 0.0);
    CHECK(rectifier(1.1) == 1.1);
}

TEST_CASE("elementwise relu and sigmoid") {
    Matrix2D m(1, 3);
    m(0, 0) = -1.0; m(0, 1) = 0.0; m(0, 2) = 2.0;
    const Matrix2D r = relu(m);
    CHECK(r(0, 0) == 0.0);
    CHECK(r(0, 1) == 0.0);
    CHECK(r(0, 2) == 2.0);

    CHECK(sigmoid(0.0) == doctest::Approx(0.5));
    CHECK(sigmoid(4.0) == doctest::Approx(0.982014).epsilon(1e-6));
    // stays strictly inside (0, 1) even deep in saturation
    CHECK(sigmoid(80.0) < 1.0);
    CHECK(sigmoid(-80.0) > 0.0);
}

TEST_CASE("elementwise add/sub/scale check shapes") {
    Matrix2D a(2, 2, 1.0);
    Matrix2D b(2, 2, 2.0);
    CHECK(add(a, b)(1, 1) == 3.0);
    CHECK(sub(a, b)(0, 0) == -1.0);
    CHECK(scale(b, 0.5)(0, 1) == 1.0);
    CHECK_THROWS_AS(add(a, Matrix2D(2, 3)), config_error);
}

TEST_CASE("finite_diff_grad matches analytic gradient of sum of squares") {
    Matrix2D p(1, 2);
    p(0, 0) = 1.0;
    p(0, 1) = 2.0;
    auto f = [](const Matrix2D& m) {
        double acc = 0.0;
        for (double v : m.data) acc += v * v;
        return acc;
    };
    const Matrix2D g = finite_diff_grad(f, p, 1e-4);
    CHECK(g(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(g(0, 1) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("finite_diff_grad of a constant is zero") {
    Matrix2D p(2, 2, 3.0);
    const Matrix2D g = finite_diff_grad([](const Matrix2D&) { return 42.0; }, p, 1e-4);
    for (double v : g.data) CHECK(v == 0.0);
}

TEST_CASE("finite_diff_grad product rule case") {
    Matrix2D p(1, 2);
    p(0, 0) = 3.0;
    p(0, 1) = 5.0;
    const Matrix2D g = finite_diff_grad(
        [](const Matrix2D& m) { return m.data[0] * m.data[1]; }, p, 1e-4);
    CHECK(g(0, 0) == doctest::Approx(5.0).epsilon(1e-8));
    CHECK(g(0, 1) == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("finite_diff_grad rejects non-finite evaluations and bad eps") {
    Matrix2D p(1, 1, 0.0);
    CHECK_THROWS_AS(
        finite_diff_grad([](const Matrix2D& m) { return 1.0 / m.data[0]; }, p, 0.0),
        config_error);
    CHECK_THROWS_AS(
        finite_diff_grad([](const Matrix2D& m) { return std::log(m.data[0] - 1.0); }, p, 1e-4),
        numeric_error);
}

TEST_CASE("rng reproduces the same stream for the same seed") {
    Rng a(123456);
    Rng b(123456);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c(123456);
    Rng d(123456);
    for (int i = 0; i < 100; ++i) {
        CHECK(c.uniform() == d.uniform());
        CHECK(c.normal() == d.normal());
    }
}

TEST_CASE("rng uniform stays in range and index is bounded") {
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(rng.index(7) < 7);
    }
}

TEST_CASE("rng normal has roughly standard moments") {
    Rng rng(2024);
    const int n = 20000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum_sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.05));
}
