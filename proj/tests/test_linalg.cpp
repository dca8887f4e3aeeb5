#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "torfp/linalg.hpp"

using namespace torfp;

namespace {

// Random Hermitian positive definite matrix: B*B^H + dim*I, scaled into a
// modest range so fixed-point conversion at f=100 is comfortable.
Eigen::MatrixXcd random_hpd(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXcd b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = std::complex<double>(u(rng), u(rng));
    Eigen::MatrixXcd a = b * b.adjoint() + double(n) * Eigen::MatrixXcd::Identity(n, n);
    return a / (2.0 * n);
}

HermitianFloat to_upper_float(const Eigen::MatrixXcd& a) {
    HermitianFloat m;
    m.dim = static_cast<int>(a.rows());
    m.upper.resize(tri_size(m.dim));
    for (int i = 0; i < m.dim; ++i)
        for (int j = i; j < m.dim; ++j) m.upper[tri_index(m.dim, i, j)] = a(i, j);
    return m;
}

template <int W> HermitianFixed<W> to_upper_fixed(const Eigen::MatrixXcd& a, unsigned f) {
    HermitianFixed<W> m;
    m.dim = static_cast<int>(a.rows());
    m.upper.resize(tri_size(m.dim));
    for (int i = 0; i < m.dim; ++i)
        for (int j = i; j < m.dim; ++j) {
            auto& e = m.upper[tri_index(m.dim, i, j)];
            e.re = fp_from_real<W>(a(i, j).real(), f);
            e.im = (i == j) ? Wide<W>{} : fp_from_real<W>(a(i, j).imag(), f);
        }
    return m;
}

// Cofactor expansion along the first row: an independent oracle for n <= 4.
std::complex<double> cofactor_det(const Eigen::MatrixXcd& a) {
    const int n = static_cast<int>(a.rows());
    if (n == 1) return a(0, 0);
    std::complex<double> det = 0.0;
    for (int j = 0; j < n; ++j) {
        Eigen::MatrixXcd minor(n - 1, n - 1);
        for (int r = 1; r < n; ++r) {
            int cc = 0;
            for (int c = 0; c < n; ++c)
                if (c != j) minor(r - 1, cc++) = a(r, c);
        }
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        det += sign * a(0, j) * cofactor_det(minor);
    }
    return det;
}

std::uint64_t elimination_ops(int n) {
    const auto nn = static_cast<std::uint64_t>(n);
    return (4 * nn * nn * nn + 3 * nn * nn - 4 * nn) / 3;
}

} // namespace

TEST_CASE("2x2 closed form") {
    Eigen::MatrixXcd a(2, 2);
    a << std::complex<double>(2, 0), std::complex<double>(1, 1), std::complex<double>(1, -1),
        std::complex<double>(3, 0);
    auto mf = to_upper_float(a);
    CHECK(hermitian_det_float(mf) == doctest::Approx(4.0).epsilon(1e-14));

    auto mx = to_upper_fixed<2>(a, 100);
    OpCounters c;
    const auto det = hermitian_det_fixed(mx, 100, c);
    CHECK(fp_to_real(det, 100) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("identity determinant is one") {
    for (int n : {2, 4, 8}) {
        const Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n);
        auto mf = to_upper_float(a);
        CHECK(hermitian_det_float(mf) == 1.0);
        auto mx = to_upper_fixed<2>(a, 120);
        OpCounters c;
        CHECK(fp_to_real(hermitian_det_fixed(mx, 120, c), 120) == 1.0);
    }
}

TEST_CASE("scalar matrix power law") {
    const Eigen::MatrixXcd a = 0.5 * Eigen::MatrixXcd::Identity(6, 6);
    CHECK(hermitian_det_float(to_upper_float(a)) == doctest::Approx(0.015625).epsilon(1e-15));
}

TEST_CASE("float path matches cofactor expansion up to dim 4") {
    std::mt19937_64 rng(42);
    for (int it = 0; it < 100; ++it) {
        const int n = 1 + static_cast<int>(rng() % 4);
        const auto a = random_hpd(n, rng);
        const double expect = cofactor_det(a).real();
        CHECK(hermitian_det_float(to_upper_float(a)) ==
              doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("fixed path matches LU determinant to 1e-9") {
    std::mt19937_64 rng(7);
    for (int it = 0; it < 100; ++it) {
        const int n = 2 + static_cast<int>(rng() % 23);
        const auto a = random_hpd(n, rng);
        const double expect = a.determinant().real();
        auto mx = to_upper_fixed<2>(a, 110);
        OpCounters c;
        const double got = fp_to_real(hermitian_det_fixed(mx, 110, c), 110);
        CHECK(std::fabs(got - expect) <= 1e-9 * std::fabs(expect));
    }
}

TEST_CASE("256-bit path agrees as well") {
    std::mt19937_64 rng(13);
    for (int it = 0; it < 10; ++it) {
        const int n = 2 + static_cast<int>(rng() % 10);
        const auto a = random_hpd(n, rng);
        auto mx = to_upper_fixed<4>(a, 220);
        OpCounters c;
        const double got = fp_to_real(hermitian_det_fixed(mx, 220, c), 220);
        CHECK(got == doctest::Approx(a.determinant().real()).epsilon(1e-12));
    }
}

TEST_CASE("elimination op tally matches the cubic formula exactly") {
    std::mt19937_64 rng(3);
    for (int n : {1, 2, 3, 4, 6, 10, 17, 24}) {
        const auto a = random_hpd(n, rng);
        auto mx = to_upper_fixed<2>(a, 100);
        OpCounters c;
        (void)hermitian_det_fixed(mx, 100, c);
        CHECK(c.mults + c.adds == elimination_ops(n));
        CHECK(c.recips == static_cast<std::uint64_t>(n - 1));
        CHECK(c.rsqrts == 0);
    }
}

TEST_CASE("non-positive pivot raises a breakdown tagged with the row") {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(3, 3);
    a(1, 1) = -0.5; // second pivot goes negative
    auto mx = to_upper_fixed<2>(a, 100);
    OpCounters c;
    try {
        (void)hermitian_det_fixed(mx, 100, c);
        FAIL("expected BreakdownError");
    } catch (const BreakdownError& e) {
        CHECK(e.pivot_row() == 1);
        CHECK(std::string(e.code()) == "linalg/breakdown");
    }
}

TEST_CASE("float path flags non-finite results") {
    // A zero pivot with a dependent row drives the elimination to NaN.
    Eigen::MatrixXcd a(2, 2);
    a << 0.0, 1.0, 1.0, 0.0;
    CHECK_THROWS_AS(hermitian_det_float(to_upper_float(a)), PrecisionError);
}
