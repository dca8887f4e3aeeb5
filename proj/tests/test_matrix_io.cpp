#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "torfp/matrix_io.hpp"

using namespace torfp;

namespace {

Eigen::MatrixXcd dense_eigen(const InputMatrix& a) {
    const int d = 2 * a.n_modes;
    const auto v = to_dense(a);
    Eigen::MatrixXcd m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = v[static_cast<std::size_t>(i) * d + j];
    return m;
}

} // namespace

TEST_CASE("quantization round trip and bounds") {
    CHECK(quantize(0.5, 16) == 16384);
    CHECK(dequantize(quantize(0.5, 16), 16) == 0.5);
    CHECK(quantize(0.0, 16) == 0);
    CHECK(quantize(0.0, 32) == 0);

    std::mt19937_64 rng(202);
    for (int bits : {16, 32}) {
        const double bound = std::ldexp(1.0, -bits);
        std::uniform_real_distribution<double> u(-1.0 + bound, 1.0 - bound);
        for (int it = 0; it < 100000; ++it) {
            const double x = u(rng);
            const double back = dequantize(quantize(x, bits), bits);
            CHECK(std::fabs(back - x) <= bound);
        }
    }
}

TEST_CASE("quantization rounds half away from zero and clamps") {
    // Midpoint between lattice points k and k+1.
    CHECK(quantize((100.0 + 0.5) / 32768.0, 16) == 101);
    CHECK(quantize(-(100.0 + 0.5) / 32768.0, 16) == -101);
    CHECK(quantize(0.999999999, 16) == 32767); // clamp at +(2^15 - 1)
    CHECK(quantize(-0.999999999, 16) == -32767);
    CHECK_THROWS_AS(quantize(1.0, 16), InvalidArgument);
    CHECK_THROWS_AS(quantize(-1.5, 32), InvalidArgument);
    CHECK_THROWS_AS(quantize(0.5, 24), InvalidArgument);
}

TEST_CASE("16-bit lattice error bound matches the quoted magnitude") {
    // 2^-16 = 1.52587890625e-05.
    CHECK(std::ldexp(1.0, -16) == doctest::Approx(1.526e-5).epsilon(1e-3));
}

TEST_CASE("binary save/load round trip is byte-identical") {
    const auto a = generate_instance(6, 0.16, 0.06, 12345);
    for (int bits : {16, 32}) {
        const auto bytes1 = save_matrix(a, MatrixFormat::Binary, bits);
        const auto loaded = load_matrix(bytes1, MatrixFormat::Binary);
        CHECK(loaded.n_modes == 6);
        CHECK(loaded.quant_bits == bits);
        const auto bytes2 = save_matrix(loaded, MatrixFormat::Binary, bits);
        REQUIRE(bytes1 == bytes2);
        // And value-identical on a second pass.
        const auto again = load_matrix(bytes2, MatrixFormat::Binary);
        REQUIRE(again.a00 == loaded.a00);
        REQUIRE(again.a01 == loaded.a01);
    }
}

TEST_CASE("text save/load is lossless for doubles") {
    const auto a = generate_instance(5, 0.2, 0.05, 777);
    const auto bytes = save_matrix(a, MatrixFormat::Text);
    const auto loaded = load_matrix(bytes, MatrixFormat::Text);
    REQUIRE(loaded.n_modes == a.n_modes);
    REQUIRE(loaded.a00 == a.a00);
    REQUIRE(loaded.a01 == a.a01);
    CHECK(loaded.quant_bits == 0);
}

TEST_CASE("text and 32-bit binary agree within the lattice spacing") {
    const auto a = generate_instance(4, 0.16, 0.06, 31);
    const auto text = load_matrix(save_matrix(a, MatrixFormat::Text), MatrixFormat::Text);
    const auto bin = load_matrix(save_matrix(a, MatrixFormat::Binary, 32), MatrixFormat::Binary);
    const double bound = std::ldexp(1.0, -32);
    for (std::size_t i = 0; i < text.a00.size(); ++i) {
        CHECK(std::abs(text.a00[i] - bin.a00[i]) <= bound * 1.5);
        CHECK(std::abs(text.a01[i] - bin.a01[i]) <= bound * 1.5);
    }
}

TEST_CASE("malformed binary inputs carry the byte offset") {
    const auto a = generate_instance(3, 0.16, 0.06, 9);
    auto bytes = save_matrix(a, MatrixFormat::Binary, 16);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    try {
        (void)load_matrix(bad_magic, MatrixFormat::Binary);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position() == 0);
        CHECK(std::string(e.code()) == "matrixio/magic");
    }

    auto truncated = bytes;
    truncated.resize(bytes.size() - 3);
    try {
        (void)load_matrix(truncated, MatrixFormat::Binary);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.code()) == "matrixio/truncated");
        CHECK(e.position() == truncated.size());
    }
}

TEST_CASE("malformed text inputs carry the line number") {
    const std::string good = "GBSA text 1\nmodes 1\n0.1 0\n0.05 0.01\n";
    const std::vector<std::uint8_t> ok(good.begin(), good.end());
    CHECK(load_matrix(ok, MatrixFormat::Text).n_modes == 1);

    const std::string bad = "GBSA text 1\nmodes 1\n0.1 0\nnot-a-number x\n";
    try {
        (void)load_matrix({bad.begin(), bad.end()}, MatrixFormat::Text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position() == 4);
        CHECK(std::string(e.code()) == "matrixio/entry");
    }

    const std::string big = "GBSA text 1\nmodes 1\n1.5 0\n0 0\n";
    CHECK_THROWS_AS((void)load_matrix({big.begin(), big.end()}, MatrixFormat::Text), ParseError);
}

TEST_CASE("symmetry checks pass on constructed instances and catch faults") {
    const auto a = generate_instance(5, 0.16, 0.06, 4242);
    auto dense = to_dense(a);
    auto rep = check_symmetries(dense, 10);
    CHECK(rep.pass);
    CHECK(rep.hermitian_dev == 0.0);
    CHECK(rep.a01_sym_dev == 0.0);
    CHECK(rep.block_conj_dev == 0.0);

    dense[0 * 10 + 3] += std::complex<double>(1e-6, 0.0);
    rep = check_symmetries(dense, 10);
    CHECK_FALSE(rep.pass);
    CHECK(rep.hermitian_dev == doctest::Approx(1e-6).epsilon(0.01));

    const std::vector<std::complex<double>> zero(16, 0.0);
    CHECK(check_symmetries(zero, 4).pass);
}

TEST_CASE("generator is deterministic in the seed") {
    const auto a = generate_instance(8, 0.16, 0.06, 555);
    const auto b = generate_instance(8, 0.16, 0.06, 555);
    REQUIRE(a.a00 == b.a00);
    REQUIRE(a.a01 == b.a01);
    const auto c = generate_instance(8, 0.16, 0.06, 556);
    CHECK(a.a00 != c.a00);
}

TEST_CASE("generated spectra stay inside the target window") {
    std::mt19937_64 seeds(1);
    for (int it = 0; it < 50; ++it) {
        const int n = 1 + static_cast<int>(seeds() % 10);
        const double a_t = 0.16, spread = 0.06;
        const auto a = generate_instance(n, a_t, spread, seeds());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_eigen(a));
        REQUIRE(es.info() == Eigen::Success);
        CHECK(es.eigenvalues().minCoeff() > a_t - spread);
        CHECK(es.eigenvalues().maxCoeff() < a_t + spread);

        double mean_diag = 0.0;
        for (int i = 0; i < n; ++i) mean_diag += a.a00_at(i, i).real();
        mean_diag /= n;
        CHECK(mean_diag > a_t - spread);
        CHECK(mean_diag < a_t + spread);
    }
}

TEST_CASE("submatrix extraction selects the clicked modes") {
    const auto a = generate_instance(6, 0.16, 0.06, 99);

    // All clicks: identity operation.
    const auto full = extract_submatrix(a, ClickPattern{0b111111, 6});
    REQUIRE(full.a00 == a.a00);
    REQUIRE(full.a01 == a.a01);

    // Single click at mode 2.
    const auto one = extract_submatrix(a, ClickPattern{0b000100, 6});
    REQUIRE(one.n_modes == 1);
    CHECK(one.a00[0] == a.a00_at(2, 2));
    CHECK(one.a01[0] == a.a01_at(2, 2));

    CHECK_THROWS_AS(extract_submatrix(a, ClickPattern{0, 6}), InvalidArgument);
    CHECK_THROWS_AS(extract_submatrix(a, ClickPattern{1, 5}), InvalidArgument);
}

TEST_CASE("extraction preserves the block symmetries") {
    std::mt19937_64 rng(64);
    for (int it = 0; it < 100; ++it) {
        const int n = 2 + static_cast<int>(rng() % 7);
        const auto a = generate_instance(n, 0.16, 0.06, rng());
        std::uint64_t bits = rng() & ((1ULL << n) - 1);
        if (bits == 0) bits = 1;
        const auto sub = extract_submatrix(a, ClickPattern{bits, n});
        CHECK(check_symmetries(to_dense(sub), 2 * sub.n_modes).pass);
    }
}

TEST_CASE("file round trip with format sniffing") {
    const auto a = generate_instance(4, 0.16, 0.06, 8);
    save_matrix_file(a, "mio_test_bin.gbsa", MatrixFormat::Binary, 16);
    save_matrix_file(a, "mio_test_txt.gbsa", MatrixFormat::Text);
    const auto b = load_matrix_file("mio_test_bin.gbsa");
    const auto t = load_matrix_file("mio_test_txt.gbsa");
    CHECK(b.quant_bits == 16);
    CHECK(t.quant_bits == 0);
    CHECK(b.n_modes == 4);
    REQUIRE(t.a00 == a.a00);
    std::remove("mio_test_bin.gbsa");
    std::remove("mio_test_txt.gbsa");
}
