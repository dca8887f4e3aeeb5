#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "torfp/torontonian.hpp"

using namespace torfp;

namespace {

InputMatrix diag_instance(int n, const std::vector<double>& a_diag,
                          const std::vector<double>& c_diag = {}) {
    InputMatrix m;
    m.n_modes = n;
    m.a00.assign(static_cast<std::size_t>(n) * (n + 1) / 2, {0.0, 0.0});
    m.a01 = m.a00;
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j, ++idx)
            if (i == j) {
                m.a00[idx] = a_diag[static_cast<std::size_t>(i)];
                if (!c_diag.empty()) m.a01[idx] = c_diag[static_cast<std::size_t>(i)];
            }
    return m;
}

// Per-mode product identity for matrices that decouple mode by mode:
// Tor = prod_i (1/sqrt(det_i) - 1) with det_i = (1-a_i)^2 - c_i^2.
double decoupled_expected(const std::vector<double>& a, const std::vector<double>& c) {
    double tor = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double det = (1.0 - a[i]) * (1.0 - a[i]) - (c.empty() ? 0.0 : c[i] * c[i]);
        tor *= 1.0 / std::sqrt(det) - 1.0;
    }
    return tor;
}

unsigned __int128 elimination_ops(int n) {
    const unsigned __int128 nn = static_cast<unsigned>(n);
    return (4 * nn * nn * nn + 3 * nn * nn - 4 * nn) / 3;
}

} // namespace

TEST_CASE("zero matrix sums to exactly zero at every size") {
    for (int n = 1; n <= 10; ++n) {
        const auto a = diag_instance(n, std::vector<double>(static_cast<std::size_t>(n), 0.0));
        const auto r = torontonian(a, PrecisionChoice::Auto, 1);
        CHECK(r.value == 0.0);
        CHECK(r.raw.limbs[0] == 0);
        CHECK(r.raw.limbs[1] == 0);
        CHECK(r.raw.limbs[2] == 0);
        CHECK(r.raw.limbs[3] == 0);
        CHECK(r.term_count == (1ULL << n));
        CHECK(torontonian_reference(a) == 0.0);
    }
}

TEST_CASE("single mode and diagonal closed forms") {
    const auto half = diag_instance(1, {0.5});
    CHECK(torontonian(half).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(torontonian_reference(half) == doctest::Approx(1.0).epsilon(1e-12));

    const auto one_mode = diag_instance(1, {0.3}, {0.1});
    const double expect1 = 1.0 / std::sqrt(0.7 * 0.7 - 0.01) - 1.0;
    CHECK(torontonian(one_mode).value == doctest::Approx(expect1).epsilon(1e-12));

    const std::vector<double> diag{0.1, 0.2, 0.3};
    const auto three = diag_instance(3, diag);
    const double expect3 = (0.1 / 0.9) * (0.2 / 0.8) * (0.3 / 0.7);
    CHECK(expect3 == doctest::Approx(1.19048e-2).epsilon(1e-4));
    CHECK(torontonian(three).value == doctest::Approx(expect3).epsilon(1e-12));
    CHECK(torontonian_reference(three) == doctest::Approx(expect3).epsilon(1e-12));

    const auto two_half = diag_instance(2, {0.5, 0.5});
    CHECK(torontonian(two_half).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("engine agrees with the floating-point oracle") {
    // The oracle itself is cancellation-limited: terms of size ~1.4^z sum
    // to ~1e-7, so its absolute error is bounded by per-term rounding times
    // the sum of term magnitudes, not by eps relative to the result.
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const auto a = generate_instance(10, 0.16, 0.06, seed);
        const double ref = torontonian_reference(a);
        const auto r = torontonian(a);
        REQUIRE(ref != 0.0);

        double sum_abs = 1.0;
        for (std::uint64_t bits = 1; bits < (1ULL << 10); ++bits) {
            const auto sub = extract_submatrix(a, ClickPattern{bits, 10});
            sum_abs += 1.0 / std::sqrt(det_i_minus_a_float(sub));
        }
        const double oracle_err = 50.0 * 2.220446049250313e-16 * sum_abs;
        CHECK(std::fabs(r.value - ref) <= oracle_err);
        CHECK(std::fabs(r.value - ref) / std::fabs(ref) < 1e-5);
    }
}

TEST_CASE("operation counters match the cubic cost formula") {
    for (int n = 1; n <= 8; ++n) {
        const auto a = generate_instance(n, 0.16, 0.06, 40 + static_cast<std::uint64_t>(n));
        const auto r = torontonian(a, PrecisionChoice::Auto, 1);
        unsigned __int128 want_ma = 0;
        std::uint64_t want_recips = 0;
        for (int z = 1; z <= n; ++z) {
            want_ma += binom(n, z) * elimination_ops(2 * z);
            want_recips += binom(n, z) * static_cast<std::uint64_t>(2 * z - 1);
        }
        CHECK(static_cast<unsigned __int128>(r.counters.mults) + r.counters.adds == want_ma);
        CHECK(r.counters.recips == want_recips);
        CHECK(r.counters.rsqrts == (1ULL << n) - 1);
    }
}

TEST_CASE("partial sums fold to the same limbs for any split") {
    const auto a = generate_instance(8, 0.16, 0.06, 99);
    const auto cfg = select_precision(a, 8);
    REQUIRE(cfg.width_bits == 128);

    OpCounters single_ops;
    const Wide<2> whole = torontonian_partial<2>(a, partition(8, 0, 1), cfg, single_ops);

    for (int nproc : {2, 3, 4, 7}) {
        Wide<2> acc{};
        OpCounters ops;
        for (int rank = 0; rank < nproc; ++rank)
            acc = fp_add(acc, torontonian_partial<2>(a, partition(8, rank, nproc), cfg, ops));
        CHECK(acc == whole);
        CHECK(ops.mults == single_ops.mults);
        CHECK(ops.adds == single_ops.adds);
        CHECK(ops.recips == single_ops.recips);
        CHECK(ops.rsqrts == single_ops.rsqrts);
    }
}

TEST_CASE("result is identical for every worker count") {
    const auto a = generate_instance(10, 0.16, 0.06, 321);
    const auto base = torontonian(a, PrecisionChoice::Auto, 1);
    for (int w : {2, 4, 8}) {
        const auto r = torontonian(a, PrecisionChoice::Auto, w);
        CHECK(r.workers == w);
        CHECK(r.raw.limbs == base.raw.limbs);
        CHECK(r.value == base.value);
        CHECK(r.counters.mults == base.counters.mults);
        CHECK(r.counters.adds == base.counters.adds);
        CHECK(r.counters.recips == base.counters.recips);
        CHECK(r.counters.rsqrts == base.counters.rsqrts);
        CHECK(r.term_count == base.term_count);
    }
}

TEST_CASE("mode relabeling leaves the oracle value unchanged") {
    std::mt19937_64 rng(8080);
    for (int it = 0; it < 20; ++it) {
        const int n = 4 + static_cast<int>(rng() % 4);
        const auto a = generate_instance(n, 0.16, 0.06, rng());
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);

        InputMatrix b;
        b.n_modes = n;
        b.a00.resize(a.a00.size());
        b.a01.resize(a.a01.size());
        std::size_t idx = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j, ++idx) {
                b.a00[idx] = a.a00_at(perm[static_cast<std::size_t>(i)],
                                      perm[static_cast<std::size_t>(j)]);
                b.a01[idx] = a.a01_at(perm[static_cast<std::size_t>(i)],
                                      perm[static_cast<std::size_t>(j)]);
            }

        const double va = torontonian_reference(a);
        const double vb = torontonian_reference(b);
        CHECK(std::fabs(va - vb) <= 1e-9 * std::max(1.0, std::fabs(va)));
    }
}

TEST_CASE("subset extraction matches the submatrix builder") {
    std::mt19937_64 rng(5);
    const unsigned f = 40;
    HermitianFixed<2> out;
    for (int it = 0; it < 50; ++it) {
        const int n = 2 + static_cast<int>(rng() % 6);
        const auto a = generate_instance(n, 0.16, 0.06, rng());
        std::uint64_t mask = rng() & ((1ULL << n) - 1);
        if (mask == 0) mask = 1;

        extract_i_minus_az<2>(a, mask, f, out);

        // Engine masks address mode j through bit N-1-j; click patterns
        // address mode k through bit k.
        std::uint64_t click_bits = 0;
        for (int j = 0; j < n; ++j)
            if (mask >> (n - 1 - j) & 1) click_bits |= 1ULL << j;
        const auto sub = extract_submatrix(a, ClickPattern{click_bits, n});
        const auto dense = to_dense(sub);
        const int d = 2 * sub.n_modes;

        REQUIRE(out.dim == d);
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                const std::complex<double> want =
                    (i == j ? 1.0 : 0.0) - dense[static_cast<std::size_t>(i) * d + j];
                const auto& got = out.upper[static_cast<std::size_t>(tri_index(d, i, j))];
                CHECK(std::fabs(fp_to_real(got.re, f) - want.real()) <= std::ldexp(1.0, -38));
                CHECK(std::fabs(fp_to_real(got.im, f) - want.imag()) <= std::ldexp(1.0, -38));
            }
    }
}

TEST_CASE("breakdown reports the subset that failed") {
    // Six identical modes, each nearly singular: det_i = 2^-20 per mode, so
    // det(I-A) = 2^-120 and the forced 128-bit scaling leaves only a few
    // fraction bits. The off-diagonal then rounds onto the diagonal value
    // and the second pivot of the first singleton subset lands at zero.
    const double c = 0.5 - std::ldexp(1.0, -20);
    const std::vector<double> av(6, 0.5), cv(6, c);
    const auto a = diag_instance(6, av, cv);

    try {
        (void)torontonian(a, PrecisionChoice::Bits128, 1);
        FAIL("expected BreakdownError");
    } catch (const BreakdownError& e) {
        CHECK(std::string(e.code()) == "linalg/breakdown");
        CHECK(e.subset_mask() == 0b100000);
        CHECK(e.pivot_row() == 1);
    }

    // The same instance is fine at 256 bits. Accuracy is limited by design:
    // the full-subset determinant sits at 2^-120 while f = 255 - b_upper
    // keeps ~134 fraction bits, so ~14 significant bits survive under the
    // smallest determinant and the relative error is a few times 2^-14.
    const auto r = torontonian(a, PrecisionChoice::Bits256, 1);
    const double expect = decoupled_expected(av, cv);
    CHECK(std::fabs(r.value - expect) / expect < 1e-3);
    CHECK(r.raw.width_bits == 256);
}

TEST_CASE("click probabilities for one mode sum to one") {
    const auto a = diag_instance(1, {0.3}, {0.1});
    const double det = 0.7 * 0.7 - 0.01;
    const double p1 = probability(a, ClickPattern{1, 1});
    const double p0 = probability(a, ClickPattern{0, 1});
    CHECK(p1 == doctest::Approx(1.0 - std::sqrt(det)).epsilon(1e-12));
    CHECK(p0 == doctest::Approx(std::sqrt(det)).epsilon(1e-12));
    CHECK(p0 + p1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(probability_reference(a, ClickPattern{1, 1}) ==
          doctest::Approx(p1).epsilon(1e-10));

    const auto vacuum = diag_instance(1, {0.0});
    CHECK(probability(vacuum, ClickPattern{1, 1}) == doctest::Approx(0.0));
    CHECK(probability(vacuum, ClickPattern{0, 1}) == doctest::Approx(1.0));
}

TEST_CASE("probabilities over all patterns form a distribution") {
    const auto a = generate_instance(4, 0.16, 0.06, 1234);
    double total = 0.0;
    for (std::uint64_t bits = 0; bits < 16; ++bits)
        total += probability_reference(a, ClickPattern{bits, 4});
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("input validation") {
    InputMatrix big;
    big.n_modes = 41;
    big.a00.assign(41 * 42 / 2, {0.0, 0.0});
    big.a01 = big.a00;
    CHECK_THROWS_AS(torontonian(big), InvalidArgument);

    InputMatrix empty;
    CHECK_THROWS_AS(torontonian(empty), InvalidArgument);
    CHECK_THROWS_AS(torontonian_reference(empty), InvalidArgument);

    // Hermitian blocks need a real diagonal.
    auto skew = diag_instance(2, {0.2, 0.2});
    skew.a00[0] = {0.2, 0.05};
    try {
        (void)torontonian(skew);
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(std::string(e.code()) == "torontonian/symmetry");
    }

    // Indefinite I - A: the reference path sees a negative determinant.
    const auto indef = diag_instance(1, {0.5}, {0.7});
    CHECK_THROWS_AS((void)torontonian_reference(indef), PrecisionError);

    const auto good = diag_instance(2, {0.2, 0.2});
    CHECK_THROWS_AS(probability(good, ClickPattern{1, 3}), InvalidArgument);

    InputMatrix wide;
    wide.n_modes = 21;
    wide.a00.assign(21 * 22 / 2, {0.0, 0.0});
    wide.a01 = wide.a00;
    CHECK_THROWS_AS(torontonian_reference(wide), InvalidArgument);
}
