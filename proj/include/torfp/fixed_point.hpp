#ifndef TORFP_FIXED_POINT_HPP
#define TORFP_FIXED_POINT_HPP

#include <array>
#include <cstdint>

#include "torfp/errors.hpp"

static_assert(sizeof(void*) == 8, "64-bit target required");
#ifndef __SIZEOF_INT128__
#error "unsigned __int128 support is required"
#endif

namespace torfp {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// Two's-complement signed integer of Words*64 bits, little-endian limbs.
// Interpreted as a fixed-point real together with a scaling factor f:
// value = int(w) / 2^f. The scaling factor is global to a computation and is
// passed to the operations; it is never stored per number.
//
// Arithmetic is modular: overflow wraps silently by design, which is what
// keeps addition exact and order-independent. Compile with
// -DTORFP_RANGE_CHECKS to trap wraparound in add/sub/mul during debugging.
template <int Words>
struct Wide {
    static_assert(Words == 2 || Words == 4 || Words == 8, "supported limb counts");
    std::array<u64, Words> w{};

    friend bool operator==(const Wide& a, const Wide& b) { return a.w == b.w; }
    friend bool operator!=(const Wide& a, const Wide& b) { return !(a.w == b.w); }
};

using Fixed128 = Wide<2>;
using Fixed256 = Wide<4>;

template <int W> inline bool fp_is_negative(const Wide<W>& a) {
    return (a.w[W - 1] >> 63) != 0;
}

template <int W> inline bool fp_is_zero(const Wide<W>& a) {
    u64 acc = 0;
    for (int i = 0; i < W; ++i) acc |= a.w[i];
    return acc == 0;
}

template <int W> inline Wide<W> fp_add(const Wide<W>& a, const Wide<W>& b) {
    Wide<W> r;
    u128 c = 0;
    for (int i = 0; i < W; ++i) {
        c += a.w[i];
        c += b.w[i];
        r.w[i] = static_cast<u64>(c);
        c >>= 64;
    }
#ifdef TORFP_RANGE_CHECKS
    // Signed overflow: operands agree in sign, result does not.
    if ((a.w[W - 1] >> 63) == (b.w[W - 1] >> 63) && (r.w[W - 1] >> 63) != (a.w[W - 1] >> 63))
        throw Error("fixedpt/wraparound", "fp_add wrapped");
#endif
    return r;
}

template <int W> inline Wide<W> fp_sub(const Wide<W>& a, const Wide<W>& b) {
    Wide<W> r;
    u128 br = 0;
    for (int i = 0; i < W; ++i) {
        u128 cur = static_cast<u128>(a.w[i]) - b.w[i] - br;
        r.w[i] = static_cast<u64>(cur);
        br = (cur >> 64) & 1; // borrow out
    }
#ifdef TORFP_RANGE_CHECKS
    if ((a.w[W - 1] >> 63) != (b.w[W - 1] >> 63) && (r.w[W - 1] >> 63) != (a.w[W - 1] >> 63))
        throw Error("fixedpt/wraparound", "fp_sub wrapped");
#endif
    return r;
}

template <int W> inline Wide<W> fp_neg(const Wide<W>& a) {
    return fp_sub(Wide<W>{}, a);
}

// Signed comparison: -1, 0, +1.
template <int W> inline int fp_cmp(const Wide<W>& a, const Wide<W>& b) {
    bool na = fp_is_negative(a), nb = fp_is_negative(b);
    if (na != nb) return na ? -1 : 1;
    for (int i = W - 1; i >= 0; --i) {
        if (a.w[i] != b.w[i]) return a.w[i] < b.w[i] ? -1 : 1;
    }
    return 0;
}

namespace detail {

// Full unsigned product, Words x Words -> 2*Words limbs.
template <int W>
inline std::array<u64, 2 * W> umul_full(const Wide<W>& a, const Wide<W>& b) {
    std::array<u64, 2 * W> p{};
    for (int i = 0; i < W; ++i) {
        u64 carry = 0;
        for (int j = 0; j < W; ++j) {
            u128 cur = static_cast<u128>(a.w[i]) * b.w[j] + p[i + j] + carry;
            p[i + j] = static_cast<u64>(cur);
            carry = static_cast<u64>(cur >> 64);
        }
        p[i + W] = carry;
    }
    return p;
}

} // namespace detail

// Fixed-point multiply: the low `width` bits of floor(int(a) * int(b) / 2^f).
// Construction: full unsigned product; the signed product is recovered by
// subtracting b from the high half when a < 0 and a from the high half when
// b < 0 (two's-complement identity); then an arithmetic right shift by f.
// The kernel is branch-free: signs enter as all-ones/all-zeros masks.
template <int W>
inline Wide<W> fp_mul(const Wide<W>& a, const Wide<W>& b, unsigned f) {
    std::array<u64, 2 * W> p = detail::umul_full(a, b);

    const u64 ma = 0 - (a.w[W - 1] >> 63);
    const u64 mb = 0 - (b.w[W - 1] >> 63);
    u128 br1 = 0, br2 = 0;
    for (int i = 0; i < W; ++i) {
        u128 cur = static_cast<u128>(p[W + i]) - (b.w[i] & ma) - br1;
        p[W + i] = static_cast<u64>(cur);
        br1 = (cur >> 64) & 1;
        cur = static_cast<u128>(p[W + i]) - (a.w[i] & mb) - br2;
        p[W + i] = static_cast<u64>(cur);
        br2 = (cur >> 64) & 1;
    }

    // Arithmetic shift right by f; only the low W result limbs are formed.
    // f < 64*W, so every source index stays inside the 2W-limb product.
    const unsigned ws = f >> 6, bs = f & 63;
    Wide<W> r;
    for (int i = 0; i < W; ++i) {
        const u64 lo = p[i + ws];
        const u64 hi = p[i + ws + 1];
        r.w[i] = (lo >> bs) | ((hi << (63 - bs)) << 1);
    }
#ifdef TORFP_RANGE_CHECKS
    {
        // Product bits at and above the result's sign position (bit f + 64W - 1
        // of the full product) must all equal the product sign, otherwise the
        // truncation to W limbs changed the value.
        const u64 sx = 0 - (p[2 * W - 1] >> 63);
        const unsigned start = f + 64 * W - 1;
        for (unsigned limb = start >> 6; limb < 2u * W; ++limb) {
            const u64 mask = (limb == (start >> 6)) ? (~u64(0) << (start & 63)) : ~u64(0);
            if ((p[limb] & mask) != (sx & mask))
                throw Error("fixedpt/wraparound", "fp_mul wrapped");
        }
    }
#endif
    return r;
}

// 1.0 at scaling factor f. Requires f <= 64*W - 2.
template <int W>
inline Wide<W> fp_one(unsigned f) {
    Wide<W> r;
    r.w[f >> 6] = u64(1) << (f & 63);
    return r;
}

// Reciprocal: int(r) = floor(2^(2f) / int(a)), by bit-serial restoring
// division. Throws BreakdownError when a <= 0 or when the quotient does not
// fit the signed range (precision exhausted / positive definiteness lost).
template <int W> Wide<W> fp_recip(const Wide<W>& a, unsigned f);

// Reciprocal square root: int(r) = isqrt(floor(2^(3f) / int(a))), the integer
// square root computed digit by digit. Error vs. the exact real value is at
// most 2 ulps at 2^-f. Throws BreakdownError when a <= 0 or on overflow.
template <int W> Wide<W> fp_rsqrt(const Wide<W>& a, unsigned f);

// Round-to-nearest conversion at step 2^-f (ties away from zero).
// Requires |x| < 2^(64*W - 1 - f); throws InvalidArgument otherwise.
template <int W> Wide<W> fp_from_real(double x, unsigned f);

// Nearest-double decode; exact whenever int(a) fits the double mantissa.
template <int W> double fp_to_real(const Wide<W>& a, unsigned f);

} // namespace torfp

#endif
