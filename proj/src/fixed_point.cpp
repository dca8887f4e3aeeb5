#include "torfp/fixed_point.hpp"

#include <cmath>
#include <cstring>

namespace torfp {
namespace {

void validate_f(unsigned f, int words) {
    const unsigned maxf = 64u * static_cast<unsigned>(words) - 2;
    if (f < 1 || f > maxf)
        throw InvalidArgument("fixedpt/scaling", "scaling factor out of range");
}

// Little helpers over raw limb arrays of fixed length L (little-endian).

template <int L> void shl1(std::array<u64, L>& v, u64 in_bit) {
    u64 carry = in_bit;
    for (int i = 0; i < L; ++i) {
        const u64 nxt = v[i] >> 63;
        v[i] = (v[i] << 1) | carry;
        carry = nxt;
    }
}

template <int L, int M> int ucmp(const std::array<u64, L>& a, const std::array<u64, M>& b) {
    for (int i = (L > M ? L : M) - 1; i >= 0; --i) {
        const u64 x = i < L ? a[i] : 0;
        const u64 y = i < M ? b[i] : 0;
        if (x != y) return x < y ? -1 : 1;
    }
    return 0;
}

template <int L, int M> void usub(std::array<u64, L>& a, const std::array<u64, M>& b) {
    u128 br = 0;
    for (int i = 0; i < L; ++i) {
        const u128 cur = static_cast<u128>(a[i]) - (i < M ? b[i] : 0) - br;
        a[i] = static_cast<u64>(cur);
        br = (cur >> 64) & 1;
    }
}

template <int L> void set_bit(std::array<u64, L>& v, unsigned pos) {
    v[pos >> 6] |= u64(1) << (pos & 63);
}

template <int L> u64 get_bit(const std::array<u64, L>& v, unsigned pos) {
    return (v[pos >> 6] >> (pos & 63)) & 1;
}

// floor(2^num_pow / d) for positive d, bit-serial restoring division.
// Quotient bits at or above limit_bits raise a breakdown error; d's top
// signed bit is clear, so the remainder always fits W limbs.
template <int W, int QW>
std::array<u64, QW> div_pow2(const std::array<u64, W>& d, unsigned num_pow,
                             unsigned limit_bits) {
    std::array<u64, QW> q{};
    std::array<u64, W> rem{};
    for (int i = static_cast<int>(num_pow); i >= 0; --i) {
        shl1<W>(rem, i == static_cast<int>(num_pow) ? 1 : 0);
        if (ucmp<W, W>(rem, d) >= 0) {
            usub<W, W>(rem, d);
            const unsigned pos = static_cast<unsigned>(i);
            if (pos >= limit_bits)
                throw BreakdownError("fixedpt/overflow",
                                     "reciprocal does not fit the representable range");
            set_bit<QW>(q, pos);
        }
    }
    return q;
}

// Digit-by-digit (binary restoring) integer square root of a 2W-limb value.
// Root has at most 64*W bits; remainder stays below 2*root + 1.
template <int W>
std::array<u64, W> isqrt(const std::array<u64, 2 * W>& x) {
    std::array<u64, 2 * W + 1> rem{};
    std::array<u64, W + 1> root{};
    std::array<u64, W + 1> trial{};
    for (int k = 64 * W - 1; k >= 0; --k) {
        shl1<2 * W + 1>(rem, get_bit<2 * W>(x, 2 * k + 1));
        shl1<2 * W + 1>(rem, get_bit<2 * W>(x, 2 * k));
        trial = root;
        shl1<W + 1>(trial, 0);
        shl1<W + 1>(trial, 1); // trial = 4*root + 1
        shl1<W + 1>(root, 0);
        if (ucmp<2 * W + 1, W + 1>(rem, trial) >= 0) {
            usub<2 * W + 1, W + 1>(rem, trial);
            root[0] |= 1;
        }
    }
    std::array<u64, W> out{};
    for (int i = 0; i < W; ++i) out[i] = root[i];
    return out;
}

} // namespace

template <int W>
Wide<W> fp_recip(const Wide<W>& a, unsigned f) {
    validate_f(f, W);
    if (fp_is_negative(a) || fp_is_zero(a))
        throw BreakdownError("fixedpt/nonpositive", "fp_recip requires a positive input");
    Wide<W> r;
    r.w = div_pow2<W, W>(a.w, 2 * f, 64u * W - 1);
    return r;
}

template <int W>
Wide<W> fp_rsqrt(const Wide<W>& a, unsigned f) {
    validate_f(f, W);
    if (fp_is_negative(a) || fp_is_zero(a))
        throw BreakdownError("fixedpt/nonpositive", "fp_rsqrt requires a positive input");
    // isqrt halves the bit length, so the root fits the signed range exactly
    // when the quotient stays below 2^(2*64*W - 2).
    const auto x = div_pow2<W, 2 * W>(a.w, 3 * f, 2u * 64u * W - 2);
    Wide<W> r;
    r.w = isqrt<W>(x);
    return r;
}

template <int W>
Wide<W> fp_from_real(double x, unsigned f) {
    validate_f(f, W);
    if (!std::isfinite(x))
        throw InvalidArgument("fixedpt/domain", "fp_from_real requires a finite input");
    Wide<W> r;
    if (x == 0.0) return r;

    int e = 0;
    const double fr = std::frexp(std::fabs(x), &e); // |x| = fr * 2^e, fr in [0.5, 1)
    if (e + static_cast<int>(f) > 64 * W - 1)
        throw InvalidArgument("fixedpt/range", "fp_from_real input exceeds the integer budget");
    const u64 m = static_cast<u64>(std::ldexp(fr, 53)); // exact 53-bit mantissa
    const int s = e - 53 + static_cast<int>(f);         // |x| * 2^f = m * 2^s

    if (s >= 0) {
        const unsigned limb = static_cast<unsigned>(s) >> 6, bits = static_cast<unsigned>(s) & 63;
        r.w[limb] = m << bits;
        if (bits != 0 && limb + 1 < static_cast<unsigned>(W))
            r.w[limb + 1] = m >> (64 - bits);
    } else {
        const unsigned sh = static_cast<unsigned>(-s);
        // m < 2^53, so any shift beyond 53 rounds to zero.
        if (sh <= 53) // ties round away from zero
            r.w[0] = (m >> sh) + ((m >> (sh - 1)) & 1);
    }
    return x < 0 ? fp_neg(r) : r;
}

template <int W>
double fp_to_real(const Wide<W>& a, unsigned f) {
    validate_f(f, W);
    const bool neg = fp_is_negative(a);
    const Wide<W> mag = neg ? fp_neg(a) : a;
    long double acc = 0.0L;
    for (int i = W - 1; i >= 0; --i)
        acc = std::ldexp(acc, 64) + static_cast<long double>(mag.w[i]);
    const double out = static_cast<double>(std::ldexp(acc, -static_cast<int>(f)));
    return neg ? -out : out;
}

template Wide<2> fp_recip<2>(const Wide<2>&, unsigned);
template Wide<4> fp_recip<4>(const Wide<4>&, unsigned);
template Wide<2> fp_rsqrt<2>(const Wide<2>&, unsigned);
template Wide<4> fp_rsqrt<4>(const Wide<4>&, unsigned);
template Wide<2> fp_from_real<2>(double, unsigned);
template Wide<4> fp_from_real<4>(double, unsigned);
template double fp_to_real<2>(const Wide<2>&, unsigned);
template double fp_to_real<4>(const Wide<4>&, unsigned);

} // namespace torfp
