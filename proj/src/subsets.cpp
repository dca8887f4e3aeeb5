#include "torfp/subsets.hpp"

#include <array>
#include <bit>

namespace torfp {

namespace {

constexpr int kMaxN = 62;

// Pascal's triangle up to n = 62; C(62,31) < 2^63 so u64 never overflows.
const std::array<std::array<std::uint64_t, kMaxN + 1>, kMaxN + 1>& pascal() {
    static const auto table = [] {
        std::array<std::array<std::uint64_t, kMaxN + 1>, kMaxN + 1> t{};
        for (int n = 0; n <= kMaxN; ++n) {
            t[n][0] = 1;
            for (int k = 1; k <= n; ++k)
                t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0);
        }
        return t;
    }();
    return table;
}

} // namespace

std::uint64_t binom(int n, int k) {
    if (n < 0 || k < 0 || k > n)
        throw InvalidArgument("subsets/range", "binom requires 0 <= k <= n");
    if (n > kMaxN)
        throw InvalidArgument("subsets/overflow", "binom limited to n <= 62 (64-bit exact)");
    return pascal()[n][k];
}

SubsetMask get_kth_mask(int N, int z, std::uint64_t k) {
    if (N < 1 || N > kMaxN || z < 1 || z > N)
        throw InvalidArgument("subsets/range", "get_kth_mask requires 1 <= z <= N <= 62");
    if (k >= binom(N, z))
        throw InvalidArgument("subsets/range", "get_kth_mask rank out of range");
    SubsetMask m = 0;
    int remaining = z;
    for (int p = N - 1; p >= 0 && remaining > 0; --p) {
        // Masks that set bit p come first (numerically larger): C(p, remaining-1) of them.
        const std::uint64_t cnt = binom(p, remaining - 1);
        if (k < cnt) {
            m |= SubsetMask(1) << p;
            --remaining;
        } else {
            k -= cnt;
        }
    }
    return m;
}

SubsetMask get_next_mask(SubsetMask mask) {
    const int tail_ones = std::countr_one(mask);
    const SubsetMask x = mask - ((SubsetMask(1) << tail_ones) - 1);
    if (x == 0) return 0; // minimal mask: all ones at the tail
    const int p = std::countr_zero(x);
    // Clear bit p, set tail_ones+1 bits directly below it:
    // x - 2^p + (2^p - 2^(p-tail_ones-1)).
    return x - (SubsetMask(1) << (p - tail_ones - 1));
}

WorkAssignment partition(int N, int rank, int nproc) {
    if (N < 1 || N > kMaxN)
        throw InvalidArgument("subsets/range", "partition requires 1 <= N <= 62");
    if (nproc < 1 || rank < 0 || rank >= nproc)
        throw InvalidArgument("subsets/range", "partition requires 0 <= rank < nproc");
    WorkAssignment w;
    w.modes = N;
    w.rank = rank;
    w.nproc = nproc;
    w.ranges.resize(static_cast<std::size_t>(N));
    for (int z = 1; z <= N; ++z) {
        const std::uint64_t total = binom(N, z);
        const auto lo = static_cast<std::uint64_t>(
            static_cast<unsigned __int128>(total) * rank / nproc);
        const auto hi = static_cast<std::uint64_t>(
            static_cast<unsigned __int128>(total) * (rank + 1) / nproc);
        CountRange& r = w.ranges[static_cast<std::size_t>(z - 1)];
        r.count = hi - lo;
        r.start_mask = r.count ? get_kth_mask(N, z, lo) : 0;
        r.end_mask = (r.count && hi < total) ? get_kth_mask(N, z, hi) : 0;
    }
    return w;
}

} // namespace torfp
