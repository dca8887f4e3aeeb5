#ifndef TORFP_SUBSETS_HPP
#define TORFP_SUBSETS_HPP

#include <cstdint>
#include <vector>

#include "torfp/errors.hpp"

namespace torfp {

// An N-bit subset mask. Bit (N-1-j) set means mode j is a member, the
// high-to-low convention used by the enumeration order below.
using SubsetMask = std::uint64_t;

// Exact binomial coefficient. Requires 0 <= k <= n <= 62 so every value
// fits in 64 bits; anything else throws InvalidArgument.
std::uint64_t binom(int n, int k);

// The k-th (0-based) N-bit mask of popcount z in descending numeric order.
SubsetMask get_kth_mask(int N, int z, std::uint64_t k);

// Successor in descending numeric order with popcount preserved: the block
// of trailing ones moves down past the next higher one-bit. Returns 0 when
// the input is the minimal mask of its popcount (end of range).
SubsetMask get_next_mask(SubsetMask mask);

// Half-open slice of one popcount class, in enumeration order. end_mask is
// the first mask NOT owned (0 when the slice runs to the end of the class).
struct CountRange {
    SubsetMask start_mask = 0;
    SubsetMask end_mask = 0;
    std::uint64_t count = 0;
};

// A worker's share of the 2^N - 1 nonempty subsets: one contiguous slice
// per popcount class, boundaries at floor(C(N,z) * rank / nproc). Slice
// sizes within a class differ by at most one across ranks. The empty
// subset is not part of any assignment; rank 0 accounts for it separately.
struct WorkAssignment {
    int modes = 0;
    int rank = 0;
    int nproc = 1;
    std::vector<CountRange> ranges; // ranges[z-1] covers popcount z
};

WorkAssignment partition(int N, int rank, int nproc);

} // namespace torfp

#endif
