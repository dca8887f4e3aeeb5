#ifndef TORFP_TORONTONIAN_HPP
#define TORFP_TORONTONIAN_HPP

#include <array>
#include <cstdint>

#include "torfp/linalg.hpp"
#include "torfp/matrix_io.hpp"
#include "torfp/precision.hpp"
#include "torfp/subsets.hpp"

namespace torfp {

// Raw fixed-point accumulator snapshot, low limbs first; a 128-bit run
// fills limbs[0..1] and zeroes the rest.
struct FixedValue {
    int width_bits = 128;
    std::array<std::uint64_t, 4> limbs{};
};

struct TorontonianResult {
    double value = 0.0;
    FixedValue raw;
    PrecisionConfig config;
    std::uint64_t term_count = 0; // 2^N
    OpCounters counters;
    double wall_seconds = 0.0;
    int workers = 1;
};

enum class PrecisionChoice { Auto, Bits128, Bits256 };

// Materialize the upper triangle of I - A_Z at scaling f into `out`
// (storage reused across calls). Bit (N-1-j) of mask selects mode j, i.e.
// rows/columns j and N+j of the full 2N x 2N matrix.
template <int W>
void extract_i_minus_az(const InputMatrix& a, SubsetMask mask, unsigned f,
                        HermitianFixed<W>& out);

// Sum of (-1)^(N-|Z|) / sqrt(det(I - A_Z)) over the masks assigned to one
// worker, ascending |Z|, descending mask within a class. Rank 0 also adds
// the empty-set term (-1)^N. Breakdown errors are tagged with the mask.
template <int W>
Wide<W> torontonian_partial(const InputMatrix& a, const WorkAssignment& w,
                            const PrecisionConfig& cfg, OpCounters& counters);

// Full evaluation: precision selection, parallel partials, exact fold.
// The raw accumulator is limb-identical for any worker count. workers = 0
// means hardware concurrency.
TorontonianResult torontonian(const InputMatrix& a, PrecisionChoice precision = PrecisionChoice::Auto,
                              int workers = 0);

// Direct double-precision evaluation of the same sum (N <= 20): the
// floating-point oracle.
double torontonian_reference(const InputMatrix& a);

// Click-pattern probability p(S) = Tor(A_S) * sqrt(det(I - A)), with the
// Torontonian from the fixed-point engine or from the oracle. The empty
// pattern gives sqrt(det(I - A)) (its Torontonian factor is exactly 1).
double probability(const InputMatrix& a_full, ClickPattern s, int workers = 0);
double probability_reference(const InputMatrix& a_full, ClickPattern s);

extern template void extract_i_minus_az<2>(const InputMatrix&, SubsetMask, unsigned,
                                           HermitianFixed<2>&);
extern template void extract_i_minus_az<4>(const InputMatrix&, SubsetMask, unsigned,
                                           HermitianFixed<4>&);
extern template Wide<2> torontonian_partial<2>(const InputMatrix&, const WorkAssignment&,
                                               const PrecisionConfig&, OpCounters&);
extern template Wide<4> torontonian_partial<4>(const InputMatrix&, const WorkAssignment&,
                                               const PrecisionConfig&, OpCounters&);

} // namespace torfp

#endif
