#ifndef TORFP_LINALG_HPP
#define TORFP_LINALG_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "torfp/errors.hpp"
#include "torfp/fixed_point.hpp"

namespace torfp {

template <typename T> struct ComplexVal {
    T re{};
    T im{};
};

// Hermitian matrix, upper triangle only, row-major over the triangle.
// Diagonal entries carry a zero imaginary part; the logical (j,i) for
// j > i is the conjugate of the stored (i,j).
template <int W> struct HermitianFixed {
    int dim = 0;
    std::vector<ComplexVal<Wide<W>>> upper;
};

struct HermitianFloat {
    int dim = 0;
    std::vector<std::complex<double>> upper;
};

// Index into the packed upper triangle of an n x n matrix, i <= j.
constexpr std::size_t tri_index(int n, int i, int j) {
    return static_cast<std::size_t>(i) * n - static_cast<std::size_t>(i) * (i + 1) / 2 +
           static_cast<std::size_t>(j);
}

constexpr std::size_t tri_size(int n) {
    return static_cast<std::size_t>(n) * (n + 1) / 2;
}

// Real-arithmetic tallies for the elimination kernel. Multiplications and
// additions cover only elimination arithmetic (the FLOPS metric); pivot
// reciprocals and per-term root reciprocals are tracked separately.
struct OpCounters {
    std::uint64_t mults = 0;
    std::uint64_t adds = 0;
    std::uint64_t recips = 0;
    std::uint64_t rsqrts = 0;

    OpCounters& operator+=(const OpCounters& o) {
        mults += o.mults;
        adds += o.adds;
        recips += o.recips;
        rsqrts += o.rsqrts;
        return *this;
    }
};

// Determinant of a Hermitian positive definite matrix by elimination on
// the upper triangle: per pivot, one reciprocal replaces per-element
// division, row scale factors are full complex multiplies, and diagonal
// updates compute the real part only (the imaginary part is identically
// zero and never touched). The input triangle is clobbered.
//
// Tally per dim-n call: mults + adds = (4n^3 + 3n^2 - 4n) / 3, recips = n-1.
// Throws BreakdownError with the pivot row when a pivot is not positive.
template <int W>
Wide<W> hermitian_det_fixed(HermitianFixed<W>& m, unsigned f, OpCounters& counters);

// Same pivot algorithm in double precision (oracle and bound estimation).
// Throws PrecisionError on a non-finite intermediate or result.
double hermitian_det_float(HermitianFloat m);

extern template Wide<2> hermitian_det_fixed<2>(HermitianFixed<2>&, unsigned, OpCounters&);
extern template Wide<4> hermitian_det_fixed<4>(HermitianFixed<4>&, unsigned, OpCounters&);

} // namespace torfp

#endif
