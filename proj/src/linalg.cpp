#include "torfp/linalg.hpp"

#include <cmath>

namespace torfp {

template <int W>
Wide<W> hermitian_det_fixed(HermitianFixed<W>& m, unsigned f, OpCounters& counters) {
    const int n = m.dim;
    auto* a = m.upper.data();
    const auto at = [&](int i, int j) -> ComplexVal<Wide<W>>& {
        return a[tri_index(n, i, j)];
    };

    Wide<W> det = fp_one<W>(f);
    for (int k = 0; k < n; ++k) {
        const Wide<W> pivot = at(k, k).re;
        if (fp_is_negative(pivot) || fp_is_zero(pivot))
            throw BreakdownError("linalg/breakdown", "non-positive pivot in elimination",
                                 static_cast<std::size_t>(k));
        det = fp_mul(det, pivot, f);
        counters.mults += 1;
        if (k == n - 1) break;

        const Wide<W> pinv = fp_recip(pivot, f);
        counters.recips += 1;

        for (int i = k + 1; i < n; ++i) {
            // Row scale s_i = conj(a_ki) * (pinv + 0i), done as a full
            // complex multiply so the uniform kernel is what gets counted.
            const ComplexVal<Wide<W>>& aki = at(k, i);
            const Wide<W> aki_im_neg = fp_neg(aki.im);
            ComplexVal<Wide<W>> s;
            s.re = fp_sub(fp_mul(aki.re, pinv, f), fp_mul(aki_im_neg, Wide<W>{}, f));
            s.im = fp_add(fp_mul(aki.re, Wide<W>{}, f), fp_mul(aki_im_neg, pinv, f));
            counters.mults += 4;
            counters.adds += 2;

            // Diagonal: a_ii -= s_i * a_ki, a real quantity; only the real
            // part is computed so the diagonal stays exactly real.
            Wide<W>& dii = at(i, i).re;
            const Wide<W> prod_re = fp_sub(fp_mul(s.re, aki.re, f), fp_mul(s.im, aki.im, f));
            dii = fp_sub(dii, prod_re);
            counters.mults += 2;
            counters.adds += 2;

            // Off-diagonal trailing row: a_ij -= s_i * a_kj, j > i.
            for (int j = i + 1; j < n; ++j) {
                const ComplexVal<Wide<W>> akj = at(k, j);
                ComplexVal<Wide<W>>& aij = at(i, j);
                const Wide<W> p_re = fp_sub(fp_mul(s.re, akj.re, f), fp_mul(s.im, akj.im, f));
                const Wide<W> p_im = fp_add(fp_mul(s.re, akj.im, f), fp_mul(s.im, akj.re, f));
                aij.re = fp_sub(aij.re, p_re);
                aij.im = fp_sub(aij.im, p_im);
                counters.mults += 4;
                counters.adds += 4;
            }
        }
    }
    return det;
}

template Wide<2> hermitian_det_fixed<2>(HermitianFixed<2>&, unsigned, OpCounters&);
template Wide<4> hermitian_det_fixed<4>(HermitianFixed<4>&, unsigned, OpCounters&);

double hermitian_det_float(HermitianFloat m) {
    const int n = m.dim;
    auto* a = m.upper.data();
    const auto at = [&](int i, int j) -> std::complex<double>& {
        return a[tri_index(n, i, j)];
    };

    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        const double pivot = at(k, k).real();
        det *= pivot;
        if (k == n - 1) break;
        const double pinv = 1.0 / pivot;
        for (int i = k + 1; i < n; ++i) {
            const std::complex<double> s = std::conj(at(k, i)) * pinv;
            at(i, i) -= std::complex<double>((s * at(k, i)).real(), 0.0);
            for (int j = i + 1; j < n; ++j) at(i, j) -= s * at(k, j);
        }
    }
    if (!std::isfinite(det))
        throw PrecisionError("linalg/nonfinite", "non-finite determinant in float elimination");
    return det;
}

} // namespace torfp
