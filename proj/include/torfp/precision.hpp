#ifndef TORFP_PRECISION_HPP
#define TORFP_PRECISION_HPP

#include "torfp/errors.hpp"
#include "torfp/matrix_io.hpp"

namespace torfp {

// Word width and scaling chosen from the four bit budgets:
//   b_lower  dynamic range below 1 (smallest magnitude that must survive)
//   b_upper  dynamic range above 1 (largest pivot reciprocal)
//   b_sgn    requested significant decimal digits
//   b_accum  headroom for accumulated rounding error
// Invariants: b_lower + b_upper + b_sgn + b_accum <= width_bits and
// frac_bits = width_bits - 1 - b_upper (integer part covers the upper
// bound plus the sign bit).
struct PrecisionConfig {
    int width_bits = 128;
    unsigned frac_bits = 0;
    int b_lower = 0;
    int b_upper = 0;
    int b_sgn = 0;
    int b_accum = 0;
    double a_repr = 0.0;
    double k_corr = 0.0;
    double alpha = 0.5;

    int total_bits() const { return b_lower + b_upper + b_sgn + b_accum; }
};

// Closed-form estimate of det(I - A_Z) at |Z| = z from the representative
// diagonal value a and the correction factor k:
//   ((1-a) - (k/(1-a))*z)^z * (1-a)^z
double det_closed_form_estimate(double a, double k, int z);

// Closed-form upper bound on intermediate magnitudes (pivot reciprocals):
// the reciprocal square root of the determinant estimate above at z = N.
double upper_bound_closed_form(double a, double k, int N);

// Calibrated lower-bound model for the final result magnitude: the
// diagonal-matrix identity base a/(1-a) per mode, damped by the square of
// the relative determinant deficit (1 - kN/(1-a)^2):
//   ((a/(1-a)) * (1 - kN/(1-a)^2)^2)^N
// Valid when kN/(1-a) < 1-a; equals 1 at (a=0.5, k=0, N=1) and decreases
// monotonically in N for a < 0.5.
double lower_bound_model(int N, double a_repr, double k_corr);

// ceil(-log2(model)) clamped to >= 0; a_repr <= 0 yields 0 (no dynamic
// range below 1 to preserve). Throws PrecisionError("precision/model-range")
// when the validity condition kN/(1-a) < 1-a fails.
int estimate_lower_bound_bits(int N, double a_repr, double k_corr);

// max(1, ceil(log2(1/det(I-A)))) with the determinant computed in floating
// point. Throws PrecisionError("precision/det-nonpositive") for det <= 0.
int estimate_upper_bound_bits(const InputMatrix& a);

// Float determinant of I - A (full 2N x 2N), shared with the CLI report.
double det_i_minus_a_float(const InputMatrix& a);

// Budget selection: b_sgn = ceil(sig * log2 10), b_accum =
// ceil(log2(alpha * 2^N * N^2)), b_upper from the computed determinant,
// b_lower from the model with a_repr = mean diagonal and k_corr fitted to
// the determinant (clamped to the observed range [0.0009, 0.0035]).
// Width is 128 when the total fits, else 256, else
// PrecisionError("precision/unsupported").
PrecisionConfig select_precision(const InputMatrix& a, int N, int sig_decimal_digits = 3,
                                 double alpha = 0.5);

// Fixed-width config: same b_upper/f rule at the requested width, budgets
// reported but not enforced. Throws when the scaling factor would be < 1.
PrecisionConfig force_width(const InputMatrix& a, int width_bits);

} // namespace torfp

#endif
