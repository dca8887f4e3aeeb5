#include "torfp/precision.hpp"

#include <algorithm>
#include <cmath>

#include "torfp/linalg.hpp"

namespace torfp {

namespace {

constexpr double kCorrMin = 0.0009;
constexpr double kCorrMax = 0.0035;

HermitianFloat i_minus_a_upper(const InputMatrix& a) {
    const int n = a.n_modes;
    const int d = 2 * n;
    HermitianFloat m;
    m.dim = d;
    m.upper.resize(tri_size(d));
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            std::complex<double> v;
            if (j < n) v = a.a00_at(i, j);
            else if (i < n) v = a.a01_at(i, j - n);
            else v = std::conj(a.a00_at(i - n, j - n));
            m.upper[tri_index(d, i, j)] = (i == j) ? 1.0 - v : -v;
        }
    return m;
}

} // namespace

double det_i_minus_a_float(const InputMatrix& a) {
    return hermitian_det_float(i_minus_a_upper(a));
}

double det_closed_form_estimate(double a, double k, int z) {
    const double one_minus_a = 1.0 - a;
    const double inner = one_minus_a - (k / one_minus_a) * z;
    return std::pow(inner * one_minus_a, z);
}

double upper_bound_closed_form(double a, double k, int N) {
    const double det = det_closed_form_estimate(a, k, N);
    if (!(det > 0.0))
        throw PrecisionError("precision/model-range", "determinant estimate not positive");
    return 1.0 / std::sqrt(det);
}

double lower_bound_model(int N, double a_repr, double k_corr) {
    const double one_minus_a = 1.0 - a_repr;
    const double base =
        (a_repr / one_minus_a) * std::pow(1.0 - k_corr * N / (one_minus_a * one_minus_a), 2);
    return std::exp2(N * std::log2(base));
}

int estimate_lower_bound_bits(int N, double a_repr, double k_corr) {
    if (N < 1) throw InvalidArgument("precision/range", "N must be >= 1");
    if (a_repr <= 0.0) return 0;
    if (!(a_repr < 1.0))
        throw PrecisionError("precision/model-range", "representative diagonal must be < 1");
    const double one_minus_a = 1.0 - a_repr;
    if (!(k_corr * N / one_minus_a < one_minus_a))
        throw PrecisionError("precision/model-range",
                             "correction term leaves the model's validity domain");
    const double base =
        (a_repr / one_minus_a) * std::pow(1.0 - k_corr * N / (one_minus_a * one_minus_a), 2);
    const double bits = -static_cast<double>(N) * std::log2(base);
    return std::max(0, static_cast<int>(std::ceil(bits)));
}

int estimate_upper_bound_bits(const InputMatrix& a) {
    const double det = det_i_minus_a_float(a);
    if (!(det > 0.0))
        throw PrecisionError("precision/det-nonpositive", "det(I-A) must be positive");
    return std::max(1, static_cast<int>(std::ceil(-std::log2(det))));
}

PrecisionConfig select_precision(const InputMatrix& a, int N, int sig_decimal_digits,
                                 double alpha) {
    if (N < 1) throw InvalidArgument("precision/range", "N must be >= 1");
    if (sig_decimal_digits < 1)
        throw InvalidArgument("precision/range", "need at least one significant digit");
    if (!(alpha > 0.0)) throw InvalidArgument("precision/range", "alpha must be positive");

    PrecisionConfig c;
    c.alpha = alpha;
    c.b_sgn = static_cast<int>(std::ceil(sig_decimal_digits * std::log2(10.0)));
    c.b_accum = static_cast<int>(std::ceil(std::log2(alpha) + N + 2.0 * std::log2(N)));
    c.b_upper = estimate_upper_bound_bits(a);

    double diag_sum = 0.0;
    for (int i = 0; i < a.n_modes; ++i) diag_sum += a.a00_at(i, i).real();
    c.a_repr = diag_sum / a.n_modes;

    // One-point fit of the determinant estimate at z = N, which collapses
    // to det^(1/N) = (1-a)^2 - kN; solved for k and clamped to the observed
    // range. Non-finite intermediates fall back to the conservative maximum.
    const double det = det_i_minus_a_float(a);
    double k_fit = kCorrMax;
    if (c.a_repr > 0.0 && c.a_repr < 1.0) {
        const double one_minus_a = 1.0 - c.a_repr;
        const double fitted =
            (one_minus_a * one_minus_a - std::pow(det, 1.0 / N)) / N;
        if (std::isfinite(fitted)) k_fit = fitted;
    }
    c.k_corr = std::clamp(k_fit, kCorrMin, kCorrMax);

    c.b_lower = estimate_lower_bound_bits(N, c.a_repr, c.k_corr);

    const int B = c.total_bits();
    if (B <= 128) c.width_bits = 128;
    else if (B <= 256) c.width_bits = 256;
    else
        throw PrecisionError("precision/unsupported",
                             "required bit budget exceeds 256 bits (B = " + std::to_string(B) +
                                 ")");
    c.frac_bits = static_cast<unsigned>(c.width_bits - 1 - c.b_upper);
    return c;
}

PrecisionConfig force_width(const InputMatrix& a, int width_bits) {
    if (width_bits != 128 && width_bits != 256)
        throw InvalidArgument("precision/range", "width must be 128 or 256");
    PrecisionConfig c;
    c.width_bits = width_bits;
    c.b_sgn = static_cast<int>(std::ceil(3 * std::log2(10.0)));
    c.b_upper = estimate_upper_bound_bits(a);
    const int N = a.n_modes;
    c.b_accum = static_cast<int>(std::ceil(std::log2(0.5) + N + 2.0 * std::log2(N)));
    double diag_sum = 0.0;
    for (int i = 0; i < N; ++i) diag_sum += a.a00_at(i, i).real();
    c.a_repr = diag_sum / N;
    c.k_corr = kCorrMax;
    const int f = width_bits - 1 - c.b_upper;
    if (f < 1)
        throw PrecisionError("precision/scaling",
                             "upper bound leaves no room for fraction bits at this width");
    c.frac_bits = static_cast<unsigned>(f);
    // b_lower is informational here; out-of-domain models just report 0.
    try {
        c.b_lower = estimate_lower_bound_bits(N, c.a_repr, c.k_corr);
    } catch (const PrecisionError&) {
        c.b_lower = 0;
    }
    return c;
}

} // namespace torfp
