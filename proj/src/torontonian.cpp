#include "torfp/torontonian.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <thread>
#include <vector>

namespace torfp {

namespace {

// Modes selected by mask, ascending; bit (N-1-j) means mode j.
void selected_modes(SubsetMask mask, int N, std::vector<int>& sel) {
    sel.clear();
    for (int j = 0; j < N; ++j)
        if (mask >> (N - 1 - j) & 1) sel.push_back(j);
}

// Entry (p, q) of A_Z for p <= q, in the (modes, modes+N) block layout.
std::complex<double> az_entry(const InputMatrix& a, const std::vector<int>& sel, int z, int p,
                              int q) {
    if (q < z) return a.a00_at(sel[p], sel[q]);
    if (p < z) return a.a01_at(sel[p], sel[q - z]);
    return std::conj(a.a00_at(sel[p - z], sel[q - z]));
}

HermitianFloat i_minus_az_float(const InputMatrix& a, const std::vector<int>& sel) {
    const int z = static_cast<int>(sel.size());
    const int d = 2 * z;
    HermitianFloat m;
    m.dim = d;
    m.upper.resize(tri_size(d));
    for (int p = 0; p < d; ++p)
        for (int q = p; q < d; ++q) {
            const auto v = az_entry(a, sel, z, p, q);
            m.upper[tri_index(d, p, q)] = (p == q) ? 1.0 - v.real() : -v;
        }
    return m;
}

} // namespace

template <int W>
void extract_i_minus_az(const InputMatrix& a, SubsetMask mask, unsigned f,
                        HermitianFixed<W>& out) {
    thread_local std::vector<int> sel;
    selected_modes(mask, a.n_modes, sel);
    const int z = static_cast<int>(sel.size());
    const int d = 2 * z;
    out.dim = d;
    out.upper.resize(tri_size(d));
    for (int p = 0; p < d; ++p)
        for (int q = p; q < d; ++q) {
            const auto v = az_entry(a, sel, z, p, q);
            auto& e = out.upper[tri_index(d, p, q)];
            if (p == q) {
                e.re = fp_from_real<W>(1.0 - v.real(), f);
                e.im = Wide<W>{};
            } else {
                e.re = fp_from_real<W>(-v.real(), f);
                e.im = fp_from_real<W>(-v.imag(), f);
            }
        }
}

template void extract_i_minus_az<2>(const InputMatrix&, SubsetMask, unsigned,
                                    HermitianFixed<2>&);
template void extract_i_minus_az<4>(const InputMatrix&, SubsetMask, unsigned,
                                    HermitianFixed<4>&);

template <int W>
Wide<W> torontonian_partial(const InputMatrix& a, const WorkAssignment& w,
                            const PrecisionConfig& cfg, OpCounters& counters) {
    const int N = w.modes;
    const unsigned f = cfg.frac_bits;
    Wide<W> acc{};
    HermitianFixed<W> scratch;

    for (int z = 1; z <= N; ++z) {
        const CountRange& r = w.ranges[static_cast<std::size_t>(z - 1)];
        SubsetMask mask = r.start_mask;
        for (std::uint64_t t = 0; t < r.count; ++t, mask = get_next_mask(mask)) {
            extract_i_minus_az(a, mask, f, scratch);
            Wide<W> root;
            try {
                const Wide<W> det = hermitian_det_fixed(scratch, f, counters);
                root = fp_rsqrt(det, f);
                counters.rsqrts += 1;
            } catch (BreakdownError& e) {
                e.set_subset_mask(mask);
                throw;
            }
            // Accumulator adds are exact and excluded from the FLOPS tally.
            acc = ((N - z) & 1) ? fp_sub(acc, root) : fp_add(acc, root);
        }
    }
    if (w.rank == 0) {
        const Wide<W> one = fp_one<W>(f);
        acc = (N & 1) ? fp_sub(acc, one) : fp_add(acc, one);
    }
    return acc;
}

template Wide<2> torontonian_partial<2>(const InputMatrix&, const WorkAssignment&,
                                        const PrecisionConfig&, OpCounters&);
template Wide<4> torontonian_partial<4>(const InputMatrix&, const WorkAssignment&,
                                        const PrecisionConfig&, OpCounters&);

namespace {

template <int W>
void run_engine(const InputMatrix& a, const PrecisionConfig& cfg, int workers,
                TorontonianResult& out) {
    const int N = a.n_modes;
    std::vector<Wide<W>> partials(static_cast<std::size_t>(workers));
    std::vector<OpCounters> counters(static_cast<std::size_t>(workers));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));

    const auto work = [&](int rank) {
        try {
            const WorkAssignment w = partition(N, rank, workers);
            partials[rank] = torontonian_partial<W>(a, w, cfg, counters[rank]);
        } catch (...) {
            errors[rank] = std::current_exception();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int rank = 1; rank < workers; ++rank) pool.emplace_back(work, rank);
    work(0);
    for (auto& t : pool) t.join();

    for (int rank = 0; rank < workers; ++rank)
        if (errors[rank]) std::rethrow_exception(errors[rank]);

    Wide<W> acc{};
    for (int rank = 0; rank < workers; ++rank) {
        acc = fp_add(acc, partials[rank]);
        out.counters += counters[rank];
    }

    out.raw.width_bits = 64 * W;
    for (int i = 0; i < W; ++i) out.raw.limbs[static_cast<std::size_t>(i)] = acc.w[i];
    out.value = fp_to_real(acc, cfg.frac_bits);
}

} // namespace

TorontonianResult torontonian(const InputMatrix& a, PrecisionChoice precision, int workers) {
    const int N = a.n_modes;
    if (N < 1 || N > 40)
        throw InvalidArgument("torontonian/range", "engine supports 1 <= N <= 40");
    const auto sym = check_symmetries(to_dense(a), 2 * N);
    if (!sym.pass)
        throw Error("torontonian/symmetry", "input violates the block symmetries");

    if (workers <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        workers = hw ? static_cast<int>(hw) : 1;
    }
    workers = std::min(workers, 256);

    TorontonianResult out;
    out.config = precision == PrecisionChoice::Auto
                     ? select_precision(a, N)
                     : force_width(a, precision == PrecisionChoice::Bits128 ? 128 : 256);
    out.term_count = std::uint64_t(1) << N;
    out.workers = workers;

    const auto t0 = std::chrono::steady_clock::now();
    if (out.config.width_bits == 128) run_engine<2>(a, out.config, workers, out);
    else run_engine<4>(a, out.config, workers, out);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

double torontonian_reference(const InputMatrix& a) {
    const int N = a.n_modes;
    if (N < 1 || N > 20)
        throw InvalidArgument("torontonian/range", "reference path supports 1 <= N <= 20");

    double acc = (N & 1) ? -1.0 : 1.0; // empty-set term
    std::vector<int> sel;
    for (int z = 1; z <= N; ++z) {
        const std::uint64_t total = binom(N, z);
        SubsetMask mask = get_kth_mask(N, z, 0);
        for (std::uint64_t t = 0; t < total; ++t, mask = get_next_mask(mask)) {
            selected_modes(mask, N, sel);
            const double det = hermitian_det_float(i_minus_az_float(a, sel));
            const double term = 1.0 / std::sqrt(det);
            if (!std::isfinite(term))
                throw PrecisionError("torontonian/nonfinite",
                                     "non-finite term in reference summation");
            acc += ((N - z) & 1) ? -term : term;
        }
    }
    return acc;
}

double probability(const InputMatrix& a_full, ClickPattern s, int workers) {
    const double det = det_i_minus_a_float(a_full);
    if (!(det > 0.0))
        throw Error("torontonian/invalid-state", "det(I - A) must be positive");
    if (s.clicks() == 0) return std::sqrt(det);
    const InputMatrix sub = extract_submatrix(a_full, s);
    return torontonian(sub, PrecisionChoice::Auto, workers).value * std::sqrt(det);
}

double probability_reference(const InputMatrix& a_full, ClickPattern s) {
    const double det = det_i_minus_a_float(a_full);
    if (!(det > 0.0))
        throw Error("torontonian/invalid-state", "det(I - A) must be positive");
    if (s.clicks() == 0) return std::sqrt(det);
    return torontonian_reference(extract_submatrix(a_full, s)) * std::sqrt(det);
}

} // namespace torfp
