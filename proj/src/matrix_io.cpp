#include "torfp/matrix_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "torfp/linalg.hpp"

namespace torfp {

namespace {

// xoshiro256**: 256-bit-state generator, seeded by splitmix64 expansion.
struct Xoshiro256 {
    std::uint64_t s[4];

    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& si : s) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            si = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = std::rotl(s[1] * 5, 7) * 9;
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = std::rotl(s[3], 45);
        return result;
    }

    double uniform_pm1() { // [-1, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-52 - 1.0;
    }
};

constexpr char kBinaryMagic[4] = {'G', 'B', 'S', 'A'};
constexpr std::uint16_t kBinaryVersion = 1;
constexpr const char* kTextMagic = "GBSA text 1";

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_signed(std::vector<std::uint8_t>& out, std::int64_t v, int bits) {
    const auto u = static_cast<std::uint64_t>(v);
    for (int i = 0; i < bits / 8; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

std::int64_t get_signed(const std::vector<std::uint8_t>& in, std::size_t pos, int bits) {
    std::uint64_t u = 0;
    for (int i = 0; i < bits / 8; ++i) u |= std::uint64_t(in[pos + i]) << (8 * i);
    // sign-extend from `bits`
    const std::uint64_t sign_bit = std::uint64_t(1) << (bits - 1);
    if (u & sign_bit) u |= ~((sign_bit << 1) - 1);
    return static_cast<std::int64_t>(u);
}

std::size_t triangle_entries(int n) { return tri_size(n); }

} // namespace

std::complex<double> InputMatrix::a00_at(int i, int j) const {
    if (i <= j) return a00[tri_index(n_modes, i, j)];
    return std::conj(a00[tri_index(n_modes, j, i)]);
}

std::complex<double> InputMatrix::a01_at(int i, int j) const {
    if (i <= j) return a01[tri_index(n_modes, i, j)];
    return a01[tri_index(n_modes, j, i)];
}

int ClickPattern::clicks() const { return std::popcount(bits); }

std::int64_t quantize(double x, int bits) {
    if (bits != 16 && bits != 32)
        throw InvalidArgument("matrixio/bits", "quantization width must be 16 or 32");
    if (!(std::fabs(x) < 1.0))
        throw InvalidArgument("matrixio/range", "quantization requires |x| < 1");
    const double scale = std::ldexp(1.0, bits - 1);
    const auto q = std::llround(x * scale); // rounds half away from zero
    const std::int64_t lim = static_cast<std::int64_t>(scale) - 1;
    return std::clamp<std::int64_t>(q, -lim, lim);
}

double dequantize(std::int64_t q, int bits) {
    if (bits != 16 && bits != 32)
        throw InvalidArgument("matrixio/bits", "quantization width must be 16 or 32");
    return static_cast<double>(q) * std::ldexp(1.0, -(bits - 1));
}

std::vector<std::uint8_t> save_matrix(const InputMatrix& a, MatrixFormat format,
                                      int quant_bits) {
    if (a.n_modes < 1) throw InvalidArgument("matrixio/dim", "matrix has no modes");
    const std::size_t tri = triangle_entries(a.n_modes);
    if (a.a00.size() != tri || a.a01.size() != tri)
        throw InvalidArgument("matrixio/dim", "triangle storage size mismatch");

    if (format == MatrixFormat::Text) {
        std::string s;
        s += kTextMagic;
        s += '\n';
        s += "modes " + std::to_string(a.n_modes) + '\n';
        char line[64];
        for (const auto* tri_ptr : {&a.a00, &a.a01}) {
            for (const auto& v : *tri_ptr) {
                std::snprintf(line, sizeof line, "%.17g %.17g\n", v.real(), v.imag());
                s += line;
            }
        }
        return {s.begin(), s.end()};
    }

    std::vector<std::uint8_t> out;
    out.reserve(11 + tri * 4 * static_cast<std::size_t>(quant_bits / 8));
    out.insert(out.end(), kBinaryMagic, kBinaryMagic + 4);
    put_u16(out, kBinaryVersion);
    put_u32(out, static_cast<std::uint32_t>(a.n_modes));
    if (quant_bits != 16 && quant_bits != 32)
        throw InvalidArgument("matrixio/bits", "binary format stores 16- or 32-bit entries");
    out.push_back(static_cast<std::uint8_t>(quant_bits));
    for (const auto* tri_ptr : {&a.a00, &a.a01}) {
        for (const auto& v : *tri_ptr) {
            put_signed(out, quantize(v.real(), quant_bits), quant_bits);
            put_signed(out, quantize(v.imag(), quant_bits), quant_bits);
        }
    }
    return out;
}

namespace {

InputMatrix load_binary(const std::vector<std::uint8_t>& b) {
    if (b.size() < 4 || std::memcmp(b.data(), kBinaryMagic, 4) != 0)
        throw ParseError("matrixio/magic", "bad magic, expected GBSA", 0);
    if (b.size() < 6)
        throw ParseError("matrixio/truncated", "file ends inside the version field", 4);
    const std::uint16_t version = static_cast<std::uint16_t>(b[4] | (b[5] << 8));
    if (version != kBinaryVersion)
        throw ParseError("matrixio/version", "unsupported format version", 4);
    if (b.size() < 11)
        throw ParseError("matrixio/truncated", "file ends inside the header", b.size());
    std::uint32_t n = 0;
    for (int i = 0; i < 4; ++i) n |= std::uint32_t(b[6 + i]) << (8 * i);
    const int bits = b[10];
    if (bits != 16 && bits != 32)
        throw ParseError("matrixio/format", "entry width must be 16 or 32 bits", 10);
    if (n < 1 || n > 4096)
        throw ParseError("matrixio/dim", "mode count out of range", 6);

    InputMatrix a;
    a.n_modes = static_cast<int>(n);
    a.quant_bits = bits;
    const std::size_t tri = triangle_entries(a.n_modes);
    const std::size_t bytes_per = static_cast<std::size_t>(bits / 8);
    const std::size_t need = 11 + tri * 4 * bytes_per;
    if (b.size() < need)
        throw ParseError("matrixio/truncated", "file ends inside the entry data", b.size());

    std::size_t pos = 11;
    const auto read_tri = [&](std::vector<std::complex<double>>& dst) {
        dst.resize(tri);
        for (auto& v : dst) {
            const double re = dequantize(get_signed(b, pos, bits), bits);
            pos += bytes_per;
            const double im = dequantize(get_signed(b, pos, bits), bits);
            pos += bytes_per;
            v = {re, im};
        }
    };
    read_tri(a.a00);
    read_tri(a.a01);
    return a;
}

InputMatrix load_text(const std::vector<std::uint8_t>& b) {
    std::istringstream in(std::string(b.begin(), b.end()));
    std::string line;
    std::size_t lineno = 0;

    const auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };

    if (!next_line() || line != kTextMagic)
        throw ParseError("matrixio/magic", "first line must be 'GBSA text 1'", 1);
    if (!next_line())
        throw ParseError("matrixio/truncated", "missing 'modes N' line", lineno + 1);
    int n = 0;
    if (std::sscanf(line.c_str(), "modes %d", &n) != 1 || n < 1 || n > 4096)
        throw ParseError("matrixio/dim", "expected 'modes N' with 1 <= N <= 4096", lineno);

    InputMatrix a;
    a.n_modes = n;
    a.quant_bits = 0;
    const std::size_t tri = triangle_entries(n);
    const auto read_tri = [&](std::vector<std::complex<double>>& dst) {
        dst.resize(tri);
        for (auto& v : dst) {
            if (!next_line())
                throw ParseError("matrixio/truncated", "file ends inside the entry list",
                                 lineno + 1);
            double re = 0, im = 0;
            if (std::sscanf(line.c_str(), "%lf %lf", &re, &im) != 2)
                throw ParseError("matrixio/entry", "expected 're im' pair", lineno);
            if (!(std::fabs(re) < 1.0) || !(std::fabs(im) < 1.0))
                throw ParseError("matrixio/range", "entry magnitudes must be < 1", lineno);
            v = {re, im};
        }
    };
    read_tri(a.a00);
    read_tri(a.a01);
    return a;
}

} // namespace

InputMatrix load_matrix(const std::vector<std::uint8_t>& bytes, MatrixFormat format) {
    return format == MatrixFormat::Binary ? load_binary(bytes) : load_text(bytes);
}

void save_matrix_file(const InputMatrix& a, const std::string& path, MatrixFormat format,
                      int quant_bits) {
    const auto bytes = save_matrix(a, format, quant_bits);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("matrixio/io", "cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("matrixio/io", "write failed: " + path);
}

InputMatrix load_matrix_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("matrixio/io", "cannot open for reading: " + path);
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(f),
                                    std::istreambuf_iterator<char>()};
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kBinaryMagic, 4) == 0 &&
        !(bytes.size() >= 5 && bytes[4] == ' '))
        return load_binary(bytes);
    return load_text(bytes);
}

std::vector<std::complex<double>> to_dense(const InputMatrix& a) {
    const int n = a.n_modes;
    const int d = 2 * n;
    std::vector<std::complex<double>> m(static_cast<std::size_t>(d) * d);
    const auto set = [&](int i, int j, std::complex<double> v) {
        m[static_cast<std::size_t>(i) * d + j] = v;
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const auto v00 = a.a00_at(i, j);
            const auto v01 = a.a01_at(i, j);
            set(i, j, v00);
            set(i, n + j, v01);
            set(n + i, j, std::conj(v01));
            set(n + i, n + j, std::conj(v00));
        }
    }
    return m;
}

SymmetryReport check_symmetries(const std::vector<std::complex<double>>& dense, int two_n) {
    if (two_n < 2 || two_n % 2 != 0 ||
        dense.size() != static_cast<std::size_t>(two_n) * two_n)
        throw InvalidArgument("matrixio/dim", "dense matrix must be 2N x 2N");
    const int n = two_n / 2;
    const auto at = [&](int i, int j) { return dense[static_cast<std::size_t>(i) * two_n + j]; };

    SymmetryReport r;
    for (int i = 0; i < two_n; ++i)
        for (int j = 0; j < two_n; ++j)
            r.hermitian_dev = std::max(r.hermitian_dev, std::abs(at(i, j) - std::conj(at(j, i))));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            r.a01_sym_dev = std::max(r.a01_sym_dev, std::abs(at(i, n + j) - at(j, n + i)));
            r.block_conj_dev =
                std::max(r.block_conj_dev, std::abs(at(i, j) - std::conj(at(n + i, n + j))));
        }
    r.pass = r.hermitian_dev <= r.tolerance && r.a01_sym_dev <= r.tolerance &&
             r.block_conj_dev <= r.tolerance;
    return r;
}

InputMatrix generate_instance(int n_modes, double a_target, double spread, std::uint64_t seed) {
    if (n_modes < 1) throw InvalidArgument("matrixio/dim", "need at least one mode");
    if (!(a_target > 0.0 && a_target < 1.0))
        throw InvalidArgument("matrixio/range", "a_target must lie in (0,1)");
    if (!(spread >= 0.0 && a_target - spread > 0.0 && a_target + spread < 1.0))
        throw InvalidArgument("matrixio/range", "spread leaves (0,1)");

    Xoshiro256 rng(seed);
    const int n = n_modes;
    const std::size_t tri = triangle_entries(n);

    // Random H with the block symmetries: H00 Hermitian, H01 symmetric.
    std::vector<std::complex<double>> h00(tri), h01(tri);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double re = rng.uniform_pm1();
            const double im = (i == j) ? 0.0 : rng.uniform_pm1();
            h00[tri_index(n, i, j)] = {re, im};
        }
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            h01[tri_index(n, i, j)] = {rng.uniform_pm1(), rng.uniform_pm1()};

    // Gershgorin bound over the full 2N matrix: every eigenvalue of H has
    // magnitude <= max row sum of |H|, so delta + gamma*H keeps its spectrum
    // inside a_target +/- 0.9*spread.
    InputMatrix h;
    h.n_modes = n;
    h.a00 = std::move(h00);
    h.a01 = std::move(h01);
    double max_row = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::abs(h.a00_at(i, j)) + std::abs(h.a01_at(i, j));
        max_row = std::max(max_row, row);
    }
    const double gamma = (spread > 0.0 && max_row > 0.0) ? 0.9 * spread / max_row : 0.0;

    InputMatrix a;
    a.n_modes = n;
    a.quant_bits = 0;
    a.a00.resize(tri);
    a.a01.resize(tri);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const auto idx = tri_index(n, i, j);
            a.a00[idx] = gamma * h.a00[idx];
            if (i == j) a.a00[idx] += a_target;
            a.a01[idx] = gamma * h.a01[idx];
        }
    return a;
}

InputMatrix extract_submatrix(const InputMatrix& a_full, ClickPattern s) {
    if (s.modes != a_full.n_modes)
        throw InvalidArgument("matrixio/dim", "pattern mode count mismatch");
    if (s.clicks() < 1)
        throw InvalidArgument("matrixio/pattern", "empty click pattern");
    std::vector<int> sel;
    for (int k = 0; k < s.modes; ++k)
        if (s.bits >> k & 1) sel.push_back(k);

    InputMatrix out;
    out.n_modes = static_cast<int>(sel.size());
    out.quant_bits = a_full.quant_bits;
    const std::size_t tri = triangle_entries(out.n_modes);
    out.a00.resize(tri);
    out.a01.resize(tri);
    for (int i = 0; i < out.n_modes; ++i)
        for (int j = i; j < out.n_modes; ++j) {
            const auto idx = tri_index(out.n_modes, i, j);
            out.a00[idx] = a_full.a00_at(sel[i], sel[j]);
            out.a01[idx] = a_full.a01_at(sel[i], sel[j]);
        }
    return out;
}

} // namespace torfp
