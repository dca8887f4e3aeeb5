#ifndef TORFP_MATRIX_IO_HPP
#define TORFP_MATRIX_IO_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "torfp/errors.hpp"

namespace torfp {

// Block-symmetric input matrix A = [[A00, A01], [conj(A01), conj(A00)]]
// over N modes, stored as the two upper triangles only. A00 is Hermitian,
// A01 symmetric; the full 2N x 2N matrix those blocks induce is Hermitian.
// quant_bits 16/32 tags entries that sit exactly on the q / 2^(bits-1)
// lattice (as produced by the binary format); 0 means free doubles.
struct InputMatrix {
    int n_modes = 0;
    int quant_bits = 0;
    std::vector<std::complex<double>> a00; // upper triangle, row-major
    std::vector<std::complex<double>> a01; // upper triangle, row-major

    std::complex<double> a00_at(int i, int j) const; // any (i,j), conjugate rule applied
    std::complex<double> a01_at(int i, int j) const; // any (i,j), symmetric rule applied
};

// Detector click pattern over M modes; bit k (LSB order) = mode k clicked.
struct ClickPattern {
    std::uint64_t bits = 0;
    int modes = 0;

    int clicks() const;
};

enum class MatrixFormat { Text, Binary };

// Lossy midpoint quantization to a global 2^(bits-1) lattice; round half
// away from zero, clamped to +/-(2^(bits-1) - 1). Requires |x| < 1.
std::int64_t quantize(double x, int bits);
double dequantize(std::int64_t q, int bits);

// Serialized forms. Binary: magic "GBSA", version u16(LE), modes u32(LE),
// quant_bits u8, then the A00 and A01 triangles as (re, im) interleaved
// signed little-endian quant_bits integers. Text: lossless doubles, header
// "GBSA text 1" / "modes N", one "re im" pair per line, A00 then A01.
std::vector<std::uint8_t> save_matrix(const InputMatrix& a, MatrixFormat format,
                                      int quant_bits = 16);
InputMatrix load_matrix(const std::vector<std::uint8_t>& bytes, MatrixFormat format);

void save_matrix_file(const InputMatrix& a, const std::string& path, MatrixFormat format,
                      int quant_bits = 16);
InputMatrix load_matrix_file(const std::string& path); // format sniffed from the magic

// Dense 2N x 2N reconstruction, row-major.
std::vector<std::complex<double>> to_dense(const InputMatrix& a);

struct SymmetryReport {
    double hermitian_dev = 0.0; // max |A - A^H| element
    double a01_sym_dev = 0.0;   // max |A01 - A01^T| element
    double block_conj_dev = 0.0; // max |A00 - conj(A11)| element
    double tolerance = 1e-12;
    bool pass = false;
};

SymmetryReport check_symmetries(const std::vector<std::complex<double>>& dense, int two_n);

// Synthetic instance A = delta*I + gamma*H with the exact block symmetries
// built in; gamma is set from H's Gershgorin radius so the spectrum stays
// inside (a_target - spread, a_target + spread). Deterministic in seed
// (xoshiro256** stream, splitmix64-seeded; see README).
InputMatrix generate_instance(int n_modes, double a_target, double spread, std::uint64_t seed);

// Principal submatrix over the clicked modes, block structure preserved.
InputMatrix extract_submatrix(const InputMatrix& a_full, ClickPattern s);

} // namespace torfp

#endif
