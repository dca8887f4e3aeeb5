#ifndef TORFP_FLOPS_HPP
#define TORFP_FLOPS_HPP

#include <cstdint>
#include <string>

#include "torfp/errors.hpp"

namespace torfp {

// Multiplies + additions of one d x d Hermitian factorization:
// (4d^3 + 3d^2 - 4d)/3, always integral for even and odd d alike.
std::uint64_t factorization_op_count(int dim);

// Total multiplies + additions over all 2^N - 1 subset factorizations,
// sum over z of C(N,z) * factorization_op_count(2z). Exact in 128-bit
// integer arithmetic for N <= 60.
unsigned __int128 total_op_count(int n_modes);

std::string decimal_string(unsigned __int128 v);

} // namespace torfp

#endif
