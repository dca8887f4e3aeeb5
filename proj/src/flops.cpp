#include "torfp/flops.hpp"

#include <algorithm>

#include "torfp/subsets.hpp"

namespace torfp {

std::uint64_t factorization_op_count(int dim) {
    if (dim < 1 || dim > 1000) throw InvalidArgument("subsets/range", "dimension out of range");
    const std::uint64_t d = static_cast<std::uint64_t>(dim);
    return (4 * d * d * d + 3 * d * d - 4 * d) / 3;
}

unsigned __int128 total_op_count(int n_modes) {
    if (n_modes < 1 || n_modes > 60)
        throw InvalidArgument("subsets/range", "mode count must be in [1, 60]");
    constexpr unsigned __int128 kMax = ~static_cast<unsigned __int128>(0);
    unsigned __int128 total = 0;
    for (int z = 1; z <= n_modes; ++z) {
        const unsigned __int128 count = binom(n_modes, z);
        const unsigned __int128 per = factorization_op_count(2 * z);
        if (count != 0 && per > kMax / count)
            throw InvalidArgument("subsets/overflow", "operation count overflows");
        const unsigned __int128 term = count * per;
        if (total > kMax - term)
            throw InvalidArgument("subsets/overflow", "operation count overflows");
        total += term;
    }
    return total;
}

std::string decimal_string(unsigned __int128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

} // namespace torfp
