#include "tridiagonal.hpp"

#include <lapacke.h>

#include <stdexcept>
#include <string>
#include <vector>

namespace bjj::detail {

TridiagonalEigen tridiagonal_eigen(const RVector& diagonal, const RVector& offdiagonal) {
    const auto n = static_cast<lapack_int>(diagonal.size());
    if (n == 0 || offdiagonal.size() + 1 != diagonal.size()) {
        throw std::invalid_argument("tridiagonal_eigen: inconsistent sizes");
    }
    TridiagonalEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    if (n == 1) {
        out.values[0] = diagonal[0];
        out.vectors(0, 0) = 1.0;
        return out;
    }
    RVector d = diagonal;
    // dstevr wants e of length n (last entry is workspace).
    RVector e(n);
    e.head(n - 1) = offdiagonal;
    e[n - 1] = 0.0;
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'A', n, d.data(), e.data(), 0.0, 0.0, 0, 0,
                                           0.0, &found, out.values.data(), out.vectors.data(), n, isuppz.data());
    if (info != 0 || found != n) {
        throw std::runtime_error("tridiagonal_eigen: dstevr failed (info=" + std::to_string(info) + ")");
    }
    return out;
}

}  // namespace bjj::detail
