// Internal: eigendecomposition of real symmetric tridiagonal matrices via
// LAPACK dstevr (MRRR), O(n^2) for the full eigenbasis.

#pragma once

#include "bjj/model.hpp"

namespace bjj::detail {

struct TridiagonalEigen {
    RVector values;   // ascending
    RMatrix vectors;  // columns
};

TridiagonalEigen tridiagonal_eigen(const RVector& diagonal, const RVector& offdiagonal);

}  // namespace bjj::detail
