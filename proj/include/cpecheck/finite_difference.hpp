#pragma once

// Finite-difference fallback for derivative jets.
//
// Each mixed partial d^a f is approximated by a tensor product of
// second-order central stencils (one per axis, sized to that axis' derivative
// order) with step h, then one level of Richardson extrapolation with h/2:
//     D = (4 D(h/2) - D(h)) / 3,
// which cancels the h^2 term of the even error expansion.

#include <functional>

#include "cpecheck/expr.hpp"
#include "cpecheck/jet.hpp"

namespace cpecheck {

inline constexpr double kDefaultFdStep = 1e-2;

/// Jet of `f` at x to total order `order`, with all Taylor coefficients
/// recovered from finite differences.
Jet fd_jet(const std::function<double(const Point&)>& f, const Point& x, int order,
           double h = kDefaultFdStep);

}  // namespace cpecheck
