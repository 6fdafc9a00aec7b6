#pragma once

// Shared constants of the polynomial exponential used by the SIMD kernels.
// Range reduction x = n ln2 + r with |r| <= ln2/2, then a degree-13 Taylor
// polynomial for e^r (truncation error below 5e-18 relative).

namespace heatdens::simd::detail::expc {

inline constexpr double log2e = 1.4426950408889634074;
inline constexpr double ln2_hi = 0.693145751953125;
inline constexpr double ln2_lo = 1.42860682030941723212e-6;
inline constexpr double lower_cut = -708.0;
// 1.5 * 2^52: adding it to a small integer-valued double leaves the integer
// in the low mantissa bits.
inline constexpr double shifter = 6755399441055744.0;

inline constexpr double c[14] = {
    1.0,
    1.0,
    1.0 / 2.0,
    1.0 / 6.0,
    1.0 / 24.0,
    1.0 / 120.0,
    1.0 / 720.0,
    1.0 / 5040.0,
    1.0 / 40320.0,
    1.0 / 362880.0,
    1.0 / 3628800.0,
    1.0 / 39916800.0,
    1.0 / 479001600.0,
    1.0 / 6227020800.0,
};

}  // namespace heatdens::simd::detail::expc
