#include "exp_poly.hpp"
#include "heatdens/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace heatdens::simd::detail {
namespace {

namespace c = expc;

inline __m256d exp256(__m256d x) {
  const __m256d cut = _mm256_set1_pd(c::lower_cut);
  const __m256d keep = _mm256_cmp_pd(x, cut, _CMP_GE_OQ);
  x = _mm256_max_pd(x, cut);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(c::log2e)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(c::ln2_hi), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(c::ln2_lo), r);
  __m256d p = _mm256_set1_pd(c::c[13]);
  for (int i = 12; i >= 0; --i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c::c[i]));
  const __m256d biased = _mm256_add_pd(_mm256_add_pd(n, _mm256_set1_pd(1023.0)),
                                       _mm256_set1_pd(c::shifter));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_castpd_si256(biased), 52));
  return _mm256_and_pd(_mm256_mul_pd(p, scale), keep);
}

// Scalar twin of exp256 for loop remainders, so one variant uses a single
// exponential throughout.
inline double exp1(double x) {
  if (!(x >= c::lower_cut)) return 0.0;
  const double n = std::nearbyint(x * c::log2e);
  double r = std::fma(-n, c::ln2_hi, x);
  r = std::fma(-n, c::ln2_lo, r);
  double p = c::c[13];
  for (int i = 12; i >= 0; --i) p = std::fma(p, r, c::c[i]);
  return std::ldexp(p, static_cast<int>(n));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double gaussian_sum(const double* k, const double* s, const double* w, std::size_t n, double u) {
  const __m256d uu = _mm256_set1_pd(u);
  const __m256d mhalf = _mm256_set1_pd(-0.5);
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d z0 = _mm256_mul_pd(_mm256_loadu_pd(k + j), _mm256_sub_pd(uu, _mm256_loadu_pd(s + j)));
    __m256d z1 = _mm256_mul_pd(_mm256_loadu_pd(k + j + 4), _mm256_sub_pd(uu, _mm256_loadu_pd(s + j + 4)));
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + j), exp256(_mm256_mul_pd(mhalf, _mm256_mul_pd(z0, z0))), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(w + j + 4), exp256(_mm256_mul_pd(mhalf, _mm256_mul_pd(z1, z1))), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; j < n; ++j) {
    const double z = k[j] * (u - s[j]);
    acc += w[j] * exp1(-0.5 * (z * z));
  }
  return acc;
}

double quartic_sum(const double* k, const double* s, const double* w, std::size_t n, double u) {
  const __m256d uu = _mm256_set1_pd(u);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d z = _mm256_mul_pd(_mm256_loadu_pd(k + j), _mm256_sub_pd(uu, _mm256_loadu_pd(s + j)));
    const __m256d z2 = _mm256_mul_pd(z, z);
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_loadu_pd(w + j), _mm256_fmadd_pd(z2, z2, one)));
  }
  double total = hsum(acc);
  for (; j < n; ++j) {
    const double z = k[j] * (u - s[j]);
    const double z2 = z * z;
    total += w[j] / std::fma(z2, z2, 1.0);
  }
  return total;
}

double box_sum(const double* k, const double* s, const double* w, std::size_t n, double u) {
  const __m256d uu = _mm256_set1_pd(u);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d z = _mm256_mul_pd(_mm256_loadu_pd(k + j), _mm256_sub_pd(uu, _mm256_loadu_pd(s + j)));
    const __m256d inside = _mm256_cmp_pd(_mm256_andnot_pd(sign, z), one, _CMP_LE_OQ);
    acc = _mm256_add_pd(acc, _mm256_and_pd(inside, _mm256_loadu_pd(w + j)));
  }
  double total = hsum(acc);
  for (; j < n; ++j) {
    const double z = k[j] * (u - s[j]);
    if (std::abs(z) <= 1.0) total += w[j];
  }
  return total;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{gaussian_sum, quartic_sum, box_sum};
  return table;
}

}  // namespace heatdens::simd::detail
