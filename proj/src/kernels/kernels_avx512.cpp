#include "exp_poly.hpp"
#include "heatdens/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace heatdens::simd::detail {
namespace {

namespace c = expc;

inline __m512d exp512(__m512d x) {
  const __m512d cut = _mm512_set1_pd(c::lower_cut);
  const __mmask8 keep = _mm512_cmp_pd_mask(x, cut, _CMP_GE_OQ);
  x = _mm512_max_pd(x, cut);
  const __m512d n = _mm512_roundscale_pd(_mm512_mul_pd(x, _mm512_set1_pd(c::log2e)),
                                         _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m512d r = _mm512_fnmadd_pd(n, _mm512_set1_pd(c::ln2_hi), x);
  r = _mm512_fnmadd_pd(n, _mm512_set1_pd(c::ln2_lo), r);
  __m512d p = _mm512_set1_pd(c::c[13]);
  for (int i = 12; i >= 0; --i) p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(c::c[i]));
  return _mm512_maskz_mov_pd(keep, _mm512_scalef_pd(p, n));
}

inline __mmask8 tail_mask(std::size_t remaining) {
  return static_cast<__mmask8>((1u << remaining) - 1u);
}

double gaussian_sum(const double* k, const double* s, const double* w, std::size_t n, double u) {
  const __m512d uu = _mm512_set1_pd(u);
  const __m512d mhalf = _mm512_set1_pd(-0.5);
  __m512d acc = _mm512_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    const __m512d z = _mm512_mul_pd(_mm512_loadu_pd(k + j), _mm512_sub_pd(uu, _mm512_loadu_pd(s + j)));
    acc = _mm512_fmadd_pd(_mm512_loadu_pd(w + j), exp512(_mm512_mul_pd(mhalf, _mm512_mul_pd(z, z))), acc);
  }
  if (j < n) {
    const __mmask8 m = tail_mask(n - j);
    const __m512d z = _mm512_mul_pd(_mm512_maskz_loadu_pd(m, k + j),
                                    _mm512_sub_pd(uu, _mm512_maskz_loadu_pd(m, s + j)));
    acc = _mm512_fmadd_pd(_mm512_maskz_loadu_pd(m, w + j), exp512(_mm512_mul_pd(mhalf, _mm512_mul_pd(z, z))), acc);
  }
  return _mm512_reduce_add_pd(acc);
}

double quartic_sum(const double* k, const double* s, const double* w, std::size_t n, double u) {
  const __m512d uu = _mm512_set1_pd(u);
  const __m512d one = _mm512_set1_pd(1.0);
  __m512d acc = _mm512_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    const __m512d z = _mm512_mul_pd(_mm512_loadu_pd(k + j), _mm512_sub_pd(uu, _mm512_loadu_pd(s + j)));
    const __m512d z2 = _mm512_mul_pd(z, z);
    acc = _mm512_add_pd(acc, _mm512_div_pd(_mm512_loadu_pd(w + j), _mm512_fmadd_pd(z2, z2, one)));
  }
  if (j < n) {
    const __mmask8 m = tail_mask(n - j);
    const __m512d z = _mm512_mul_pd(_mm512_maskz_loadu_pd(m, k + j),
                                    _mm512_sub_pd(uu, _mm512_maskz_loadu_pd(m, s + j)));
    const __m512d z2 = _mm512_mul_pd(z, z);
    acc = _mm512_add_pd(acc, _mm512_div_pd(_mm512_maskz_loadu_pd(m, w + j), _mm512_fmadd_pd(z2, z2, one)));
  }
  return _mm512_reduce_add_pd(acc);
}

double box_sum(const double* k, const double* s, const double* w, std::size_t n, double u) {
  const __m512d uu = _mm512_set1_pd(u);
  const __m512d one = _mm512_set1_pd(1.0);
  __m512d acc = _mm512_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    const __m512d z = _mm512_mul_pd(_mm512_loadu_pd(k + j), _mm512_sub_pd(uu, _mm512_loadu_pd(s + j)));
    const __mmask8 inside = _mm512_cmp_pd_mask(_mm512_abs_pd(z), one, _CMP_LE_OQ);
    acc = _mm512_add_pd(acc, _mm512_maskz_loadu_pd(inside, w + j));
  }
  if (j < n) {
    const __mmask8 m = tail_mask(n - j);
    const __m512d z = _mm512_mul_pd(_mm512_maskz_loadu_pd(m, k + j),
                                    _mm512_sub_pd(uu, _mm512_maskz_loadu_pd(m, s + j)));
    const __mmask8 inside = _mm512_cmp_pd_mask(_mm512_abs_pd(z), one, _CMP_LE_OQ) & m;
    acc = _mm512_add_pd(acc, _mm512_maskz_loadu_pd(inside, w + j));
  }
  return _mm512_reduce_add_pd(acc);
}

}  // namespace

const KernelTable& avx512_table() {
  static const KernelTable table{gaussian_sum, quartic_sum, box_sum};
  return table;
}

}  // namespace heatdens::simd::detail
