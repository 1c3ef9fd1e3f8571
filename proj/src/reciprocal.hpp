#pragma once

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace wgqst::detail {

inline constexpr int kChunk = 512;

// out[i] = 1 / ((x[i] - c) + (y ? y[i] : s)) for i < n.
// With AVX-512 the reciprocal is rcp14 refined by two Newton steps (~1 ulp).
inline void shifted_reciprocal(const double* x, const double* y, double c, double s, int n, double* out) {
  int i = 0;
#if defined(__AVX512F__)
  const __m512d vc = _mm512_set1_pd(c), vs = _mm512_set1_pd(s), one = _mm512_set1_pd(1.0);
  for (; i + 8 <= n; i += 8) {
    __m512d d = _mm512_sub_pd(_mm512_loadu_pd(x + i), vc);
    d = _mm512_add_pd(d, y ? _mm512_loadu_pd(y + i) : vs);
    __m512d r = _mm512_rcp14_pd(d);
    __m512d e = _mm512_fnmadd_pd(d, r, one);
    r = _mm512_fmadd_pd(r, e, r);
    e = _mm512_fnmadd_pd(d, r, one);
    r = _mm512_fmadd_pd(r, e, r);
    _mm512_storeu_pd(out + i, r);
  }
#endif
  for (; i < n; ++i) out[i] = 1.0 / ((x[i] - c) + (y ? y[i] : s));
}

}  // namespace wgqst::detail
