// AVX2+FMA variants of the inner-loop kernels.  This translation unit is
// compiled with -mavx2 -mfma and must only be reached through the runtime
// dispatcher after a CPU feature check.
#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "cgldpc/kernels.hpp"

namespace cgldpc::kernels {
namespace {

// exp for four doubles.  Cody-Waite range reduction to |r| <= ln(2)/2, then a
// 13th-order Taylor polynomial and exact 2^k scaling via the exponent bits.
// Intended domain is (-inf, ~708]; lanes below -708 flush to exactly 0.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d lo_bound = _mm256_set1_pd(-708.0);

  const __m256d flush = _mm256_cmp_pd(x, lo_bound, _CMP_LT_OQ);
  __m256d xc = _mm256_max_pd(x, lo_bound);
  xc = _mm256_min_pd(xc, _mm256_set1_pd(708.0));

  const __m256d k = _mm256_round_pd(_mm256_mul_pd(xc, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, xc);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);  // 1/13!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  const __m128i k32 = _mm256_cvtpd_epi32(k);
  const __m256i k64 = _mm256_cvtepi32_epi64(k32);
  const __m256i expo = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
  __m256d res = _mm256_mul_pd(p, _mm256_castsi256_pd(expo));
  return _mm256_andnot_pd(flush, res);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double v_max_val(const double* w, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vm = _mm256_loadu_pd(w);
    for (i = 4; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_loadu_pd(w + i));
    m = hmax(vm);
  }
  for (; i < n; ++i)
    if (w[i] > m) m = w[i];
  return m;
}

double v_sum_exp(const double* w, std::size_t n, double shift) {
  __m256d acc = _mm256_setzero_pd();
  const __m256d vs = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, exp_pd(_mm256_sub_pd(_mm256_loadu_pd(w + i), vs)));
  double s = hsum(acc);
  for (; i < n; ++i) s += std::exp(w[i] - shift);
  return s;
}

void v_exp_shift(const double* w, std::size_t n, double shift, double* out) {
  const __m256d vs = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, exp_pd(_mm256_sub_pd(_mm256_loadu_pd(w + i), vs)));
  for (; i < n; ++i) out[i] = std::exp(w[i] - shift);
}

void v_add_scalar(double* w, std::size_t n, double c) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(w + i, _mm256_add_pd(_mm256_loadu_pd(w + i), vc));
  for (; i < n; ++i) w[i] += c;
}

void v_bit_loglik(const double* x, std::size_t n, double e_gamma,
                  double e_log_gamma, double* lp0, double* lp1) {
  const double base = 0.5 * (e_log_gamma - e_gamma - std::log(2.0 * std::numbers::pi));
  const __m256d vg = _mm256_set1_pd(e_gamma);
  const __m256d vb = _mm256_set1_pd(base);
  const __m256d half = _mm256_set1_pd(-0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d t = _mm256_mul_pd(vg, vx);
    const __m256d c = _mm256_fmadd_pd(_mm256_mul_pd(half, t), vx, vb);
    _mm256_storeu_pd(lp0 + i, _mm256_sub_pd(c, t));
    _mm256_storeu_pd(lp1 + i, _mm256_add_pd(c, t));
  }
  for (; i < n; ++i) {
    const double t = e_gamma * x[i];
    const double c = base - 0.5 * t * x[i];
    lp0[i] = c - t;
    lp1[i] = c + t;
  }
}

double v_residual_quad(const double* x, const double* p1, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d m4 = _mm256_set1_pd(-4.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d a = _mm256_add_pd(vx, one);
    const __m256d sq = _mm256_mul_pd(a, a);
    const __m256d t = _mm256_fmadd_pd(_mm256_mul_pd(m4, vx), _mm256_loadu_pd(p1 + i), sq);
    acc = _mm256_add_pd(acc, t);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double a = x[i] + 1.0;
    s += a * a - 4.0 * x[i] * p1[i];
  }
  return s;
}

double v_kl_terms(const double* lp, const double* lq, std::size_t n, double zp,
                  double zq) {
  const __m256d vzp = _mm256_set1_pd(zp);
  const __m256d vzq = _mm256_set1_pd(zq);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_sub_pd(_mm256_loadu_pd(lp + i), vzp);
    const __m256d b = _mm256_sub_pd(_mm256_loadu_pd(lq + i), vzq);
    acc = _mm256_fmadd_pd(exp_pd(a), _mm256_sub_pd(a, b), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double a = lp[i] - zp;
    s += std::exp(a) * (a - (lq[i] - zq));
  }
  return s;
}

}  // namespace

const Ops* avx2_ops() {
  static const Ops ops{v_max_val,     v_sum_exp,       v_exp_shift,
                       v_add_scalar,  v_bit_loglik,    v_residual_quad,
                       v_kl_terms,    "avx2"};
  return &ops;
}

}  // namespace cgldpc::kernels

#endif  // x86-64
