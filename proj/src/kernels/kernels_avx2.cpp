#include <immintrin.h>

#include "nlnl/kernels.hpp"

namespace nlnl::kernels {
namespace {

constexpr std::size_t kLanes = 4;

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 * kLanes <= n; i += 2 * kLanes) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + kLanes), _mm256_loadu_pd(b + i + kLanes), acc1);
  }
  for (; i + kLanes <= n; i += kLanes)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  acc0 = _mm256_add_pd(acc0, acc1);
  const __m128d lo = _mm256_castpd256_pd128(acc0);
  const __m128d hi = _mm256_extractf128_pd(acc0, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  double s = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void relu_avx2(double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  // Ordered compare is false for NaN, so NaN maps to 0 as in the scalar path.
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d keep = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(x + i, _mm256_and_pd(v, keep));
  }
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_avx2(const double* act, double* grad, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d keep = _mm256_cmp_pd(_mm256_loadu_pd(act + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(grad + i, _mm256_and_pd(_mm256_loadu_pd(grad + i), keep));
  }
  for (; i < n; ++i)
    if (!(act[i] > 0.0)) grad[i] = 0.0;
}

// No FMA here so the update is bit-identical to the scalar reference.
void sgd_momentum_avx2(double* p, double* v, const double* g, std::size_t n, double momentum,
                       double weight_decay, double lr) {
  const __m256d vm = _mm256_set1_pd(momentum);
  const __m256d vwd = _mm256_set1_pd(weight_decay);
  const __m256d vlr = _mm256_set1_pd(lr);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d pp = _mm256_loadu_pd(p + i);
    __m256d vv = _mm256_add_pd(_mm256_mul_pd(vm, _mm256_loadu_pd(v + i)), _mm256_loadu_pd(g + i));
    vv = _mm256_add_pd(vv, _mm256_mul_pd(vwd, pp));
    _mm256_storeu_pd(v + i, vv);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(pp, _mm256_mul_pd(vlr, vv)));
  }
  for (; i < n; ++i) {
    v[i] = (momentum * v[i] + g[i]) + weight_decay * p[i];
    p[i] = p[i] - lr * v[i];
  }
}

}  // namespace

const Table& avx2_table() noexcept {
  static const Table t{Backend::avx2, "avx2",    dot_avx2,       axpy_avx2,
                       scale_avx2,    relu_avx2, relu_mask_avx2, sgd_momentum_avx2};
  return t;
}

}  // namespace nlnl::kernels
