#include "cvreg/kernels.hpp"

#if defined(CVREG_HAVE_AVX2)

#include <immintrin.h>
#include <cmath>

namespace cvreg::kern {
namespace {

inline float hsum256(__m256 v)
{
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehl_ps(lo, lo);
    lo = _mm_add_ps(lo, sh);
    sh = _mm_shuffle_ps(lo, lo, 0x55);
    lo = _mm_add_ss(lo, sh);
    return _mm_cvtss_f32(lo);
}

float dot_avx2(const float* a, const float* b, std::size_t n)
{
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    __m256 acc2 = _mm256_setzero_ps();
    __m256 acc3 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i),      _mm256_loadu_ps(b + i),      acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8),  _mm256_loadu_ps(b + i + 8),  acc1);
        acc2 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 16), _mm256_loadu_ps(b + i + 16), acc2);
        acc3 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 24), _mm256_loadu_ps(b + i + 24), acc3);
    }
    for (; i + 8 <= n; i += 8)
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc0 = _mm256_add_ps(_mm256_add_ps(acc0, acc1), _mm256_add_ps(acc2, acc3));
    float acc = hsum256(acc0);
    for (; i < n; ++i)
        acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(float s, const float* x, float* y, std::size_t n)
{
    const __m256 vs = _mm256_set1_ps(s);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 vy = _mm256_loadu_ps(y + i);
        vy = _mm256_fmadd_ps(vs, _mm256_loadu_ps(x + i), vy);
        _mm256_storeu_ps(y + i, vy);
    }
    for (; i < n; ++i)
        y[i] += s * x[i];
}

void scale_avx2(float* x, float s, std::size_t n)
{
    const __m256 vs = _mm256_set1_ps(s);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(x + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), vs));
    for (; i < n; ++i)
        x[i] *= s;
}

void vmul_avx2(float* x, const float* s, std::size_t n)
{
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(x + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(s + i)));
    for (; i < n; ++i)
        x[i] *= s[i];
}

void sq_acc_avx2(float* acc, const float* x, std::size_t n)
{
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 vx = _mm256_loadu_ps(x + i);
        __m256 va = _mm256_loadu_ps(acc + i);
        _mm256_storeu_ps(acc + i, _mm256_fmadd_ps(vx, vx, va));
    }
    for (; i < n; ++i)
        acc[i] += x[i] * x[i];
}

void add_avx2(const float* a, const float* b, float* out, std::size_t n)
{
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    for (; i < n; ++i)
        out[i] = a[i] + b[i];
}

void adam_step_avx2(float* p, float* m, float* v, const float* g, std::size_t n,
                    float lr, float b1, float b2, float bc1, float bc2, float eps)
{
    const __m256 vb1  = _mm256_set1_ps(b1);
    const __m256 vb1c = _mm256_set1_ps(1.0f - b1);
    const __m256 vb2  = _mm256_set1_ps(b2);
    const __m256 vb2c = _mm256_set1_ps(1.0f - b2);
    const __m256 vbc1 = _mm256_set1_ps(bc1);
    const __m256 vbc2 = _mm256_set1_ps(bc2);
    const __m256 vlr  = _mm256_set1_ps(lr);
    const __m256 veps = _mm256_set1_ps(eps);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 vg = _mm256_loadu_ps(g + i);
        __m256 vm = _mm256_loadu_ps(m + i);
        __m256 vv = _mm256_loadu_ps(v + i);
        vm = _mm256_add_ps(_mm256_mul_ps(vb1, vm), _mm256_mul_ps(vb1c, vg));
        vv = _mm256_add_ps(_mm256_mul_ps(vb2, vv), _mm256_mul_ps(vb2c, _mm256_mul_ps(vg, vg)));
        _mm256_storeu_ps(m + i, vm);
        _mm256_storeu_ps(v + i, vv);
        const __m256 mhat = _mm256_div_ps(vm, vbc1);
        const __m256 vhat = _mm256_div_ps(vv, vbc2);
        const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), veps);
        __m256 vp = _mm256_loadu_ps(p + i);
        vp = _mm256_sub_ps(vp, _mm256_div_ps(_mm256_mul_ps(vlr, mhat), denom));
        _mm256_storeu_ps(p + i, vp);
    }
    for (; i < n; ++i) {
        const float gi = g[i];
        m[i] = b1 * m[i] + (1.0f - b1) * gi;
        v[i] = b2 * v[i] + (1.0f - b2) * gi * gi;
        p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

const Ops g_avx2 = {
    dot_avx2, axpy_avx2, scale_avx2, vmul_avx2,
    sq_acc_avx2, add_avx2, adam_step_avx2, "avx2",
};

} // namespace

const Ops* avx2_ops()
{
    return __builtin_cpu_supports("avx2") ? &g_avx2 : nullptr;
}

} // namespace cvreg::kern

#endif // CVREG_HAVE_AVX2
