#include "cvreg/kernels.hpp"

#include <cmath>

namespace cvreg::kern {
namespace {

float dot_scalar(const float* a, const float* b, std::size_t n)
{
    float acc = 0.0f;
    for (std::size_t i = 0; i < n; ++i)
        acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(float s, const float* x, float* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] += s * x[i];
}

void scale_scalar(float* x, float s, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        x[i] *= s;
}

void vmul_scalar(float* x, const float* s, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        x[i] *= s[i];
}

void sq_acc_scalar(float* acc, const float* x, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        acc[i] += x[i] * x[i];
}

void add_scalar(const float* a, const float* b, float* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a[i] + b[i];
}

void adam_step_scalar(float* p, float* m, float* v, const float* g, std::size_t n,
                      float lr, float b1, float b2, float bc1, float bc2, float eps)
{
    for (std::size_t i = 0; i < n; ++i) {
        const float gi = g[i];
        m[i] = b1 * m[i] + (1.0f - b1) * gi;
        v[i] = b2 * v[i] + (1.0f - b2) * gi * gi;
        const float mhat = m[i] / bc1;
        const float vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

const Ops g_scalar = {
    dot_scalar, axpy_scalar, scale_scalar, vmul_scalar,
    sq_acc_scalar, add_scalar, adam_step_scalar, "scalar",
};

} // namespace

const Ops& scalar_ops() { return g_scalar; }

} // namespace cvreg::kern
