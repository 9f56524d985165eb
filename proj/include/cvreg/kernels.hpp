#pragma once

// Data-parallel inner-loop kernels. Scalar reference implementations plus
// AVX2 variants selected once at startup by cpuid; everything above this
// layer calls through ops() so materialized and streamed evaluations share
// the exact same floating-point path.

#include <cstddef>

namespace cvreg::kern {

struct Ops {
    // sum_i a[i]*b[i]
    float (*dot)(const float* a, const float* b, std::size_t n);
    // y[i] += s*x[i]
    void (*axpy)(float s, const float* x, float* y, std::size_t n);
    // x[i] *= s
    void (*scale)(float* x, float s, std::size_t n);
    // x[i] *= s[i]
    void (*vmul)(float* x, const float* s, std::size_t n);
    // acc[i] += x[i]*x[i]
    void (*sq_acc)(float* acc, const float* x, std::size_t n);
    // out[i] = a[i] + b[i]
    void (*add)(const float* a, const float* b, float* out, std::size_t n);
    // Bias-corrected adaptive-moment step:
    //   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2
    //   p -= lr * (m/bc1) / (sqrt(v/bc2) + eps)
    void (*adam_step)(float* p, float* m, float* v, const float* g, std::size_t n,
                      float lr, float b1, float b2, float bc1, float bc2, float eps);
    const char* name;
};

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
// Null when the binary was built without AVX2 support.
const Ops* avx2_ops();
#endif

// The active table. Defaults to the best ISA the CPU supports.
const Ops& ops();

// Force a specific table (tests and the --no-simd escape hatch).
void select_ops(const Ops& table);
void select_best_ops();

} // namespace cvreg::kern
