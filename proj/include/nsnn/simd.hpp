#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Data-parallel inner loops shared by the neuron, network and weight-space
// code. Every kernel has a scalar reference; wider variants must produce
// bit-identical results (same operation order, no fused multiply-add), which
// the equivalence tests check. The active table is chosen once at startup
// from CPU features; NSNN_SIMD=scalar forces the reference path.

namespace nsnn::simd {

struct Kernels
{
    std::string_view name;

    /// v[i] = v[i] * decay + charge[i]
    void (*leak_accumulate)(double* v, const double* charge, double decay, std::size_t n);

    /// fired[i] = v[i] >= threshold[i]; fired lanes reset to 0. Returns the fired count.
    std::size_t (*threshold_reset)(double* v, const double* threshold, std::uint8_t* fired, std::size_t n);

    /// One Milstein step of dV = -gL V dt + b dW with diffusion slope db = b'(V):
    /// v += (-gL v) dt + b dW + (b db / 2)(dW^2 - dt). With additive noise db = 0.
    void (*milstein_step)(double* v, const double* dw, double gl, double b, double db, double dt, std::size_t n);

    /// v[i] += scale * w[i]
    void (*add_scaled)(double* v, const double* w, double scale, std::size_t n);

    /// out[i] = (a * x[i] + b * y[i]) >= threshold, as 0/1 bytes.
    void (*linear_fire_test)(const double* x, const double* y, double a, double b, double threshold,
                             std::uint8_t* out, std::size_t n);
};

const Kernels& scalar_kernels() noexcept;

/// AVX2 table, or nullptr when not built for x86-64 or unsupported by this CPU.
const Kernels* avx2_kernels() noexcept;

/// The table selected for this process.
const Kernels& active() noexcept;

} // namespace nsnn::simd
