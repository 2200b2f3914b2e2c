// Built with -mavx2 only (no -mfma): every multiply and add rounds separately,
// matching the scalar reference bit for bit.
#include "nsnn/simd.hpp"
#include "kernels_impl.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace nsnn::simd {

namespace {

constexpr std::size_t kLanes = 4;

void leak_accumulate_avx2(double* v, const double* charge, double decay, std::size_t n)
{
    const __m256d d = _mm256_set1_pd(decay);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
    {
        __m256d x = _mm256_loadu_pd(v + i);
        x = _mm256_add_pd(_mm256_mul_pd(x, d), _mm256_loadu_pd(charge + i));
        _mm256_storeu_pd(v + i, x);
    }
    detail::leak_accumulate_scalar(v + i, charge + i, decay, n - i);
}

std::size_t threshold_reset_avx2(double* v, const double* threshold, std::uint8_t* fired, std::size_t n)
{
    const __m256d zero = _mm256_setzero_pd();
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
    {
        const __m256d x = _mm256_loadu_pd(v + i);
        const __m256d mask = _mm256_cmp_pd(x, _mm256_loadu_pd(threshold + i), _CMP_GE_OQ);
        _mm256_storeu_pd(v + i, _mm256_blendv_pd(x, zero, mask));
        const int bits = _mm256_movemask_pd(mask);
        for (std::size_t k = 0; k < kLanes; ++k)
            fired[i + k] = static_cast<std::uint8_t>((bits >> k) & 1);
        count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(bits)));
    }
    return count + detail::threshold_reset_scalar(v + i, threshold + i, fired + i, n - i);
}

void milstein_step_avx2(double* v, const double* dw, double gl, double b, double db, double dt, std::size_t n)
{
    const __m256d neg_gl = _mm256_set1_pd(-gl);
    const __m256d vdt = _mm256_set1_pd(dt);
    const __m256d vb = _mm256_set1_pd(b);
    const __m256d half_bdb = _mm256_set1_pd(0.5 * b * db);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
    {
        __m256d x = _mm256_loadu_pd(v + i);
        const __m256d w = _mm256_loadu_pd(dw + i);
        const __m256d drift = _mm256_mul_pd(_mm256_mul_pd(neg_gl, x), vdt);
        const __m256d diffusion = _mm256_mul_pd(vb, w);
        const __m256d correction = _mm256_mul_pd(half_bdb, _mm256_sub_pd(_mm256_mul_pd(w, w), vdt));
        x = _mm256_add_pd(_mm256_add_pd(_mm256_add_pd(x, drift), diffusion), correction);
        _mm256_storeu_pd(v + i, x);
    }
    detail::milstein_step_scalar(v + i, dw + i, gl, b, db, dt, n - i);
}

void add_scaled_avx2(double* v, const double* w, double scale, std::size_t n)
{
    const __m256d s = _mm256_set1_pd(scale);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
    {
        const __m256d x = _mm256_add_pd(_mm256_loadu_pd(v + i), _mm256_mul_pd(s, _mm256_loadu_pd(w + i)));
        _mm256_storeu_pd(v + i, x);
    }
    detail::add_scaled_scalar(v + i, w + i, scale, n - i);
}

void linear_fire_test_avx2(const double* x, const double* y, double a, double b, double threshold,
                           std::uint8_t* out, std::size_t n)
{
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    const __m256d vt = _mm256_set1_pd(threshold);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
    {
        const __m256d sum = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)),
                                          _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
        const int bits = _mm256_movemask_pd(_mm256_cmp_pd(sum, vt, _CMP_GE_OQ));
        for (std::size_t k = 0; k < kLanes; ++k)
            out[i + k] = static_cast<std::uint8_t>((bits >> k) & 1);
    }
    detail::linear_fire_test_scalar(x + i, y + i, a, b, threshold, out + i, n - i);
}

} // namespace

const Kernels* avx2_kernels() noexcept
{
    static const Kernels table{
        "avx2",
        leak_accumulate_avx2,
        threshold_reset_avx2,
        milstein_step_avx2,
        add_scaled_avx2,
        linear_fire_test_avx2,
    };
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? &table : nullptr;
}

} // namespace nsnn::simd

#else

namespace nsnn::simd {

const Kernels* avx2_kernels() noexcept
{
    return nullptr;
}

} // namespace nsnn::simd

#endif
