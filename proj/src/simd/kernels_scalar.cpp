#include "nsnn/simd.hpp"
#include "kernels_impl.hpp"

namespace nsnn::simd {

namespace detail {

void leak_accumulate_scalar(double* v, const double* charge, double decay, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        v[i] = v[i] * decay + charge[i];
}

std::size_t threshold_reset_scalar(double* v, const double* threshold, std::uint8_t* fired, std::size_t n)
{
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const bool f = v[i] >= threshold[i];
        fired[i] = f ? 1 : 0;
        if (f)
        {
            v[i] = 0.0;
            ++count;
        }
    }
    return count;
}

void milstein_step_scalar(double* v, const double* dw, double gl, double b, double db, double dt, std::size_t n)
{
    const double half_bdb = 0.5 * b * db;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double drift = (-gl * v[i]) * dt;
        const double diffusion = b * dw[i];
        const double correction = half_bdb * (dw[i] * dw[i] - dt);
        v[i] = ((v[i] + drift) + diffusion) + correction;
    }
}

void add_scaled_scalar(double* v, const double* w, double scale, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        v[i] = v[i] + scale * w[i];
}

void linear_fire_test_scalar(const double* x, const double* y, double a, double b, double threshold,
                             std::uint8_t* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        out[i] = (a * x[i] + b * y[i]) >= threshold ? 1 : 0;
}

} // namespace detail

const Kernels& scalar_kernels() noexcept
{
    static const Kernels table{
        "scalar",
        detail::leak_accumulate_scalar,
        detail::threshold_reset_scalar,
        detail::milstein_step_scalar,
        detail::add_scaled_scalar,
        detail::linear_fire_test_scalar,
    };
    return table;
}

} // namespace nsnn::simd
