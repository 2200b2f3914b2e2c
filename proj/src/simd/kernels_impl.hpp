#pragma once

#include <cstddef>
#include <cstdint>

namespace nsnn::simd::detail {

void leak_accumulate_scalar(double* v, const double* charge, double decay, std::size_t n);
std::size_t threshold_reset_scalar(double* v, const double* threshold, std::uint8_t* fired, std::size_t n);
void milstein_step_scalar(double* v, const double* dw, double gl, double b, double db, double dt, std::size_t n);
void add_scaled_scalar(double* v, const double* w, double scale, std::size_t n);
void linear_fire_test_scalar(const double* x, const double* y, double a, double b, double threshold,
                             std::uint8_t* out, std::size_t n);

} // namespace nsnn::simd::detail
