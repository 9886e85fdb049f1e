#pragma once

// Dense double-precision kernels used by the learner (Gram accumulation,
// basis-expansion dot products, residual norms).
//
// Every kernel has a scalar reference in camal::kernels::scalar. On x86-64
// builds an AVX2+FMA variant lives in camal::kernels::avx2 and is selected
// at runtime when the CPU reports both features. The dispatching entry points
// in camal::kernels forward to whichever table is active.

#include <cstddef>
#include <span>
#include <string_view>

namespace camal::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

// ISA currently used by the dispatching entry points.
Isa active_isa() noexcept;

// Best ISA supported by this build and CPU.
Isa detected_isa() noexcept;

// Overrides dispatch (tests and benchmarks). Requesting an unsupported ISA
// falls back to scalar; returns the ISA actually installed.
Isa set_isa(Isa isa) noexcept;

// sum_i a[i] * b[i]; spans must have equal length.
double dot(std::span<const double> a, std::span<const double> b) noexcept;

// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;

// sum_i (a[i] - b[i])^2
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b) noexcept;
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;
}  // namespace scalar

#if defined(CAMAL_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b) noexcept;
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;
}  // namespace avx2
#endif

}  // namespace camal::kernels
