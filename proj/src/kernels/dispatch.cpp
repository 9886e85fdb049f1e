#include <atomic>

#include "camal/kernels.hpp"

namespace camal::kernels {

namespace {

struct Table {
  Isa isa;
  double (*dot)(std::span<const double>, std::span<const double>) noexcept;
  void (*axpy)(double, std::span<const double>, std::span<double>) noexcept;
  double (*squared_distance)(std::span<const double>, std::span<const double>) noexcept;
};

constexpr Table kScalar{Isa::Scalar, &scalar::dot, &scalar::axpy, &scalar::squared_distance};
#if defined(CAMAL_HAVE_AVX2)
constexpr Table kAvx2{Isa::Avx2, &avx2::dot, &avx2::axpy, &avx2::squared_distance};
#endif

bool cpu_has_avx2() noexcept {
#if defined(CAMAL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* table_for(Isa isa) noexcept {
#if defined(CAMAL_HAVE_AVX2)
  if (isa == Isa::Avx2 && cpu_has_avx2()) return &kAvx2;
#else
  (void)isa;
#endif
  return &kScalar;
}

std::atomic<const Table*>& active() noexcept {
  static std::atomic<const Table*> table{table_for(detected_isa())};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

Isa detected_isa() noexcept { return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed)->isa; }

Isa set_isa(Isa isa) noexcept {
  const Table* t = table_for(isa);
  active().store(t, std::memory_order_relaxed);
  return t->isa;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return active().load(std::memory_order_relaxed)->dot(a, b);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  active().load(std::memory_order_relaxed)->axpy(alpha, x, y);
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  return active().load(std::memory_order_relaxed)->squared_distance(a, b);
}

}  // namespace camal::kernels
