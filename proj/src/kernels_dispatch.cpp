#include <atomic>
#include <cstdlib>
#include <string>

#include "hetnet/errors.hpp"
#include "hetnet/kernels.hpp"

namespace hetnet::kernels {

namespace {

constexpr Table kScalar{Isa::scalar,   scalar::theta_sums,        scalar::dot, scalar::axpy,
                        scalar::sinr_ratio, scalar::grad_p_accumulate};
constexpr Table kAvx2{Isa::avx2,     avx2::theta_sums,        avx2::dot, avx2::axpy,
                      avx2::sinr_ratio, avx2::grad_p_accumulate};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* initial_table() {
  if (const char* env = std::getenv("HETNET_OPT_ISA")) {
    if (std::string(env) == "scalar") return &kScalar;
  }
  return cpu_has_avx2() ? &kAvx2 : &kScalar;
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> t{initial_table()};
  return t;
}

}  // namespace

bool isa_supported(Isa isa) {
  if (isa == Isa::scalar) return true;
  static const bool avx2 = cpu_has_avx2();
  return avx2;
}

const Table& table(Isa isa) {
  if (!isa_supported(isa)) throw InvalidArgument(std::string(isa_name(isa)) + " not supported on this CPU");
  return isa == Isa::avx2 ? kAvx2 : kScalar;
}

const Table& active() { return *current().load(std::memory_order_relaxed); }

Isa active_isa() { return active().isa; }

void select_isa(Isa isa) { current().store(&table(isa), std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace hetnet::kernels
