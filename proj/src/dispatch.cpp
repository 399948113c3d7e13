#include "lgcn/kernels/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "lgcn/common.hpp"
#include "lgcn/kernels/kernels.hpp"

namespace lgcn::kern {
namespace {

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  const bool have = avx2_available();
  if (const char* env = std::getenv("LGCN_KERNEL_ISA")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && have) return Isa::avx2;
  }
  return have ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool avx2_available() {
  static const bool ok =
      detail::avx2_table<float>() != nullptr && cpu_supports_avx2();
  return ok;
}

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_available())
    throw Error("avx2 kernels are not available on this build/CPU");
  active_slot().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

template <typename T>
const KernelTable<T>& table(Isa isa) {
  if (isa == Isa::avx2) {
    const KernelTable<T>* t = detail::avx2_table<T>();
    if (t == nullptr || !avx2_available())
      throw Error("avx2 kernels are not available on this build/CPU");
    return *t;
  }
  return detail::scalar_table<T>();
}

template <typename T>
const KernelTable<T>& table() {
  return table<T>(active_isa());
}

template const KernelTable<float>& table<float>();
template const KernelTable<double>& table<double>();
template const KernelTable<float>& table<float>(Isa);
template const KernelTable<double>& table<double>(Isa);

}  // namespace lgcn::kern
