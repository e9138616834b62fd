#include <atomic>
#include <cstdlib>
#include <string>

#include "cfbench/simd.hpp"

namespace cfb::simd {

#if defined(CFB_HAVE_AVX2)
const KernelTable* avx2_table_unchecked();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(CFB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* pick_default() {
  if (const char* env = std::getenv("CF_BENCH_SIMD"); env != nullptr) {
    if (std::string(env) == "scalar") return &scalar_table();
  }
  if (const KernelTable* t = avx2_table(); t != nullptr) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(CFB_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool force_isa(Isa isa) {
  const KernelTable* t = isa == Isa::Scalar ? &scalar_table() : avx2_table();
  if (t == nullptr) return false;
  current().store(t, std::memory_order_release);
  return true;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

}  // namespace cfb::simd
