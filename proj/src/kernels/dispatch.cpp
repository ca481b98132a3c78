#include <cstdlib>
#include <string_view>

#include "placeorigin/kernels/kernels.hpp"

namespace placeorigin::kernels {

namespace detail {
#if defined(PLACEORIGIN_HAVE_AVX2)
const KernelSet& avx2_kernels();
#endif
#if defined(__aarch64__)
const KernelSet& neon_kernels();
#endif
}  // namespace detail

const KernelSet* avx2() {
#if defined(PLACEORIGIN_HAVE_AVX2)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &detail::avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

const KernelSet* neon() {
#if defined(__aarch64__)
  return &detail::neon_kernels();
#else
  return nullptr;
#endif
}

std::vector<const KernelSet*> available() {
  std::vector<const KernelSet*> out{&scalar()};
  if (const auto* k = avx2()) out.push_back(k);
  if (const auto* k = neon()) out.push_back(k);
  return out;
}

const KernelSet& active() {
  static const KernelSet* chosen = [] {
    const auto all = available();
    if (const char* env = std::getenv("PLACEORIGIN_SIMD")) {
      for (const auto* k : all) {
        if (k->name == std::string_view(env)) return k;
      }
    }
    return all.back();
  }();
  return *chosen;
}

}  // namespace placeorigin::kernels
