#include <cstdlib>
#include <string_view>

#include "toxcascade/kernels.hpp"

namespace toxcascade::kernels {

namespace detail {
#if defined(TOXCASCADE_WITH_AVX2)
const KernelTable& avx2_table_impl();
#endif
#if defined(TOXCASCADE_WITH_NEON)
const KernelTable& neon_table_impl();
#endif
}  // namespace detail

const KernelTable* avx2_table() {
#if defined(TOXCASCADE_WITH_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &detail::avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() {
#if defined(TOXCASCADE_WITH_NEON)
  return &detail::neon_table_impl();  // mandatory on aarch64
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& chosen = [&]() -> const KernelTable& {
    const char* forced = std::getenv("TOXCASCADE_KERNELS");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_table();
    if (const KernelTable* t = avx2_table()) return *t;
    if (const KernelTable* t = neon_table()) return *t;
    return scalar_table();
  }();
  return chosen;
}

std::vector<const KernelTable*> available_tables() {
  std::vector<const KernelTable*> out{&scalar_table()};
  if (const KernelTable* t = avx2_table()) out.push_back(t);
  if (const KernelTable* t = neon_table()) out.push_back(t);
  return out;
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

}  // namespace toxcascade::kernels
