#include "tfmfg/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace tfmfg::kernels {

#ifdef TFMFG_HAVE_AVX2
const KernelTable& avx2_table() noexcept;
#endif

const KernelTable* avx2_kernels() noexcept {
#ifdef TFMFG_HAVE_AVX2
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? &avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() noexcept {
    static const KernelTable& chosen = [&]() -> const KernelTable& {
        const char* env = std::getenv("TFMFG_KERNELS");
        if (env != nullptr && std::string_view(env) == "scalar") return scalar_kernels();
        if (const KernelTable* t = avx2_kernels()) return *t;
        return scalar_kernels();
    }();
    return chosen;
}

}  // namespace tfmfg::kernels
