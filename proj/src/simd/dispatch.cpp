#include <atomic>
#include <cstdlib>
#include <string>

#include "chirality_lab/simd_kernels.hpp"

namespace chirality_lab::simd {
namespace {

const KernelTable* pick_default() {
    const char* env = std::getenv("CHIRALITY_LAB_SIMD");
    if (env && std::string(env) == "scalar") return &scalar_kernels();
    if (avx2_kernels() && cpu_has_avx2()) return avx2_kernels();
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> ptr{pick_default()};
    return ptr;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable& active_kernels() { return *current().load(std::memory_order_acquire); }

bool select_kernels(const std::string& name) {
    if (name == "scalar") {
        current().store(&scalar_kernels(), std::memory_order_release);
        return true;
    }
    if (name == "avx2" && avx2_kernels() && cpu_has_avx2()) {
        current().store(avx2_kernels(), std::memory_order_release);
        return true;
    }
    return false;
}

}  // namespace chirality_lab::simd
