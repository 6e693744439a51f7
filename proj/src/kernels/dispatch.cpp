#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "coverage/kernels.hpp"

namespace coverage::kernels {

namespace {

constexpr KernelTable kScalar{Backend::Scalar, "scalar", &scalar::visible_mask, &scalar::ray_hits};
#if defined(COVERAGE_HAVE_AVX2)
constexpr KernelTable kAvx2{Backend::Avx2, "avx2", &avx2::visible_mask, &avx2::ray_hits};
#endif

const KernelTable* detect() {
    const char* env = std::getenv("COVERAGE_KERNELS");
    if (env != nullptr && std::string_view(env) == "scalar") return &kScalar;
    if (available(Backend::Avx2)) return &table(Backend::Avx2);
    return &kScalar;
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> ptr{detect()};
    return ptr;
}

}  // namespace

bool available(Backend b) {
    if (b == Backend::Scalar) return true;
#if defined(COVERAGE_HAVE_AVX2)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable& table(Backend b) {
    if (!available(b)) throw std::runtime_error("kernel backend not supported on this CPU");
#if defined(COVERAGE_HAVE_AVX2)
    if (b == Backend::Avx2) return kAvx2;
#endif
    return kScalar;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void set_backend(Backend b) { current().store(&table(b), std::memory_order_release); }

}  // namespace coverage::kernels
