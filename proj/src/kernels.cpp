#include "item/kernels.hpp"

#include <stdexcept>

namespace item::kernels {
namespace {

const Backend* pick_default() {
#if defined(ITEM_BUILD_AVX2)
#if defined(__GNUC__) || defined(__clang__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return &avx2_backend();
#endif
#endif
    return &scalar_backend();
}

const Backend*& current() {
    static const Backend* b = pick_default();
    return b;
}

}  // namespace

const Backend& active() { return *current(); }
const char* active_name() { return current()->name; }

void force(const std::string& name) {
    if (name == "scalar") {
        current() = &scalar_backend();
        return;
    }
#if defined(ITEM_BUILD_AVX2)
    if (name == "avx2") {
#if defined(__GNUC__) || defined(__clang__)
        if (!(__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")))
            throw std::runtime_error("avx2 backend not supported on this CPU");
#endif
        current() = &avx2_backend();
        return;
    }
#endif
    throw std::runtime_error("unknown kernel backend: " + name);
}

}  // namespace item::kernels
