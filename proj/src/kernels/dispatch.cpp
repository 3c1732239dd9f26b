#include "xsum/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace xsum::kernels {

#if !defined(XSUM_HAVE_AVX2_TU)
const KernelTable* avx2_table() { return nullptr; }
#endif

namespace {

const KernelTable* pick() {
    if (const char* forced = std::getenv("XSUM_KERNELS")) {
        const std::string_view want(forced);
        if (want == "scalar") return &scalar_table();
        if (want == "avx2" && avx2_table()) return avx2_table();
        if (want == "neon" && neon_table()) return neon_table();
    }
    if (const auto* t = avx2_table()) return t;
    if (const auto* t = neon_table()) return t;
    return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> current{pick()};
    return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_relaxed); }

const KernelTable& set_active(const KernelTable& table) {
    return *slot().exchange(&table, std::memory_order_relaxed);
}

}  // namespace xsum::kernels
