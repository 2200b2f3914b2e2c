#include "nsnn/simd.hpp"

#include <cstdlib>
#include <string_view>

namespace nsnn::simd {

namespace {

const Kernels& select()
{
    const char* forced = std::getenv("NSNN_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar")
        return scalar_kernels();
    if (const Kernels* k = avx2_kernels())
        return *k;
    return scalar_kernels();
}

} // namespace

const Kernels& active() noexcept
{
    static const Kernels& table = select();
    return table;
}

} // namespace nsnn::simd
