#pragma once

#include "mclab/kernels.hpp"

namespace mclab::kernels::detail {

const KernelTable& scalar_kernels();
#if MCLAB_HAVE_AVX2
const KernelTable& avx2_kernels();
#endif
#if MCLAB_HAVE_NEON
const KernelTable& neon_kernels();
#endif

}  // namespace mclab::kernels::detail
