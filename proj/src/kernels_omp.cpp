#include "kernels_impl.hpp"

namespace aniframe::kernels::omp {
ANIFRAME_KERNEL_DEFS(true)
}
