#include "kernels_impl.hpp"

namespace aniframe::kernels::serial {
ANIFRAME_KERNEL_DEFS(false)
}
