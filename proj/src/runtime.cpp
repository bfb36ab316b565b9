#include "barron/runtime.hpp"

#include <cstdlib>  // defines __GLIBC__ where applicable

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace barron {

void configure_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 32 << 20);  // glibc caps this at 32 MB
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

}  // namespace barron
