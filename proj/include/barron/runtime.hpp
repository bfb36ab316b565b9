#pragma once

namespace barron {

/// Keeps glibc from returning large evaluation buffers to the OS after every
/// batch. Without it the page-fault churn costs more than the arithmetic.
/// No-op on other C libraries.
void configure_allocator();

}  // namespace barron
