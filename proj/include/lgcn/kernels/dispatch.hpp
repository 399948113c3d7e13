#pragma once

namespace lgcn::kern {

// Instruction-set level of the arithmetic kernels. Detection happens once at
// startup; the choice can be forced for equivalence tests or via the
// LGCN_KERNEL_ISA environment variable ("scalar" or "avx2").
enum class Isa { scalar, avx2 };

// True when this build carries AVX2 kernel objects and the CPU reports
// AVX2+FMA support.
bool avx2_available();

Isa active_isa();
void set_isa(Isa isa);

const char* isa_name(Isa isa);

}  // namespace lgcn::kern
