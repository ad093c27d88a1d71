#pragma once

#include <cstddef>

namespace vocabdrift {

/// Execution path for the data-parallel kernels. Serial is the reference
/// implementation; every kernel must produce identical results either way.
enum class ExecMode { Serial, Parallel };

/// Parallel unless VOCABDRIFT_SERIAL=1 is set in the environment.
ExecMode default_exec_mode();

int worker_count(ExecMode mode);

} // namespace vocabdrift
