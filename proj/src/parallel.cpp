#include "vocabdrift/parallel.hpp"

#include <cstdlib>
#include <string_view>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vocabdrift {

ExecMode default_exec_mode() {
    static const ExecMode mode = [] {
        const char* v = std::getenv("VOCABDRIFT_SERIAL");
        if (v != nullptr && std::string_view(v) == "1") return ExecMode::Serial;
        return ExecMode::Parallel;
    }();
    return mode;
}

int worker_count(ExecMode mode) {
#ifdef _OPENMP
    if (mode == ExecMode::Parallel) return omp_get_max_threads();
#else
    (void)mode;
#endif
    return 1;
}

} // namespace vocabdrift
