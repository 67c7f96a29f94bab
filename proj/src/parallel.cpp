#include "distkit/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace distkit::parallel {

int worker_count() {
#ifdef _OPENMP
    int n = omp_get_max_threads();
#else
    int n = 1;
#endif
    if (const char* env = std::getenv("DISTKIT_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap > 0 && cap < n)
                n = cap;
        } catch (...) {
            // unparsable value: keep the machine default
        }
    }
    return n;
}

} // namespace distkit::parallel
