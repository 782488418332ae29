#include "invlab/parallel.hpp"

#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace invlab {

Execution parse_execution(std::string_view name) {
    if (name == "serial") return Execution::serial;
    if (name == "parallel") return Execution::parallel;
    throw std::invalid_argument("unknown execution mode: " + std::string(name));
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace invlab
