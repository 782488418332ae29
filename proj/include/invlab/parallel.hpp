#pragma once

#include <cstddef>
#include <string_view>

namespace invlab {

/// serial is the reference path; parallel must produce identical results.
enum class Execution { serial, parallel };

Execution parse_execution(std::string_view name);
int max_threads();

/// Calls fn(i) for i in [0, n). Iterations must be independent and must not
/// throw out of fn.
template <class Fn>
void for_each_index(std::size_t n, Execution exec, Fn&& fn) {
    const auto count = static_cast<long long>(n);
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
    } else {
        for (long long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
    }
}

}  // namespace invlab
