#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace otsketch {

// Every parallel kernel keeps a serial twin selected by this switch, so tests
// can pin one against the other and the bench tool can time both.
enum class Exec { serial, parallel };

inline void set_num_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

template <class F>
void parallel_for(std::size_t n, Exec ex, F&& f) {
    if (ex == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            f(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < n; ++i) f(i);
    }
}

} // namespace otsketch
