#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include <omp.h>

namespace mim {

/// Execution policy for point-sum kernels.
///
/// `serial` is the reference: one accumulator, points in order.
/// `parallel` sums fixed blocks of `kBlock` points and combines the block
/// partials pairwise, so the result does not depend on the thread count.
enum class Exec { serial, parallel };

inline constexpr std::size_t kBlock = 512;

/// Returns sum_i term(i, scratch, acc) where `term` adds its contribution
/// into `acc[0..width)`. `make_scratch()` builds per-thread workspace.
template <class MakeScratch, class Term>
std::vector<double> reduce_vector(std::size_t n, std::size_t width, Exec exec,
                                  MakeScratch make_scratch, Term term) {
  std::vector<double> acc(width, 0.0);
  if (n == 0) return acc;
  if (exec == Exec::serial) {
    auto scratch = make_scratch();
    for (std::size_t i = 0; i < n; ++i) term(i, scratch, acc.data());
    return acc;
  }

  const std::size_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nb * width, 0.0);
  const long long nbl = static_cast<long long>(nb);
#pragma omp parallel
  {
    auto scratch = make_scratch();
#pragma omp for schedule(static)
    for (long long b = 0; b < nbl; ++b) {
      double* out = partial.data() + static_cast<std::size_t>(b) * width;
      const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
      const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
      for (std::size_t i = lo; i < hi; ++i) term(i, scratch, out);
    }
  }
  for (std::size_t step = 1; step < nb; step *= 2) {
    for (std::size_t b = 0; b + step < nb; b += 2 * step) {
      double* dst = partial.data() + b * width;
      const double* src = partial.data() + (b + step) * width;
      for (std::size_t j = 0; j < width; ++j) dst[j] += src[j];
    }
  }
  std::copy(partial.begin(), partial.begin() + static_cast<std::ptrdiff_t>(width), acc.begin());
  return acc;
}

template <class MakeScratch, class Term>
double reduce_sum(std::size_t n, Exec exec, MakeScratch make_scratch, Term term) {
  return reduce_vector(n, 1, exec, make_scratch,
                       [&](std::size_t i, auto& s, double* acc) { acc[0] += term(i, s); })[0];
}

/// Sets the OpenMP thread count used by `Exec::parallel`; 0 keeps the default.
inline void set_threads(int jobs) {
  if (jobs > 0) omp_set_num_threads(jobs);
}

}  // namespace mim
