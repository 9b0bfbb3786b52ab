#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string_view>
#include <type_traits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ssi {

enum class Execution { Parallel, Serial };

/// True when SSI_DETERMINISTIC is set to anything but "" or "0".
inline bool deterministic_mode() {
  const char* v = std::getenv("SSI_DETERMINISTIC");
  return v != nullptr && std::string_view(v) != "" && std::string_view(v) != "0";
}

inline Execution default_execution() { return deterministic_mode() ? Execution::Serial : Execution::Parallel; }

inline int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Serial reference: f(0), f(1), ... in order.
template <class F>
auto run_trials_serial(std::size_t count, F&& f) {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<R> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(f(i));
  return out;
}

/// Evaluates f(i) for i < count on the OpenMP team. Results land at their index, so
/// the output does not depend on scheduling. The lowest-index exception is rethrown.
template <class F>
auto run_trials_parallel(std::size_t count, F&& f) {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

template <class F>
auto run_trials(std::size_t count, F&& f, Execution ex = default_execution()) {
  if (ex == Execution::Serial || count < 2) return run_trials_serial(count, std::forward<F>(f));
  return run_trials_parallel(count, std::forward<F>(f));
}

}  // namespace ssi
