#pragma once

// Dense inner-loop kernels used by the engine. Every kernel has a scalar
// reference implementation; SIMD variants are selected at runtime from what
// the CPU supports and must agree with the reference (see test_kernels.cpp).
//
// Selection order: NLNL_KERNELS environment variable ("scalar" | "avx2"),
// else the widest supported backend. Results are bit-reproducible for a fixed
// backend; across backends they agree to rounding.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "nlnl/error.hpp"

namespace nlnl::kernels {

enum class Backend { scalar, avx2 };

struct Table {
  Backend backend;
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // x = alpha * x
  void (*scale)(double alpha, double* x, std::size_t n);
  // x = max(x, 0)
  void (*relu)(double* x, std::size_t n);
  // grad[i] = 0 where act[i] <= 0
  void (*relu_mask)(const double* act, double* grad, std::size_t n);
  // v = momentum * v + g + weight_decay * p;  p -= lr * v
  void (*sgd_momentum)(double* param, double* velocity, const double* grad, std::size_t n,
                       double momentum, double weight_decay, double lr);
};

const Table& scalar_table() noexcept;
#if defined(NLNL_HAVE_AVX2)
const Table& avx2_table() noexcept;
#endif

bool supported(Backend b) noexcept;
const Table& table(Backend b);  // throws InvalidProblem if unsupported

const Table& active() noexcept;
Backend active_backend() noexcept;
void set_backend(Backend b);  // throws InvalidProblem if unsupported

std::string_view backend_name(Backend b) noexcept;
std::optional<Backend> parse_backend(std::string_view name) noexcept;

// Scoped backend override, for tests and equivalence checks.
class BackendGuard {
 public:
  explicit BackendGuard(Backend b) : previous_(active_backend()) { set_backend(b); }
  ~BackendGuard() { set_backend(previous_); }
  BackendGuard(const BackendGuard&) = delete;
  BackendGuard& operator=(const BackendGuard&) = delete;

 private:
  Backend previous_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw ShapeError("axpy: length mismatch");
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void scale(double alpha, std::span<double> x) { active().scale(alpha, x.data(), x.size()); }

inline void relu(std::span<double> x) { active().relu(x.data(), x.size()); }

inline void relu_mask(std::span<const double> act, std::span<double> grad) {
  if (act.size() != grad.size()) throw ShapeError("relu_mask: length mismatch");
  active().relu_mask(act.data(), grad.data(), act.size());
}

}  // namespace nlnl::kernels
