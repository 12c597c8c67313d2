#include "nlnl/kernels.hpp"

namespace nlnl::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void relu_scalar(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_scalar(const double* act, double* grad, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!(act[i] > 0.0)) grad[i] = 0.0;
}

void sgd_momentum_scalar(double* p, double* v, const double* g, std::size_t n, double momentum,
                         double weight_decay, double lr) {
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = (momentum * v[i] + g[i]) + weight_decay * p[i];
    p[i] = p[i] - lr * v[i];
  }
}

}  // namespace

const Table& scalar_table() noexcept {
  static const Table t{Backend::scalar, "scalar",   dot_scalar,       axpy_scalar,
                       scale_scalar,    relu_scalar, relu_mask_scalar, sgd_momentum_scalar};
  return t;
}

}  // namespace nlnl::kernels
