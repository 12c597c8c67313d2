#include <atomic>
#include <cstdlib>
#include <string>

#include "nlnl/kernels.hpp"

namespace nlnl::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(NLNL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* initial_table() noexcept {
  if (const char* env = std::getenv("NLNL_KERNELS")) {
    if (auto b = parse_backend(env); b && supported(*b)) return &table(*b);
  }
  if (supported(Backend::avx2)) return &table(Backend::avx2);
  return &scalar_table();
}

std::atomic<const Table*>& current() noexcept {
  static std::atomic<const Table*> t{initial_table()};
  return t;
}

}  // namespace

bool supported(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2: {
      static const bool has = cpu_has_avx2();
      return has;
    }
  }
  return false;
}

const Table& table(Backend b) {
  if (!supported(b))
    throw InvalidProblem("kernel backend '" + std::string(backend_name(b)) + "' not supported on this CPU");
  switch (b) {
#if defined(NLNL_HAVE_AVX2)
    case Backend::avx2:
      return avx2_table();
#endif
    default:
      return scalar_table();
  }
}

const Table& active() noexcept { return *current().load(std::memory_order_relaxed); }

Backend active_backend() noexcept { return active().backend; }

void set_backend(Backend b) { current().store(&table(b), std::memory_order_relaxed); }

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

std::optional<Backend> parse_backend(std::string_view name) noexcept {
  if (name == "scalar") return Backend::scalar;
  if (name == "avx2") return Backend::avx2;
  return std::nullopt;
}

}  // namespace nlnl::kernels
