#include "modelvc/kernels.hpp"

#include <cmath>
#include <limits>

namespace modelvc::kernels {

namespace {

constexpr size_t kParallelThreshold = 1 << 14;

// Largest double that converts to int64 without UB; values beyond are
// clamped to 0 and later rescued by the bound scan.
constexpr double kQMax = 9.0e18;

inline int64_t quantize_one(float a, float b, double step) {
  double f = std::floor((double(a) - double(b)) / step + 0.5);
  if (!(f >= -kQMax && f <= kQMax)) return 0;
  return static_cast<int64_t>(f);
}

inline float dequantize_one(float a, int64_t qi, double step) {
  return static_cast<float>(double(a) - double(qi) * step);
}

}  // namespace

double quant_step(double epsilon) { return 2.0 * std::log1p(epsilon); }

void quantize_serial(const float* p1, const float* p2, size_t n, double step, int64_t* q) {
  for (size_t i = 0; i < n; ++i) q[i] = quantize_one(p1[i], p2[i], step);
}

void quantize(const float* p1, const float* p2, size_t n, double step, int64_t* q) {
#ifdef _OPENMP
  if (n >= kParallelThreshold) {
#pragma omp parallel for schedule(static)
    for (ptrdiff_t i = 0; i < ptrdiff_t(n); ++i) q[i] = quantize_one(p1[i], p2[i], step);
    return;
  }
#endif
  quantize_serial(p1, p2, n, step, q);
}

void dequantize_serial(const float* p1, const int64_t* q, size_t n, double step, float* out) {
  for (size_t i = 0; i < n; ++i) out[i] = dequantize_one(p1[i], q[i], step);
}

void dequantize(const float* p1, const int64_t* q, size_t n, double step, float* out) {
#ifdef _OPENMP
  if (n >= kParallelThreshold) {
#pragma omp parallel for schedule(static)
    for (ptrdiff_t i = 0; i < ptrdiff_t(n); ++i) out[i] = dequantize_one(p1[i], q[i], step);
    return;
  }
#endif
  dequantize_serial(p1, q, n, step, out);
}

std::vector<uint64_t> bound_violations(const float* orig, const float* recon, size_t n,
                                       double bound) {
  std::vector<uint64_t> out;
  for (size_t i = 0; i < n; ++i) {
    double d = std::fabs(double(orig[i]) - double(recon[i]));
    if (!(d <= bound) || !std::isfinite(orig[i]) || !std::isfinite(recon[i])) {
      out.push_back(i);
    }
  }
  return out;
}

double sum_squares_serial(const float* x, size_t n) {
  double s = 0;
  for (size_t i = 0; i < n; ++i) s += double(x[i]) * double(x[i]);
  return s;
}

double sum_squares(const float* x, size_t n) {
#ifdef _OPENMP
  if (n >= kParallelThreshold) {
    double s = 0;
#pragma omp parallel for schedule(static) reduction(+ : s)
    for (ptrdiff_t i = 0; i < ptrdiff_t(n); ++i) s += double(x[i]) * double(x[i]);
    return s;
  }
#endif
  return sum_squares_serial(x, n);
}

double sum_squared_diff_serial(const float* a, const float* b, size_t n) {
  double s = 0;
  for (size_t i = 0; i < n; ++i) {
    double d = double(a[i]) - double(b[i]);
    s += d * d;
  }
  return s;
}

double sum_squared_diff(const float* a, const float* b, size_t n) {
#ifdef _OPENMP
  if (n >= kParallelThreshold) {
    double s = 0;
#pragma omp parallel for schedule(static) reduction(+ : s)
    for (ptrdiff_t i = 0; i < ptrdiff_t(n); ++i) {
      double d = double(a[i]) - double(b[i]);
      s += d * d;
    }
    return s;
  }
#endif
  return sum_squared_diff_serial(a, b, n);
}

uint64_t count_zeros_serial(const float* x, size_t n) {
  uint64_t c = 0;
  for (size_t i = 0; i < n; ++i) c += (x[i] == 0.0f);
  return c;
}

uint64_t count_zeros(const float* x, size_t n) {
#ifdef _OPENMP
  if (n >= kParallelThreshold) {
    uint64_t c = 0;
#pragma omp parallel for schedule(static) reduction(+ : c)
    for (ptrdiff_t i = 0; i < ptrdiff_t(n); ++i) c += (x[i] == 0.0f);
    return c;
  }
#endif
  return count_zeros_serial(x, n);
}

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

size_t parallel_threshold() { return kParallelThreshold; }

}  // namespace modelvc::kernels
