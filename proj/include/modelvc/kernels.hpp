#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace modelvc::kernels {

// ---- Delta quantization kernels ----
//
// Each kernel has a serial reference implementation (the ground truth the
// tests compare against) and an OpenMP variant.  The unsuffixed entry points
// dispatch to the parallel variant for large inputs when OpenMP is enabled.
// Elementwise kernels are bit-identical across variants and thread counts;
// reductions may differ by summation order and are compared with tolerance.

// lattice step for a given epsilon: 2 * ln(1 + epsilon), natural log, double
double quant_step(double epsilon);

// q[i] = floor((p1[i] - p2[i]) / step + 0.5), computed in double.
// Non-finite or out-of-int64-range results clamp to 0; callers detect those
// elements afterwards via the reconstruction bound scan.
void quantize_serial(const float* p1, const float* p2, size_t n, double step, int64_t* q);
void quantize(const float* p1, const float* p2, size_t n, double step, int64_t* q);

// out[i] = float(p1[i] - q[i] * step), computed in double
void dequantize_serial(const float* p1, const int64_t* q, size_t n, double step, float* out);
void dequantize(const float* p1, const int64_t* q, size_t n, double step, float* out);

// indices where |orig[i] - recon[i]| > bound or either value is non-finite
std::vector<uint64_t> bound_violations(const float* orig, const float* recon, size_t n,
                                       double bound);

// ---- Reductions used by diagnostics ----

double sum_squares_serial(const float* x, size_t n);
double sum_squares(const float* x, size_t n);

double sum_squared_diff_serial(const float* a, const float* b, size_t n);
double sum_squared_diff(const float* a, const float* b, size_t n);

uint64_t count_zeros_serial(const float* x, size_t n);
uint64_t count_zeros(const float* x, size_t n);

bool openmp_enabled();
size_t parallel_threshold();   // element count below which dispatch stays serial

}  // namespace modelvc::kernels
