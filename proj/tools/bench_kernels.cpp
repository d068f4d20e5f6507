// Times the serial reference kernels against their OpenMP variants on the
// hot paths of delta encoding (quantize/dequantize) and the diagnostic
// reductions. Usage: bench_kernels [elements] [repeats]

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <vector>

#include "modelvc/kernels.hpp"

using namespace modelvc;

namespace {

double ms_per_run(const std::function<void()>& fn, int repeats) {
  fn();   // warm up
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

void row(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-16s %10.3f ms %10.3f ms %8.2fx\n", name, serial_ms, parallel_ms,
              parallel_ms > 0 ? serial_ms / parallel_ms : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
  size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : (size_t{1} << 24);
  int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
  double step = kernels::quant_step(1e-4);

  std::mt19937_64 rng(42);
  std::normal_distribution<float> base(0.0f, 1.0f), jitter(0.0f, 1e-4f);
  std::vector<float> p1(n), p2(n), recon(n);
  std::vector<int64_t> q(n);
  for (size_t i = 0; i < n; ++i) {
    p1[i] = base(rng);
    p2[i] = p1[i] + jitter(rng);
  }

  std::printf("elements: %zu   repeats: %d   openmp: %s   parallel threshold: %zu\n\n", n,
              repeats, kernels::openmp_enabled() ? "on" : "off", kernels::parallel_threshold());
  std::printf("%-16s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  row("quantize",
      ms_per_run([&] { kernels::quantize_serial(p1.data(), p2.data(), n, step, q.data()); },
                 repeats),
      ms_per_run([&] { kernels::quantize(p1.data(), p2.data(), n, step, q.data()); }, repeats));
  row("dequantize",
      ms_per_run([&] { kernels::dequantize_serial(p1.data(), q.data(), n, step, recon.data()); },
                 repeats),
      ms_per_run([&] { kernels::dequantize(p1.data(), q.data(), n, step, recon.data()); },
                 repeats));

  volatile double sink = 0;
  row("sum_squares",
      ms_per_run([&] { sink = kernels::sum_squares_serial(p1.data(), n); }, repeats),
      ms_per_run([&] { sink = kernels::sum_squares(p1.data(), n); }, repeats));
  row("sum_sq_diff",
      ms_per_run([&] { sink = kernels::sum_squared_diff_serial(p1.data(), p2.data(), n); },
                 repeats),
      ms_per_run([&] { sink = kernels::sum_squared_diff(p1.data(), p2.data(), n); }, repeats));

  volatile uint64_t zsink = 0;
  row("count_zeros",
      ms_per_run([&] { zsink = kernels::count_zeros_serial(p1.data(), n); }, repeats),
      ms_per_run([&] { zsink = kernels::count_zeros(p1.data(), n); }, repeats));
  (void)sink;
  (void)zsink;

  // Elementwise kernels must agree bit-for-bit across variants.
  std::vector<int64_t> q_ref(n);
  kernels::quantize_serial(p1.data(), p2.data(), n, step, q_ref.data());
  kernels::quantize(p1.data(), p2.data(), n, step, q.data());
  size_t mismatches = 0;
  for (size_t i = 0; i < n; ++i) {
    if (q[i] != q_ref[i]) ++mismatches;
  }
  std::printf("\nquantize serial/parallel mismatches: %zu\n", mismatches);
  return mismatches == 0 ? 0 : 1;
}
