/*
 * Copyright 2026 The wassfair authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "wassfair/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace wassfair::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double abs_diff_sum(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
  return acc;
}

void relu(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

}  // namespace scalar

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*sq_diff_sum)(const double*, const double*, std::size_t);
  double (*abs_diff_sum)(const double*, const double*, std::size_t);
  void (*relu)(const double*, double*, std::size_t);
  Backend backend;
};

constexpr Table kScalarTable{scalar::dot, scalar::axpy, scalar::sq_diff_sum,
                             scalar::abs_diff_sum, scalar::relu,
                             Backend::Scalar};
constexpr Table kAvx2Table{avx2::dot, avx2::axpy, avx2::sq_diff_sum,
                           avx2::abs_diff_sum, avx2::relu, Backend::Avx2};

Table pick_default() {
  const char* env = std::getenv("WASSFAIR_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return kScalarTable;
    if (std::strcmp(env, "avx2") == 0) {
      if (!avx2_supported()) {
        throw std::runtime_error("WASSFAIR_KERNELS=avx2 but AVX2 is not supported on this CPU");
      }
      return kAvx2Table;
    }
  }
  return avx2_supported() ? kAvx2Table : kScalarTable;
}

Table& table() {
  static Table t = pick_default();
  return t;
}

}  // namespace

Backend active() { return table().backend; }

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

void force_backend(Backend b) {
  if (b == Backend::Avx2 && !avx2_supported()) {
    throw std::runtime_error("AVX2 backend requested but not supported on this CPU");
  }
  table() = (b == Backend::Avx2) ? kAvx2Table : kScalarTable;
}

double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { table().axpy(alpha, x, y, n); }
double sq_diff_sum(const double* a, const double* b, std::size_t n) { return table().sq_diff_sum(a, b, n); }
double abs_diff_sum(const double* a, const double* b, std::size_t n) { return table().abs_diff_sum(a, b, n); }
void relu(const double* x, double* y, std::size_t n) { table().relu(x, y, n); }

}  // namespace wassfair::kernels
