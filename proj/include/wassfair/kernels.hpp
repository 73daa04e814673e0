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

#ifndef WASSFAIR_KERNELS_HPP_
#define WASSFAIR_KERNELS_HPP_

#include <cstddef>

// Arithmetic inner loops shared by the model and distance code. Every kernel
// has a scalar reference implementation and, on x86-64 with AVX2, a vector
// variant selected once at startup. The two variants may differ in the last
// bits (FMA, reduction order); equivalence is asserted by tests at ~1e-13
// relative tolerance, never bit-exactly.
namespace wassfair::kernels {

enum class Backend { Scalar, Avx2 };

// Backend chosen for this process. Defaults to the widest supported ISA;
// WASSFAIR_KERNELS=scalar|avx2 in the environment overrides the choice.
Backend active();
const char* backend_name(Backend b);
bool avx2_supported();

// Force a backend (tests, or reproducing a run on different hardware).
// Throws std::runtime_error if the backend is unavailable on this machine.
void force_backend(Backend b);

double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
double sq_diff_sum(const double* a, const double* b, std::size_t n);  // sum (a-b)^2
double abs_diff_sum(const double* a, const double* b, std::size_t n);  // sum |a-b|
void relu(const double* x, double* y, std::size_t n);  // y = max(x, 0)

// Reference path, always available; the dispatched functions above must agree
// with these up to floating-point reassociation.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sq_diff_sum(const double* a, const double* b, std::size_t n);
double abs_diff_sum(const double* a, const double* b, std::size_t n);
void relu(const double* x, double* y, std::size_t n);
}  // namespace scalar

// AVX2 path; defined for all targets but only callable when avx2_supported().
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sq_diff_sum(const double* a, const double* b, std::size_t n);
double abs_diff_sum(const double* a, const double* b, std::size_t n);
void relu(const double* x, double* y, std::size_t n);
}  // namespace avx2

}  // namespace wassfair::kernels

#endif  // WASSFAIR_KERNELS_HPP_
