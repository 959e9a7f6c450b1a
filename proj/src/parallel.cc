// dcae/parallel.cc

// Copyright 2026  The dcae authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "dcae/parallel.h"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dcae {

namespace {
int g_max_threads = 0;  // 0 = not set yet, fall back to hardware default

int hardware_default() {
#ifdef _OPENMP
  return std::max(1, omp_get_max_threads());
#else
  return 1;
#endif
}
}  // namespace

void set_max_threads(int n) { g_max_threads = std::max(1, n); }

int max_threads() {
#ifdef _OPENMP
  return g_max_threads > 0 ? g_max_threads : hardware_default();
#else
  return 1;
#endif
}

namespace internal {

void run_parallel(int n, void *ctx, void (*body)(void *, int)) {
  std::exception_ptr first_error = nullptr;
  int error_index = n;
#ifdef _OPENMP
  if (omp_in_parallel()) {  // nested regions would serialize anyway
    for (int i = 0; i < n; ++i) body(ctx, i);
    return;
  }
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int i = 0; i < n; ++i) {
    try {
      body(ctx, i);
    } catch (...) {
#pragma omp critical(dcae_parallel_error)
      if (i < error_index) {
        error_index = i;
        first_error = std::current_exception();
      }
    }
  }
#else
  for (int i = 0; i < n; ++i) body(ctx, i);
#endif
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace internal

}  // namespace dcae
