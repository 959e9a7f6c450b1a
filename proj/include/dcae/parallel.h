// dcae/parallel.h

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

#ifndef DCAE_PARALLEL_H_
#define DCAE_PARALLEL_H_

#include <exception>

namespace dcae {

// Global worker cap (--jobs).  1 selects the plain serial loops; any value
// must produce bitwise-identical numbers because loop bodies only write to
// their own slots and reductions happen serially afterwards.
void set_max_threads(int n);
int max_threads();

namespace internal {
void run_parallel(int n, void *ctx, void (*body)(void *, int));
}

// body(i) for i in [0, n).  Exceptions thrown inside the body are captured
// and rethrown after the loop (lowest index wins).
template <typename F>
void parallel_for(int n, F &&body) {
  if (n <= 0) return;
  if (max_threads() == 1 || n == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  internal::run_parallel(n, &body, [](void *ctx, int i) {
    (*static_cast<F *>(ctx))(i);
  });
}

}  // namespace dcae

#endif  // DCAE_PARALLEL_H_
