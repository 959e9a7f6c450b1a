// dcae/loss.h

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

#ifndef DCAE_LOSS_H_
#define DCAE_LOSS_H_

#include <cstdint>
#include <vector>

#include "dcae/fst.h"
#include "dcae/matrix.h"

namespace dcae {

// Composite objective:  total = -F + ce_weight*ce + alpha*rc + beta*rs.
// The cross-entropy weight of 5 follows standard chain recipes.
struct LossWeights {
  double alpha = 0.5;
  double beta = 0.5;
  double ce_weight = 5.0;
};

struct LossBreakdown {
  double neg_mmi = 0.0;  // -F
  double ce = 0.0;
  double rc = 0.0;  // reconstruction (against the network input)
  double rs = 0.0;  // restoration (against the clean reference)
  double total = 0.0;
};

struct LossGrad {
  double value = 0.0;
  Matrix grad;
};

// Per-frame mean of ||f_x - x||^2; grad = 2*(f_x - x)/frames.
LossGrad recon_error(const Matrix &f_x, const Matrix &x);
// Same form against the clean reference.
LossGrad restore_error(const Matrix &g_x, const Matrix &y);

// Per-frame mean of -log softmax(logits[t])[label_t];
// grad = (softmax - one_hot)/frames.
LossGrad frame_ce(const Matrix &logits, const std::vector<int32_t> &labels);

struct LfmmiResult {
  double objective = 0.0;  // F = logZ_num - logZ_den
  Matrix grad;             // dF/dlogits = gamma_num - gamma_den
};

// The loss contributes -F to the total.
LfmmiResult lfmmi(const Matrix &logits, const Fst &numerator,
                  const Fst &denominator);

// Fixed left-to-right evaluation order so equal parts compose bitwise
// identically everywhere.  Throws NumericError when any part is NaN.
LossBreakdown total_loss(double mmi_objective, double ce, double rc, double rs,
                         const LossWeights &weights);

}  // namespace dcae

#endif  // DCAE_LOSS_H_
