// dcae/loss.cc

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

#include "dcae/loss.h"

#include <cmath>

namespace dcae {

LossGrad recon_error(const Matrix &f_x, const Matrix &x) {
  require(f_x.same_shape(x), "recon_error: shape mismatch");
  const int T = f_x.rows();
  LossGrad res;
  res.grad = Matrix(f_x.rows(), f_x.cols());
  double acc = 0.0;
  for (size_t i = 0; i < f_x.size(); ++i) {
    const double d = f_x.data()[i] - x.data()[i];
    acc += d * d;
    res.grad.data()[i] = 2.0 * d / T;
  }
  res.value = acc / T;
  return res;
}

LossGrad restore_error(const Matrix &g_x, const Matrix &y) {
  return recon_error(g_x, y);
}

LossGrad frame_ce(const Matrix &logits, const std::vector<int32_t> &labels) {
  const int T = logits.rows(), S = logits.cols();
  require(static_cast<int>(labels.size()) == T,
          "frame_ce: label count != frame count");
  LossGrad res;
  res.grad = Matrix(T, S);
  double acc = 0.0;
  for (int t = 0; t < T; ++t) {
    const int32_t label = labels[t];
    require(label >= 0 && label < S, "frame_ce: label out of range");
    const double *row = logits.row(t);
    double m = row[0];
    for (int s = 1; s < S; ++s) m = std::max(m, row[s]);
    double z = 0.0;
    for (int s = 0; s < S; ++s) z += std::exp(row[s] - m);
    const double log_z = m + std::log(z);
    acc += log_z - row[label];
    double *g = res.grad.row(t);
    for (int s = 0; s < S; ++s) g[s] = std::exp(row[s] - log_z) / T;
    g[label] -= 1.0 / T;
  }
  res.value = acc / T;
  return res;
}

LfmmiResult lfmmi(const Matrix &logits, const Fst &numerator,
                  const Fst &denominator) {
  ForwardBackwardResult num = forward_backward(numerator, logits);
  if (!num.ok)
    throw DataError("lfmmi: numerator graph has no accepting path "
                    "(alignment/graph mismatch)");
  ForwardBackwardResult den = forward_backward(denominator, logits);
  if (!den.ok)
    throw DataError("lfmmi: denominator graph has no accepting path");
  LfmmiResult res;
  res.objective = num.log_z - den.log_z;
  res.grad = num.gamma;
  res.grad.add_scaled(den.gamma, -1.0);
  return res;
}

LossBreakdown total_loss(double mmi_objective, double ce, double rc, double rs,
                         const LossWeights &weights) {
  LossBreakdown b;
  b.neg_mmi = -mmi_objective;
  b.ce = ce;
  b.rc = rc;
  b.rs = rs;
  b.total = -mmi_objective + weights.ce_weight * ce + weights.alpha * rc +
            weights.beta * rs;
  if (std::isnan(b.total))
    throw NumericError("total_loss: NaN in loss parts");
  return b;
}

}  // namespace dcae
