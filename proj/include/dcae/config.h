// dcae/config.h

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

#ifndef DCAE_CONFIG_H_
#define DCAE_CONFIG_H_

#include <string>
#include <vector>

#include "dcae/corpus.h"
#include "dcae/model.h"
#include "dcae/train.h"

namespace dcae {

// Whole-pipeline configuration.  JSON with strict keys: unknown keys are
// rejected with a ConfigError.  `--set dotted.key=value` overrides win over
// the file.
struct RunConfig {
  CorpusSpec corpus;
  ModelConfig model;
  TrainSchedule schedule;
  std::string out_dir = "out";
};

// Parses the file at `path`, applying overrides of the form
// "dotted.key=value".  Malformed JSON raises ConfigError with a line/column
// diagnostic.
RunConfig load_run_config(const std::string &path,
                          const std::vector<std::string> &overrides);

RunConfig parse_run_config(const std::string &json_text,
                           const std::vector<std::string> &overrides);

}  // namespace dcae

#endif  // DCAE_CONFIG_H_
