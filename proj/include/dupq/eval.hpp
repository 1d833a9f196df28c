// Copyright 2026 The dupq Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dupq/corpus.hpp"

namespace dupq {

/// Binary classification metrics with duplicate (1) as the positive class.
/// Rates are percentages in [0, 100].
struct Metrics {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f_score = 0;
  /// Precision or recall had a zero denominator and was reported as 0.
  bool degenerate = false;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Metrics&) const = default;
};

Metrics score(std::span<const int> predictions, std::span<const int> gold);

struct ReportRow {
  std::string model;
  std::string split;
  Metrics metrics;
  std::string error;  // non-empty when the model could not be scored
};

struct NamedPredictor {
  std::string name;
  std::function<std::vector<int>(const Dataset&)> predict;
};

/// Scores every model on `data`. A model that throws gets an annotated row.
std::vector<ReportRow> compare(const std::vector<NamedPredictor>& models, const Dataset& data,
                               const std::string& split_name);

/// Columns: model,split,accuracy,f_score,tp,fp,fn,tn,error
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);
void print_report(std::ostream& out, const std::vector<ReportRow>& rows);

/// One row of a hyperparameter or feature sweep.
struct SweepRow {
  std::string setting;
  Metrics metrics;
  std::string error;
};

/// Evaluates each setting; exceptions are recorded on the row.
std::vector<SweepRow> run_sweep(const std::vector<std::string>& settings,
                                const std::function<Metrics(std::size_t)>& evaluate);

/// Columns: setting,accuracy,f_score,tp,fp,fn,tn,error
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                     const std::string& setting_header = "setting");

}  // namespace dupq
