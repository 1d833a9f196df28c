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

#include "dupq/eval.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "dupq/csv.hpp"

namespace dupq {

namespace {

std::string fixed(double x, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

}  // namespace

Metrics score(std::span<const int> predictions, std::span<const int> gold) {
  if (predictions.size() != gold.size())
    throw std::invalid_argument("score: " + std::to_string(predictions.size()) +
                                " predictions for " + std::to_string(gold.size()) + " labels");
  Metrics m;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool p = predictions[i] == 1, g = gold[i] == 1;
    if (p && g) ++m.tp;
    else if (p && !g) ++m.fp;
    else if (!p && g) ++m.fn;
    else ++m.tn;
  }
  const double total = static_cast<double>(m.total());
  m.accuracy = total > 0 ? 100.0 * static_cast<double>(m.tp + m.tn) / total : 0.0;
  const double tp = static_cast<double>(m.tp);
  if (m.tp + m.fp > 0) {
    m.precision = 100.0 * tp / static_cast<double>(m.tp + m.fp);
  } else {
    m.degenerate = true;
  }
  if (m.tp + m.fn > 0) {
    m.recall = 100.0 * tp / static_cast<double>(m.tp + m.fn);
  } else {
    m.degenerate = true;
  }
  if (!m.degenerate && m.precision + m.recall > 0)
    m.f_score = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

std::vector<ReportRow> compare(const std::vector<NamedPredictor>& models, const Dataset& data,
                               const std::string& split_name) {
  const std::vector<int> gold = labels_of(data);
  std::vector<ReportRow> rows;
  for (const auto& m : models) {
    ReportRow r{m.name, split_name, {}, {}};
    try {
      const std::vector<int> pred = m.predict(data);
      r.metrics = score(pred, gold);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "model,split,accuracy,f_score,tp,fp,fn,tn,error\n";
  for (const auto& r : rows) {
    const Metrics& m = r.metrics;
    csv::write_row(out, {r.model, r.split, fixed(m.accuracy), fixed(m.f_score), std::to_string(m.tp),
                         std::to_string(m.fp), std::to_string(m.fn), std::to_string(m.tn), r.error});
  }
}

void print_report(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << std::left << std::setw(28) << "model" << std::setw(12) << "split" << std::right
      << std::setw(10) << "accuracy" << std::setw(10) << "F-score" << "\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(28) << r.model << std::setw(12) << r.split << std::right;
    if (!r.error.empty()) {
      out << "  error: " << r.error << "\n";
      continue;
    }
    out << std::setw(10) << fixed(r.metrics.accuracy, 1) << std::setw(10)
        << (r.metrics.degenerate ? std::string("-") : fixed(r.metrics.f_score, 1)) << "\n";
  }
}

std::vector<SweepRow> run_sweep(const std::vector<std::string>& settings,
                                const std::function<Metrics(std::size_t)>& evaluate) {
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < settings.size(); ++i) {
    SweepRow r{settings[i], {}, {}};
    try {
      r.metrics = evaluate(i);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                     const std::string& setting_header) {
  out << setting_header << ",accuracy,f_score,tp,fp,fn,tn,error\n";
  for (const auto& r : rows) {
    const Metrics& m = r.metrics;
    csv::write_row(out, {r.setting, fixed(m.accuracy), fixed(m.f_score), std::to_string(m.tp),
                         std::to_string(m.fp), std::to_string(m.fn), std::to_string(m.tn), r.error});
  }
}

}  // namespace dupq
