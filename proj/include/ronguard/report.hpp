#pragma once

#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ronguard/dataset.hpp"
#include "ronguard/trials.hpp"

namespace ronguard {

enum class ReportFormat { Csv, Markdown };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  throw ArgumentError("unknown report format '" + std::string(s) + "' (expected csv or markdown)");
}

inline constexpr std::string_view kTrialCsvHeader = "classifier,size,trial,tp,tn,fp,fn,tpr,tnr,fpr,fnr,accuracy";

/// Historical PCA + convex-hull screening FPR on RON data, quoted in report
/// footnotes for comparison.
inline constexpr double kConvexHullReferenceFpr = 0.50;

namespace detail {

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string markdown(const TrialReport& report) {
  std::ostringstream out;
  bool first = true;
  for (const auto& name : report.classifiers) {
    if (!first) out << '\n';
    first = false;
    out << "## " << name << "\n\n| Metric |";
    for (auto s : report.sizes) out << ' ' << s << " Samples |";
    out << "\n|:--|";
    for (std::size_t i = 0; i < report.sizes.size(); ++i) out << "--:|";
    out << '\n';
    const std::pair<const char*, double RateMetrics::*> metrics[] = {
        {"TNR", &RateMetrics::tnr}, {"FPR", &RateMetrics::fpr}, {"FNR", &RateMetrics::fnr},
        {"TPR", &RateMetrics::tpr}, {"Accuracy", &RateMetrics::accuracy}};
    for (const auto& [label, field] : metrics) {
      out << "| " << label << " |";
      for (auto s : report.sizes) out << ' ' << fixed(report.row(name, s).mean.*field, 3) << " |";
      out << '\n';
    }
  }
  if (report.n_trials > 0) out << "\nMeans over " << report.n_trials << " trials per training size.";
  out << "\nReference: PCA + convex-hull screening FPR ~ " << fixed(kConvexHullReferenceFpr, 2) << ".\n";
  return out.str();
}

inline std::string csv(const TrialReport& report) {
  std::ostringstream out;
  out << kTrialCsvHeader << '\n';
  for (const auto& r : report.trials) {
    out << r.classifier << ',' << r.size << ',' << r.trial << ',' << r.counts.tp << ',' << r.counts.tn << ','
        << r.counts.fp << ',' << r.counts.fn << ',' << fixed(r.metrics.tpr, 6) << ',' << fixed(r.metrics.tnr, 6) << ','
        << fixed(r.metrics.fpr, 6) << ',' << fixed(r.metrics.fnr, 6) << ',' << fixed(r.metrics.accuracy, 6) << '\n';
  }
  return out.str();
}

}  // namespace detail

/**
 * Markdown: one "Metric x Sample Size" table per classifier with rows
 * TNR/FPR/FNR/TPR/Accuracy and 3-decimal cells.
 * CSV: one long-form row per (classifier, size, trial).
 */
inline std::string emit_report(const TrialReport& report, ReportFormat format) {
  if (report.classifiers.empty()) throw ArgumentError("report has no classifiers");
  if (report.sizes.empty()) throw ArgumentError("report has no training sizes");
  return format == ReportFormat::Markdown ? detail::markdown(report) : detail::csv(report);
}

/// Rebuilds a report from long-form CSV. Per-trial rates are recomputed from
/// the counts, so the means match the report that produced the file.
inline TrialReport read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw EmptyDatasetError("report csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrialCsvHeader) throw SchemaError("classifier", "report csv header does not match '" + std::string(kTrialCsvHeader) + "'");

  TrialReport report;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_commas(line);
    if (f.size() != 12) throw RowError(line_no, "expected 12 fields, found " + std::to_string(f.size()));
    long long v[6];
    for (int i = 0; i < 6; ++i) {
      if (!detail::parse_int(f[1 + i], v[i]) || v[i] < 0) throw RowError(line_no, "field " + std::to_string(i + 2) + " is not a count");
    }
    TrialRecord r;
    r.classifier = std::string(f[0]);
    r.size = static_cast<std::size_t>(v[0]);
    r.trial = static_cast<std::size_t>(v[1]);
    r.counts = {static_cast<std::uint64_t>(v[2]), static_cast<std::uint64_t>(v[3]), static_cast<std::uint64_t>(v[4]),
                static_cast<std::uint64_t>(v[5])};
    if (r.counts.total() == 0) throw RowError(line_no, "trial has no samples");
    r.metrics = rates(r.counts);
    r.vacuous = has_vacuous_rate(r.counts);
    if (std::ranges::find(report.classifiers, r.classifier) == report.classifiers.end()) report.classifiers.push_back(r.classifier);
    if (std::ranges::find(report.sizes, r.size) == report.sizes.end()) report.sizes.push_back(r.size);
    report.trials.push_back(std::move(r));
  }
  if (report.trials.empty()) throw EmptyDatasetError("report csv has no rows");

  for (const auto& name : report.classifiers) {
    for (auto size : report.sizes) {
      std::vector<RateMetrics> per_trial;
      for (const auto& r : report.trials)
        if (r.classifier == name && r.size == size) per_trial.push_back(r.metrics);
      if (per_trial.empty()) throw DataError("report csv has no trials for " + name + " at size " + std::to_string(size));
      report.n_trials = std::max(report.n_trials, per_trial.size());
      report.rows.push_back({name, size, mean_metrics(per_trial)});
    }
  }
  return report;
}

}  // namespace ronguard
