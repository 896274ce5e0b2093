#pragma once

#include <string>
#include <vector>

#include "propspot/common.hpp"
#include "propspot/corpus.hpp"

namespace propspot::eval {

struct BinaryMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

// Positive class = propaganda. P is 0 (defined) when nothing was predicted
// positive; same for R with no gold positives.
BinaryMetrics token_metrics(const std::vector<int>& pred, const std::vector<int>& gold);

struct SpanMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Overlap-proportional credit between predicted and gold spans:
//   C(s, t, h) = |s ∩ t| / h for same-article overlapping spans, else 0
//   P = (1/|S|) sum_s sum_t C(s, t, |s|),  R = (1/|T|) sum_s sum_t C(s, t, |t|)
// with |S|, |T| counted dataset-wide. This measure can exceed 1 when one span
// overlaps several counterparts; normalized=true switches to the
// character-level diagnostic variant (P = |∪S ∩ ∪T| / |∪S|, R likewise).
SpanMetrics span_metrics(const std::vector<corpus::SpanLabel>& pred,
                         const std::vector<corpus::SpanLabel>& gold, bool normalized = false);

struct ClassScores {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;  // gold count
};

struct ClassReport {
  std::vector<ClassScores> per_class;  // canonical class order
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
};

// One-vs-rest P/R/F1 per class plus pooled micro-F1 (equals accuracy for
// single-label predictions). macro_present_only drops classes absent from
// both pred and gold from the macro mean; the default denominator is the
// full class set.
ClassReport class_report(const std::vector<std::string>& pred,
                         const std::vector<std::string>& gold,
                         const std::vector<std::string>& class_names = corpus::technique_names(),
                         bool macro_present_only = false);

}  // namespace propspot::eval
