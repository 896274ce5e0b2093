#include "propspot/eval.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace propspot::eval {

namespace {

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double harmonic_f1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::size_t overlap_length(const corpus::SpanLabel& a, const corpus::SpanLabel& b) {
  const std::size_t lo = std::max(a.begin, b.begin);
  const std::size_t hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

}  // namespace

BinaryMetrics token_metrics(const std::vector<int>& pred, const std::vector<int>& gold) {
  if (pred.size() != gold.size()) {
    throw ValidationError("token_metrics: prediction and gold label lengths differ (" +
                          std::to_string(pred.size()) + " vs " + std::to_string(gold.size()) +
                          ")");
  }
  BinaryMetrics m;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool g = gold[i] != 0;
    if (p && g) ++m.tp;
    else if (p && !g) ++m.fp;
    else if (!p && g) ++m.fn;
    else ++m.tn;
  }
  m.precision = safe_div(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fp));
  m.recall = safe_div(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fn));
  m.f1 = harmonic_f1(m.precision, m.recall);
  m.accuracy = pred.empty() ? 0.0
                            : static_cast<double>(m.tp + m.tn) / static_cast<double>(pred.size());
  return m;
}

SpanMetrics span_metrics(const std::vector<corpus::SpanLabel>& pred,
                         const std::vector<corpus::SpanLabel>& gold, bool normalized) {
  // Group per article; iterate ids in sorted order for a deterministic
  // floating-point reduction.
  std::map<std::string, std::pair<std::vector<corpus::SpanLabel>, std::vector<corpus::SpanLabel>>>
      by_article;
  for (const auto& s : pred) by_article[s.article_id].first.push_back(s);
  for (const auto& t : gold) by_article[t.article_id].second.push_back(t);

  SpanMetrics out;
  if (normalized) {
    // Character-level diagnostic: P = |∪S ∩ ∪T| / |∪S|, R = |∪S ∩ ∪T| / |∪T|.
    std::size_t union_pred = 0, union_gold = 0, inter = 0;
    for (const auto& [id, st] : by_article) {
      std::size_t max_end = 0;
      for (const auto& s : st.first) max_end = std::max(max_end, s.end);
      for (const auto& t : st.second) max_end = std::max(max_end, t.end);
      std::vector<char> in_pred(max_end, 0), in_gold(max_end, 0);
      for (const auto& s : st.first) std::fill(in_pred.begin() + s.begin, in_pred.begin() + s.end, 1);
      for (const auto& t : st.second) std::fill(in_gold.begin() + t.begin, in_gold.begin() + t.end, 1);
      for (std::size_t i = 0; i < max_end; ++i) {
        union_pred += in_pred[i];
        union_gold += in_gold[i];
        inter += in_pred[i] && in_gold[i];
      }
    }
    out.precision = safe_div(static_cast<double>(inter), static_cast<double>(union_pred));
    out.recall = safe_div(static_cast<double>(inter), static_cast<double>(union_gold));
    out.f1 = harmonic_f1(out.precision, out.recall);
    return out;
  }

  double precision_sum = 0.0;
  double recall_sum = 0.0;
  for (const auto& [id, st] : by_article) {
    for (const auto& s : st.first) {
      for (const auto& t : st.second) {
        const std::size_t inter = overlap_length(s, t);
        if (inter == 0) continue;
        precision_sum += static_cast<double>(inter) / static_cast<double>(s.end - s.begin);
        recall_sum += static_cast<double>(inter) / static_cast<double>(t.end - t.begin);
      }
    }
  }
  out.precision = safe_div(precision_sum, static_cast<double>(pred.size()));
  out.recall = safe_div(recall_sum, static_cast<double>(gold.size()));
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

ClassReport class_report(const std::vector<std::string>& pred,
                         const std::vector<std::string>& gold,
                         const std::vector<std::string>& class_names,
                         bool macro_present_only) {
  if (pred.size() != gold.size()) {
    throw ValidationError("class_report: prediction and gold lengths differ");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < class_names.size(); ++i) index[class_names[i]] = i;
  const auto resolve = [&](const std::string& label) {
    const auto it = index.find(label);
    if (it == index.end()) {
      throw ValidationError("class_report: unknown label \"" + label + "\"");
    }
    return it->second;
  };

  const std::size_t k = class_names.size();
  std::vector<long> tp(k, 0), fp(k, 0), fn(k, 0);
  long correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const std::size_t p = resolve(pred[i]);
    const std::size_t g = resolve(gold[i]);
    if (p == g) {
      ++tp[p];
      ++correct;
    } else {
      ++fp[p];
      ++fn[g];
    }
  }

  ClassReport report;
  report.per_class.resize(k);
  double macro_sum = 0.0;
  std::size_t macro_count = 0;
  for (std::size_t c = 0; c < k; ++c) {
    auto& cs = report.per_class[c];
    cs.name = class_names[c];
    cs.support = tp[c] + fn[c];
    cs.precision = safe_div(static_cast<double>(tp[c]), static_cast<double>(tp[c] + fp[c]));
    cs.recall = safe_div(static_cast<double>(tp[c]), static_cast<double>(tp[c] + fn[c]));
    cs.f1 = harmonic_f1(cs.precision, cs.recall);
    const bool present = (tp[c] + fp[c] + fn[c]) > 0;
    if (!macro_present_only || present) {
      macro_sum += cs.f1;
      ++macro_count;
    }
  }
  report.macro_f1 = macro_count > 0 ? macro_sum / static_cast<double>(macro_count) : 0.0;
  // Pooled counts: every error is one FP and one FN, so micro-F1 reduces to
  // accuracy for single-label predictions.
  report.micro_f1 =
      pred.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(pred.size());
  return report;
}

}  // namespace propspot::eval
