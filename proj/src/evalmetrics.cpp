#include "slimtag/evalmetrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace slimtag {

using nlohmann::json;

std::vector<EntitySpan> extract_spans(const std::vector<int>& tags, const LabelScheme& scheme) {
  std::vector<EntitySpan> out;
  int open_class = -1;
  int open_start = -1;
  auto close = [&](int end) {
    if (open_class >= 0) out.push_back({open_start, end, open_class});
    open_class = -1;
  };
  for (size_t i = 0; i < tags.size(); ++i) {
    const int t = tags[i];
    if (t < 0 || t >= scheme.num_tags())
      throw DataError("extract_spans: invalid tag " + std::to_string(t));
    const int pos = static_cast<int>(i);
    if (scheme.is_o(t)) {
      close(pos);
    } else if (scheme.is_b(t)) {
      close(pos);
      open_class = scheme.tag_class(t);
      open_start = pos;
    } else {  // I-c: continues a same-class span, otherwise starts one
      const int cls = scheme.tag_class(t);
      if (open_class != cls) {
        close(pos);
        open_class = cls;
        open_start = pos;
      }
    }
  }
  close(static_cast<int>(tags.size()));
  return out;
}

namespace {

ClassPRF finalize_prf(int64_t tp, int64_t fp, int64_t fn, int64_t support) {
  ClassPRF c;
  c.tp = tp;
  c.fp = fp;
  c.fn = fn;
  c.support = support;
  c.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  c.recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  c.f1 = (c.precision + c.recall) == 0.0
             ? 0.0
             : 2.0 * c.precision * c.recall / (c.precision + c.recall);
  return c;
}

}  // namespace

PrfReport span_prf(const std::vector<EntitySpan>& gold, const std::vector<EntitySpan>& pred,
                   const LabelScheme& scheme) {
  const int C = scheme.num_classes();
  std::vector<int64_t> tp(static_cast<size_t>(C), 0), fp(static_cast<size_t>(C), 0),
      fn(static_cast<size_t>(C), 0), support(static_cast<size_t>(C), 0);

  std::vector<EntitySpan> gold_sorted = gold, pred_sorted = pred;
  std::sort(gold_sorted.begin(), gold_sorted.end());
  std::sort(pred_sorted.begin(), pred_sorted.end());
  size_t gi = 0, pi = 0;
  while (gi < gold_sorted.size() || pi < pred_sorted.size()) {
    if (gi < gold_sorted.size() && pi < pred_sorted.size() &&
        gold_sorted[gi] == pred_sorted[pi]) {
      ++tp[static_cast<size_t>(gold_sorted[gi].class_id)];
      ++gi;
      ++pi;
    } else if (pi >= pred_sorted.size() ||
               (gi < gold_sorted.size() && gold_sorted[gi] < pred_sorted[pi])) {
      ++fn[static_cast<size_t>(gold_sorted[gi].class_id)];
      ++gi;
    } else {
      ++fp[static_cast<size_t>(pred_sorted[pi].class_id)];
      ++pi;
    }
  }
  for (const auto& g : gold) ++support[static_cast<size_t>(g.class_id)];

  PrfReport report;
  int64_t tps = 0, fps = 0, fns = 0;
  int present = 0;
  for (int c = 0; c < C; ++c) {
    tps += tp[static_cast<size_t>(c)];
    fps += fp[static_cast<size_t>(c)];
    fns += fn[static_cast<size_t>(c)];
    if (support[static_cast<size_t>(c)] == 0) continue;
    ClassPRF prf = finalize_prf(tp[static_cast<size_t>(c)], fp[static_cast<size_t>(c)],
                                fn[static_cast<size_t>(c)], support[static_cast<size_t>(c)]);
    report.per_class[scheme.classes()[static_cast<size_t>(c)]] = prf;
    report.macro_precision += prf.precision;
    report.macro_recall += prf.recall;
    report.macro_f1 += prf.f1;
    ++present;
  }
  if (present > 0) {
    report.macro_precision /= present;
    report.macro_recall /= present;
    report.macro_f1 /= present;
  }
  ClassPRF micro = finalize_prf(tps, fps, fns, tps + fns);
  report.micro_precision = micro.precision;
  report.micro_recall = micro.recall;
  report.micro_f1 = micro.f1;
  return report;
}

double token_accuracy(const std::vector<int>& gold_tags, const std::vector<int>& pred_tags) {
  if (gold_tags.size() != pred_tags.size())
    throw DataError("token_accuracy: sequence lengths differ");
  int64_t total = 0, correct = 0;
  for (size_t i = 0; i < gold_tags.size(); ++i) {
    if (gold_tags[i] == LabelScheme::kIgnoreIndex) continue;
    ++total;
    if (gold_tags[i] == pred_tags[i]) ++correct;
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

EvalAccumulator::EvalAccumulator(const LabelScheme& scheme) : scheme_(scheme) {
  const size_t C = static_cast<size_t>(scheme.num_classes());
  tp_.assign(C, 0);
  fp_.assign(C, 0);
  fn_.assign(C, 0);
  support_.assign(C, 0);
  confusion_.assign(C + 1, std::vector<int64_t>(C + 1, 0));
}

void EvalAccumulator::add_sentence(const std::vector<int>& gold_tags,
                                   const std::vector<int>& pred_tags) {
  if (gold_tags.size() != pred_tags.size())
    throw DataError("eval: gold/pred lengths differ");
  // Span counts.
  const auto gold_spans = extract_spans(gold_tags, scheme_);
  const auto pred_spans = extract_spans(pred_tags, scheme_);
  std::vector<EntitySpan> gs = gold_spans, ps = pred_spans;
  std::sort(gs.begin(), gs.end());
  std::sort(ps.begin(), ps.end());
  size_t gi = 0, pi = 0;
  while (gi < gs.size() || pi < ps.size()) {
    if (gi < gs.size() && pi < ps.size() && gs[gi] == ps[pi]) {
      ++tp_[static_cast<size_t>(gs[gi].class_id)];
      ++gi;
      ++pi;
    } else if (pi >= ps.size() || (gi < gs.size() && gs[gi] < ps[pi])) {
      ++fn_[static_cast<size_t>(gs[gi].class_id)];
      ++gi;
    } else {
      ++fp_[static_cast<size_t>(ps[pi].class_id)];
      ++pi;
    }
  }
  for (const auto& g : gold_spans) ++support_[static_cast<size_t>(g.class_id)];

  // Token counts and class-collapsed confusion.
  for (size_t i = 0; i < gold_tags.size(); ++i) {
    if (gold_tags[i] == LabelScheme::kIgnoreIndex) continue;
    ++tokens_total_;
    if (gold_tags[i] == pred_tags[i]) ++tokens_correct_;
    const int grow = scheme_.is_o(gold_tags[i]) ? 0 : 1 + scheme_.tag_class(gold_tags[i]);
    const int pcol = scheme_.is_o(pred_tags[i]) ? 0 : 1 + scheme_.tag_class(pred_tags[i]);
    ++confusion_[static_cast<size_t>(grow)][static_cast<size_t>(pcol)];
  }
}

void EvalAccumulator::merge(const EvalAccumulator& other) {
  for (size_t c = 0; c < tp_.size(); ++c) {
    tp_[c] += other.tp_[c];
    fp_[c] += other.fp_[c];
    fn_[c] += other.fn_[c];
    support_[c] += other.support_[c];
  }
  tokens_total_ += other.tokens_total_;
  tokens_correct_ += other.tokens_correct_;
  for (size_t i = 0; i < confusion_.size(); ++i)
    for (size_t j = 0; j < confusion_.size(); ++j) confusion_[i][j] += other.confusion_[i][j];
}

EvalAccumulator::Report EvalAccumulator::finalize() const {
  Report r;
  const int C = scheme_.num_classes();
  int64_t tps = 0, fps = 0, fns = 0;
  int present = 0;
  for (int c = 0; c < C; ++c) {
    tps += tp_[static_cast<size_t>(c)];
    fps += fp_[static_cast<size_t>(c)];
    fns += fn_[static_cast<size_t>(c)];
    if (support_[static_cast<size_t>(c)] == 0) continue;
    ClassPRF prf = finalize_prf(tp_[static_cast<size_t>(c)], fp_[static_cast<size_t>(c)],
                                fn_[static_cast<size_t>(c)], support_[static_cast<size_t>(c)]);
    r.per_class[scheme_.classes()[static_cast<size_t>(c)]] = prf;
    r.macro_precision += prf.precision;
    r.macro_recall += prf.recall;
    r.macro_f1 += prf.f1;
    ++present;
  }
  if (present > 0) {
    r.macro_precision /= present;
    r.macro_recall /= present;
    r.macro_f1 /= present;
  }
  ClassPRF micro = finalize_prf(tps, fps, fns, tps + fns);
  r.micro_precision = micro.precision;
  r.micro_recall = micro.recall;
  r.micro_f1 = micro.f1;
  r.token_accuracy =
      tokens_total_ == 0 ? 0.0
                         : static_cast<double>(tokens_correct_) / static_cast<double>(tokens_total_);

  r.confusion_labels.push_back("O");
  for (const auto& c : scheme_.classes()) r.confusion_labels.push_back(c);
  r.confusion_counts = confusion_;
  r.confusion.assign(confusion_.size(), std::vector<double>(confusion_.size(), 0.0));
  for (size_t i = 0; i < confusion_.size(); ++i) {
    int64_t row = 0;
    for (int64_t v : confusion_[i]) row += v;
    if (row == 0) continue;
    for (size_t j = 0; j < confusion_.size(); ++j)
      r.confusion[i][j] = static_cast<double>(confusion_[i][j]) / static_cast<double>(row);
  }
  return r;
}

std::vector<std::vector<double>> confusion_matrix(const std::vector<int>& gold_tags,
                                                  const std::vector<int>& pred_tags,
                                                  const LabelScheme& scheme) {
  EvalAccumulator acc(scheme);
  acc.add_sentence(gold_tags, pred_tags);
  return acc.finalize().confusion;
}

std::string render_report_table(const EvalAccumulator::Report& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %9s %9s %9s %9s\n", "class", "prec", "recall", "f1",
                "support");
  os << line;
  for (const auto& [name, prf] : report.per_class) {
    std::snprintf(line, sizeof(line), "%-8s %9.4f %9.4f %9.4f %9lld\n", name.c_str(),
                  prf.precision, prf.recall, prf.f1, static_cast<long long>(prf.support));
    os << line;
  }
  std::snprintf(line, sizeof(line), "%-8s %9.4f %9.4f %9.4f\n", "macro", report.macro_precision,
                report.macro_recall, report.macro_f1);
  os << line;
  std::snprintf(line, sizeof(line), "%-8s %9.4f %9.4f %9.4f\n", "micro", report.micro_precision,
                report.micro_recall, report.micro_f1);
  os << line;
  std::snprintf(line, sizeof(line), "token accuracy: %.4f\n", report.token_accuracy);
  os << line;
  return os.str();
}

std::string report_to_json(const EvalAccumulator::Report& report) {
  json per_class = json::object();
  for (const auto& [name, prf] : report.per_class) {
    per_class[name] = {{"precision", prf.precision}, {"recall", prf.recall},
                       {"f1", prf.f1},               {"tp", prf.tp},
                       {"fp", prf.fp},               {"fn", prf.fn},
                       {"support", prf.support}};
  }
  json j{{"per_class", per_class},
         {"macro", {{"precision", report.macro_precision},
                    {"recall", report.macro_recall},
                    {"f1", report.macro_f1}}},
         {"micro", {{"precision", report.micro_precision},
                    {"recall", report.micro_recall},
                    {"f1", report.micro_f1}}},
         {"token_accuracy", report.token_accuracy},
         {"confusion", {{"labels", report.confusion_labels},
                        {"rows", report.confusion},
                        {"counts", report.confusion_counts}}}};
  return j.dump(2);
}

std::string confusion_to_csv(const EvalAccumulator::Report& report) {
  std::ostringstream os;
  os << "true\\pred";
  for (const auto& l : report.confusion_labels) os << "," << l;
  os << "\n";
  for (size_t i = 0; i < report.confusion.size(); ++i) {
    os << report.confusion_labels[i];
    for (size_t j = 0; j < report.confusion[i].size(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6f", report.confusion[i][j]);
      os << "," << buf;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace slimtag
