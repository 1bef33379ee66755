#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slimtag/corpus.hpp"
#include "slimtag/crf.hpp"
#include "slimtag/distill.hpp"
#include "slimtag/evalmetrics.hpp"
#include "slimtag/quant.hpp"
#include "slimtag/tensor_ops.hpp"
#include "slimtag/tokenizer.hpp"
#include "slimtag/version.hpp"

namespace py = pybind11;
using namespace slimtag;

namespace {

using Matrix = std::vector<std::vector<double>>;

Tensor to_tensor(const Matrix& rows) {
  if (rows.empty()) throw DimensionError("empty matrix");
  const int n = static_cast<int>(rows.size());
  const int k = static_cast<int>(rows[0].size());
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(n) * k);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != k) throw DimensionError("ragged matrix");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Tensor::from({n, k}, std::move(flat));
}

Matrix from_tensor(const Tensor& t) {
  Matrix out(static_cast<size_t>(t.rows()), std::vector<double>(static_cast<size_t>(t.cols())));
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j) out[static_cast<size_t>(i)][static_cast<size_t>(j)] = t.at(i, j);
  return out;
}

struct CrfArgs {
  Tensor emissions;
  std::vector<uint8_t> mask;
  TransitionMatrix trans;
};

CrfArgs make_crf(const Matrix& emissions, const Matrix& transitions,
                 const std::vector<int>& mask) {
  CrfArgs a{to_tensor(emissions), {}, {}};
  const int n = a.emissions.rows();
  const int K = a.emissions.cols();
  Tensor t = to_tensor(transitions);
  if (t.rows() != K + 2 || t.cols() != K + 2)
    throw DimensionError("transitions must be (K+2) x (K+2)");
  a.trans.num_tags = K;
  a.trans.scores = make_param(std::move(t));
  if (mask.empty()) {
    a.mask.assign(static_cast<size_t>(n), 1);
  } else {
    if (static_cast<int>(mask.size()) != n) throw DimensionError("mask length mismatch");
    for (int m : mask) a.mask.push_back(m ? 1 : 0);
  }
  return a;
}

LabelScheme scheme_of(const std::vector<std::string>& classes) { return LabelScheme(classes); }

}  // namespace

PYBIND11_MODULE(_slimtag_core, m) {
  m.doc() = "native core: CRF recursions, distillation losses, INT8 kernels, strict metrics";
  m.attr("__version__") = kVersion;
  m.attr("NEG_INF") = kNegInf;
  m.attr("IGNORE_INDEX") = static_cast<int>(LabelScheme::kIgnoreIndex);

  py::register_exception<Error>(m, "SlimtagError");

  m.def("set_float64", [](bool on) { set_precision(on ? Precision::F64 : Precision::F32); },
        py::arg("on") = true, "switch the global precision mode");

  m.def("log_sum_exp",
        [](const std::vector<double>& x) { return log_sum_exp(x); },
        py::arg("values"));

  m.def("log_softmax",
        [](const Matrix& x) { return from_tensor(log_softmax_rows(to_tensor(x))); },
        py::arg("logits"), "row-wise log-softmax");

  m.def(
      "crf_path_score",
      [](const Matrix& emissions, const Matrix& transitions, const std::vector<int>& tags,
         const std::vector<int>& mask) {
        CrfArgs a = make_crf(emissions, transitions, mask);
        EmissionView view{a.emissions, a.mask};
        return path_score(view, a.trans, tags);
      },
      py::arg("emissions"), py::arg("transitions"), py::arg("tags"),
      py::arg("mask") = std::vector<int>{});

  m.def(
      "crf_log_partition",
      [](const Matrix& emissions, const Matrix& transitions, const std::vector<int>& mask) {
        CrfArgs a = make_crf(emissions, transitions, mask);
        EmissionView view{a.emissions, a.mask};
        return log_partition(view, a.trans);
      },
      py::arg("emissions"), py::arg("transitions"), py::arg("mask") = std::vector<int>{});

  m.def(
      "crf_nll",
      [](const Matrix& emissions, const Matrix& transitions, const std::vector<int>& gold,
         const std::vector<int>& mask) {
        CrfArgs a = make_crf(emissions, transitions, mask);
        EmissionView view{a.emissions, a.mask};
        return nll(view, a.trans, gold);
      },
      py::arg("emissions"), py::arg("transitions"), py::arg("gold"),
      py::arg("mask") = std::vector<int>{});

  m.def(
      "crf_marginals",
      [](const Matrix& emissions, const Matrix& transitions, const std::vector<int>& mask) {
        CrfArgs a = make_crf(emissions, transitions, mask);
        EmissionView view{a.emissions, a.mask};
        return from_tensor(marginals(view, a.trans));
      },
      py::arg("emissions"), py::arg("transitions"), py::arg("mask") = std::vector<int>{});

  m.def(
      "crf_viterbi",
      [](const Matrix& emissions, const Matrix& transitions, const std::vector<int>& mask) {
        CrfArgs a = make_crf(emissions, transitions, mask);
        EmissionView view{a.emissions, a.mask};
        ViterbiResult r = viterbi(view, a.trans);
        return py::make_tuple(r.tags, r.score);
      },
      py::arg("emissions"), py::arg("transitions"), py::arg("mask") = std::vector<int>{});

  m.def(
      "soften",
      [](const Matrix& logits, double tau) { return from_tensor(soften(to_tensor(logits), tau)); },
      py::arg("logits"), py::arg("tau"));

  m.def(
      "kl_term",
      [](const Matrix& teacher, const Matrix& student, const std::vector<int>& valid) {
        std::vector<uint8_t> v;
        for (int x : valid) v.push_back(x ? 1 : 0);
        Tensor t = to_tensor(teacher);
        if (v.empty()) v.assign(static_cast<size_t>(t.rows()), 1);
        return kl_term(t, to_tensor(student), v);
      },
      py::arg("teacher_soft"), py::arg("student_soft"), py::arg("valid") = std::vector<int>{});

  m.def(
      "kd_loss",
      [](const Matrix& student, const Matrix& teacher, const std::vector<int>& gold, double alpha,
         double tau) {
        Tape tape(false);
        KDConfig cfg{alpha, tau};
        KDParts parts;
        kd_loss(tape, make_const(to_tensor(student)), to_tensor(teacher), gold, cfg, &parts);
        py::dict d;
        d["total"] = parts.total;
        d["ce"] = parts.ce;
        d["kl_mean"] = parts.kl_mean;
        d["soft"] = parts.soft;
        d["valid_tokens"] = parts.valid_tokens;
        return d;
      },
      py::arg("student_logits"), py::arg("teacher_logits"), py::arg("gold"),
      py::arg("alpha") = 0.5, py::arg("tau") = 4.0);

  m.def(
      "quantize",
      [](const std::vector<double>& values) {
        QuantizedTensor q = quantize_tensor(Tensor::from({static_cast<int>(values.size())},
                                                         std::vector<double>(values)));
        std::vector<int> vals(q.values.begin(), q.values.end());
        return py::make_tuple(vals, q.scale);
      },
      py::arg("values"), "per-tensor symmetric INT8: (int8 values, scale)");

  m.def(
      "qmatmul",
      [](const Matrix& a, const Matrix& w) {
        return from_tensor(qmatmul(quantize_activations(to_tensor(a)), quantize_tensor(to_tensor(w))));
      },
      py::arg("activations"), py::arg("weights"),
      "dynamic activation quantization + INT8 matmul, dequantized result");

  m.def(
      "extract_spans",
      [](const std::vector<int>& tags, const std::vector<std::string>& classes) {
        std::vector<std::tuple<int, int, int>> out;
        for (const auto& s : extract_spans(tags, scheme_of(classes)))
          out.emplace_back(s.start, s.end, s.class_id);
        return out;
      },
      py::arg("tags"), py::arg("classes"));

  m.def(
      "span_prf",
      [](const std::vector<int>& gold_tags, const std::vector<int>& pred_tags,
         const std::vector<std::string>& classes) {
        LabelScheme scheme = scheme_of(classes);
        EvalAccumulator acc(scheme);
        acc.add_sentence(gold_tags, pred_tags);
        auto r = acc.finalize();
        py::dict d;
        d["macro_f1"] = r.macro_f1;
        d["macro_precision"] = r.macro_precision;
        d["macro_recall"] = r.macro_recall;
        d["micro_f1"] = r.micro_f1;
        d["token_accuracy"] = r.token_accuracy;
        py::dict per;
        for (const auto& [name, prf] : r.per_class) {
          py::dict c;
          c["precision"] = prf.precision;
          c["recall"] = prf.recall;
          c["f1"] = prf.f1;
          c["support"] = prf.support;
          per[name.c_str()] = c;
        }
        d["per_class"] = per;
        return d;
      },
      py::arg("gold_tags"), py::arg("pred_tags"), py::arg("classes"));

  m.def(
      "tokenize",
      [](const std::string& text, const std::vector<std::string>& vocab_pieces) {
        Vocab vocab{std::vector<std::string>(vocab_pieces)};
        std::vector<std::tuple<std::string, int, int>> out;
        for (const auto& t : tokenize(text, vocab))
          out.emplace_back(vocab.piece(t.id), t.start, t.end);
        return out;
      },
      py::arg("text"), py::arg("vocab"), "greedy longest-match subword split with offsets");

  m.def(
      "resolve_entities",
      [](const std::string& text,
         const std::vector<std::pair<std::string, int>>& entity_strings) {
        ResolveResult r = resolve_entities(text, entity_strings);
        std::vector<std::tuple<int, int, int>> spans;
        for (const auto& s : r.spans) spans.emplace_back(s.start, s.end, s.class_id);
        return py::make_tuple(spans, r.unresolved);
      },
      py::arg("text"), py::arg("entity_strings"));
}
