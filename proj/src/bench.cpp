#include "slimtag/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "slimtag/quant.hpp"

namespace slimtag {

using nlohmann::json;

LatencyStats measure_latency(EncoderModel& model, int seq_len, int reps, int warmup,
                             uint64_t seed) {
  if (reps < 30) throw ConfigError("measure_latency: reps must be >= 30");
  if (warmup < 5) throw ConfigError("measure_latency: warmup must be >= 5");
  if (seq_len < 1 || seq_len > model.config.max_seq_len)
    throw ConfigError("measure_latency: seq_len out of range");

  Rng rng(seed);
  std::vector<int> ids(static_cast<size_t>(seq_len));
  for (auto& id : ids) id = rng.uniform_int(0, model.config.vocab_size - 1);
  std::vector<uint8_t> mask(static_cast<size_t>(seq_len), 1);

  auto run_once = [&]() {
    Tensor logits = emissions(model, ids, mask);
    if (model.has_crf()) {
      EmissionView em{logits, mask};
      viterbi(em, *model.crf);
    }
  };

  std::vector<double> times_ms;
  times_ms.reserve(static_cast<size_t>(reps));
  for (int i = 0; i < warmup + reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    run_once();
    const auto t1 = std::chrono::steady_clock::now();
    if (i >= warmup)
      times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(times_ms.begin(), times_ms.end());

  LatencyStats s;
  s.reps = reps;
  s.warmup = warmup;
  s.seq_len = seq_len;
  s.threads = 1;
  const size_t n = times_ms.size();
  s.median_ms = n % 2 ? times_ms[n / 2] : 0.5 * (times_ms[n / 2 - 1] + times_ms[n / 2]);
  s.p95_ms = times_ms[std::min(n - 1, static_cast<size_t>(std::ceil(0.95 * n)) - 1)];
  double mean = 0.0;
  for (double t : times_ms) mean += t;
  mean /= static_cast<double>(n);
  s.mean_ms = mean;
  double var = 0.0;
  for (double t : times_ms) var += (t - mean) * (t - mean);
  s.std_ms = std::sqrt(var / static_cast<double>(n));
  return s;
}

ModelStats model_stats(const std::string& checkpoint_path) {
  const CheckpointInfo info = read_checkpoint_info(checkpoint_path);
  ModelStats s;
  s.file_bytes = static_cast<int64_t>(std::filesystem::file_size(checkpoint_path));
  for (const auto& [name, e] : info.tensors) {
    (void)name;
    const int64_t numel = shape_numel(e.shape);
    s.params += numel;
    s.payload_bytes += e.bytes;
    if (e.dtype == "i8") {
      s.converted_params += numel;
      s.converted_bytes += e.bytes + 8;  // payload + the per-tensor scale
      s.converted_fp32_bytes += numel * 4;
    }
  }
  return s;
}

std::string bench_to_json(const BenchReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back(
        {{"name", e.name},
         {"params", e.stats.params},
         {"payload_bytes", e.stats.payload_bytes},
         {"file_bytes", e.stats.file_bytes},
         {"converted_params", e.stats.converted_params},
         {"converted_bytes", e.stats.converted_bytes},
         {"converted_fp32_bytes", e.stats.converted_fp32_bytes},
         {"median_ms", e.latency.median_ms},
         {"p95_ms", e.latency.p95_ms},
         {"std_ms", e.latency.std_ms},
         {"mean_ms", e.latency.mean_ms},
         {"speedup", e.speedup}});
  }
  json j{{"entries", entries},   {"baseline", report.baseline}, {"threads", report.threads},
         {"seq_len", report.seq_len}, {"reps", report.reps},    {"warmup", report.warmup},
         {"precision", report.precision}};
  return j.dump(2);
}

std::string render_bench_table(const BenchReport& report) {
  std::ostringstream os;
  char line[200];
  std::snprintf(line, sizeof(line), "%-24s %12s %12s %12s %10s %9s\n", "model", "params",
                "bytes", "median_ms", "p95_ms", "speedup");
  os << line;
  for (const auto& e : report.entries) {
    std::snprintf(line, sizeof(line), "%-24s %12lld %12lld %12.3f %10.3f %8.2fx\n",
                  e.name.c_str(), static_cast<long long>(e.stats.params),
                  static_cast<long long>(e.stats.payload_bytes), e.latency.median_ms,
                  e.latency.p95_ms, e.speedup);
    os << line;
  }
  std::snprintf(line, sizeof(line), "baseline: %s, threads=%d, seq_len=%d, reps=%d\n",
                report.baseline.c_str(), report.threads, report.seq_len, report.reps);
  os << line;
  return os.str();
}

std::vector<SweepRow> truncation_sweep(EncoderModel& teacher, const Dataset& data,
                                       const LabelScheme& scheme, int threads) {
  std::vector<SweepRow> rows;
  for (int k = 1; k <= teacher.config.num_layers; ++k) {
    EncoderModel view = truncate(teacher, k);
    const auto report = evaluate_dataset(view, data, scheme, threads);
    rows.push_back({k, report.macro_f1, report.token_accuracy, "truncated"});
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "active_layers,macro_f1,token_accuracy,variant\n";
  for (const auto& r : rows) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%s\n", r.active_layers, r.macro_f1,
                  r.token_accuracy, r.variant.c_str());
    os << buf;
  }
  return os.str();
}

double AblationModelRow::mean_f1() const {
  double s = 0.0;
  for (double v : macro_f1) s += v;
  return macro_f1.empty() ? 0.0 : s / static_cast<double>(macro_f1.size());
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void add_eval(AblationModelRow& row, const EvalAccumulator::Report& report,
              const LabelScheme& scheme) {
  row.macro_f1.push_back(report.macro_f1);
  row.accuracy.push_back(report.token_accuracy);
  row.precision.push_back(report.macro_precision);
  row.recall.push_back(report.macro_recall);
  for (const auto& cls : scheme.classes()) {
    const auto it = report.per_class.find(cls);
    row.class_f1[cls].push_back(it == report.per_class.end() ? 0.0 : it->second.f1);
  }
}

LogitCache cache_emissions(EncoderModel& model, const Dataset& data) {
  std::vector<Tensor> logits;
  logits.reserve(data.size());
  for (const auto& ex : data) logits.push_back(emissions(model, ex.token_ids, ex.attention_mask));
  return LogitCache::from(std::move(logits));
}

}  // namespace

AblationResult run_ablation(const AblationConfig& config, std::ostream* progress) {
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed_s = [&t_start]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };
  auto log = [&](const std::string& msg) {
    if (progress) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "[%7.1fs] ", elapsed_s());
      (*progress) << buf << msg << std::endl;
    }
  };

  AblationResult res;
  const std::vector<std::string> names = {"teacher_crf", "student_no_kd", "student_standard_kd",
                                          "student_crf_kd", "student_crf_kd_int8"};
  for (const auto& n : names) {
    AblationModelRow r;
    r.name = n;
    res.rows.push_back(r);
  }
  auto& row_teacher = res.rows[0];
  auto& row_no_kd = res.rows[1];
  auto& row_std_kd = res.rows[2];
  auto& row_crf_kd = res.rows[3];
  auto& row_quant = res.rows[4];

  std::map<int, std::pair<double, double>> trunc_sums;  // k -> (f1 sum, acc sum)

  for (size_t si = 0; si < config.seeds.size(); ++si) {
    const uint64_t seed = config.seeds[si];
    SynthConfig synth = config.synth;
    synth.seed = seed;
    SynthCorpus corpus = synth_generate(synth);
    const LabelScheme& scheme = corpus.scheme;
    Vocab vocab = corpus.build_vocab();
    DatasetSplit split = split_dataset(corpus.sentences, config.split_train, config.split_valid,
                                       config.split_test, seed);
    EncoderConfig tc = config.teacher;
    tc.vocab_size = vocab.size();
    tc.num_tags = scheme.num_tags();
    const Dataset train = prepare_dataset(split.train, vocab, scheme, tc.max_seq_len);
    const Dataset valid = prepare_dataset(split.valid, vocab, scheme, tc.max_seq_len);
    const Dataset test = prepare_dataset(split.test, vocab, scheme, tc.max_seq_len);
    log("seed " + std::to_string(seed) + ": corpus " + std::to_string(train.size()) + "/" +
        std::to_string(valid.size()) + "/" + std::to_string(test.size()));

    TrainConfig ttc = config.teacher_train;
    ttc.seed = seed;
    TrainConfig stc = config.student_train;
    stc.seed = seed;

    EncoderModel teacher = build_model(tc, seed, true);
    auto t_out = train_teacher(teacher, train, valid, scheme, ttc);
    auto teacher_report = evaluate_dataset(teacher, test, scheme, config.threads);
    add_eval(row_teacher, teacher_report, scheme);
    log("  teacher_crf: test_f1=" + std::to_string(teacher_report.macro_f1) + " (" +
        t_out.stop_reason + ", " + std::to_string(t_out.steps) + " steps)");

    EncoderModel lin_teacher = build_model(tc, seed ^ 0x5bd1e995, false);
    auto l_out = train_teacher(lin_teacher, train, valid, scheme, ttc);
    log("  teacher_linear: val_f1=" + std::to_string(l_out.best_val_macro_f1));

    LogitCache crf_cache = cache_emissions(teacher, train);
    LogitCache crf_vcache = cache_emissions(teacher, valid);
    LogitCache lin_cache = cache_emissions(lin_teacher, train);
    LogitCache lin_vcache = cache_emissions(lin_teacher, valid);

    EncoderConfig sc = tc;
    sc.num_layers = config.student_layers;
    const std::vector<int> indices =
        config.layer_indices.empty() ? default_layer_indices(tc.num_layers, sc.num_layers)
                                     : config.layer_indices;

    EncoderModel no_kd = init_student_from_teacher(teacher, sc, indices, false, seed);
    KDConfig no_kd_cfg = config.kd;
    no_kd_cfg.alpha = 1.0;
    train_student(no_kd, crf_cache, train, valid, &crf_vcache, scheme, no_kd_cfg, stc);
    add_eval(row_no_kd, evaluate_dataset(no_kd, test, scheme, config.threads), scheme);
    log("  student_no_kd: test_f1=" + std::to_string(row_no_kd.macro_f1.back()));

    EncoderModel std_kd = init_student_from_teacher(lin_teacher, sc, indices, false, seed);
    train_student(std_kd, lin_cache, train, valid, &lin_vcache, scheme, config.kd, stc);
    add_eval(row_std_kd, evaluate_dataset(std_kd, test, scheme, config.threads), scheme);
    log("  student_standard_kd: test_f1=" + std::to_string(row_std_kd.macro_f1.back()));

    EncoderModel crf_kd = init_student_from_teacher(teacher, sc, indices, false, seed);
    train_student(crf_kd, crf_cache, train, valid, &crf_vcache, scheme, config.kd, stc);
    add_eval(row_crf_kd, evaluate_dataset(crf_kd, test, scheme, config.threads), scheme);
    log("  student_crf_kd: test_f1=" + std::to_string(row_crf_kd.macro_f1.back()));

    if (si == 0 && config.with_latency) {
      res.latency.baseline = "teacher_linear";
      res.latency.threads = 1;
      res.latency.seq_len = config.latency_seq_len;
      res.latency.reps = config.latency_reps;
      res.latency.warmup = config.latency_warmup;
      res.latency.precision = precision() == Precision::F32 ? "f32" : "f64";
      auto add_latency = [&](const std::string& name, EncoderModel& m) {
        BenchEntry e;
        e.name = name;
        e.stats.params = m.param_count();
        e.latency = measure_latency(m, config.latency_seq_len, config.latency_reps,
                                    config.latency_warmup, seed);
        res.latency.entries.push_back(e);
      };
      add_latency("teacher_linear", lin_teacher);
      add_latency("teacher_crf", teacher);
      add_latency("student_crf_kd", crf_kd);
      // quantized entry appended below once the student is converted
    }

    quantize_model(crf_kd);
    add_eval(row_quant, evaluate_dataset(crf_kd, test, scheme, config.threads), scheme);
    log("  student_crf_kd_int8: test_f1=" + std::to_string(row_quant.macro_f1.back()));

    if (si == 0 && config.with_latency) {
      BenchEntry e;
      e.name = "student_crf_kd_int8";
      e.stats.params = crf_kd.param_count();
      e.latency = measure_latency(crf_kd, config.latency_seq_len, config.latency_reps,
                                  config.latency_warmup, seed);
      res.latency.entries.push_back(e);
      const double base = res.latency.entries[0].latency.median_ms;
      for (auto& entry : res.latency.entries) entry.speedup = base / entry.latency.median_ms;
    }

    for (const auto& r : truncation_sweep(teacher, test, scheme, config.threads)) {
      trunc_sums[r.active_layers].first += r.macro_f1;
      trunc_sums[r.active_layers].second += r.token_accuracy;
    }
  }

  const double n_seeds = static_cast<double>(config.seeds.size());
  for (const auto& [k, sums] : trunc_sums)
    res.sweep.push_back({k, sums.first / n_seeds, sums.second / n_seeds, "truncated"});
  res.sweep.push_back({config.student_layers, mean_of(row_crf_kd.macro_f1),
                       mean_of(row_crf_kd.accuracy), "distilled"});

  json models = json::object();
  for (const auto& r : res.rows) {
    json per_class = json::object();
    for (const auto& [cls, v] : r.class_f1)
      per_class[cls] = {{"per_seed", v}, {"mean", mean_of(v)}};
    models[r.name] = {{"macro_f1", {{"per_seed", r.macro_f1}, {"mean", mean_of(r.macro_f1)}}},
                      {"accuracy", {{"per_seed", r.accuracy}, {"mean", mean_of(r.accuracy)}}},
                      {"precision", {{"per_seed", r.precision}, {"mean", mean_of(r.precision)}}},
                      {"recall", {{"per_seed", r.recall}, {"mean", mean_of(r.recall)}}},
                      {"class_f1", per_class}};
  }
  const double f_teacher = mean_of(row_teacher.macro_f1);
  const double f_no_kd = mean_of(row_no_kd.macro_f1);
  const double f_std_kd = mean_of(row_std_kd.macro_f1);
  const double f_crf_kd = mean_of(row_crf_kd.macro_f1);
  const double f_quant = mean_of(row_quant.macro_f1);
  double trunc_at_student = 0.0;
  for (const auto& r : res.sweep)
    if (r.variant == "truncated" && r.active_layers == config.student_layers)
      trunc_at_student = r.macro_f1;
  res.summary = json{
      {"models", models},
      {"seeds", config.seeds},
      {"checks",
       {{"teacher_mean_f1", f_teacher},
        {"ordering_teacher_ge_crf_kd", f_teacher >= f_crf_kd},
        {"ordering_crf_kd_ge_std_kd", f_crf_kd >= f_std_kd},
        {"ordering_std_kd_ge_no_kd", f_std_kd >= f_no_kd},
        {"crf_kd_minus_no_kd", f_crf_kd - f_no_kd},
        {"quantized_drop", f_crf_kd - f_quant},
        {"truncated_at_student_depth", trunc_at_student},
        {"distilled_minus_truncated", f_crf_kd - trunc_at_student}}},
      {"runtime_seconds", elapsed_s()}};
  log("ablation finished");
  return res;
}

std::string ablation_table1(const AblationResult& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-24s %8s %8s %8s %8s\n", "model", "acc", "prec", "rec",
                "f1");
  os << line;
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof(line), "%-24s %8.4f %8.4f %8.4f %8.4f\n", row.name.c_str(),
                  mean_of(row.accuracy), mean_of(row.precision), mean_of(row.recall),
                  mean_of(row.macro_f1));
    os << line;
  }
  os << "(means over " << (r.rows.empty() ? 0 : r.rows[0].macro_f1.size()) << " seeds)\n";
  return os.str();
}

std::string ablation_table3(const AblationResult& r) {
  std::ostringstream os;
  char line[200];
  os << "class";
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof(line), " %22s", row.name.c_str());
    os << line;
  }
  os << "\n";
  if (!r.rows.empty()) {
    for (const auto& [cls, _] : r.rows[0].class_f1) {
      (void)_;
      os << cls;
      for (const auto& row : r.rows) {
        std::snprintf(line, sizeof(line), " %22.4f", mean_of(row.class_f1.at(cls)));
        os << line;
      }
      os << "\n";
    }
  }
  std::snprintf(line, sizeof(line), "%-5s", "macro");
  os << line;
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof(line), " %22.4f", mean_of(row.macro_f1));
    os << line;
  }
  os << "\n";
  return os.str();
}

}  // namespace slimtag
