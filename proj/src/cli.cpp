#include "slimtag/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "slimtag/bench.hpp"
#include "slimtag/checkpoint.hpp"
#include "slimtag/quant.hpp"
#include "slimtag/runconfig.hpp"
#include "slimtag/version.hpp"

namespace slimtag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // --set key=value
  std::string run_dir;                 // explicit output directory
  std::string out_dir = "runs";        // parent for timestamped directories
  int threads = 1;
  long long seed = -1;                 // -1 = keep config value
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "JSON config file (supports \"include\")");
  cmd->add_option("--set", a.overrides, "dotted config override, e.g. train.learning_rate=1e-4");
  cmd->add_option("--run-dir", a.run_dir, "exact output directory (default: timestamped)");
  cmd->add_option("--out", a.out_dir, "parent directory for timestamped runs");
  cmd->add_option("--threads", a.threads, "worker threads for evaluation");
  cmd->add_option("--seed", a.seed, "seed override");
}

json resolve_config(const CommonArgs& a, const std::string& command) {
  json cfg = a.config_path.empty() ? json::object() : load_config_file(a.config_path);
  apply_env_overrides(cfg);
  for (const auto& o : a.overrides) apply_override(cfg, o);
  if (a.seed >= 0) cfg["seed"] = a.seed;
  if (!cfg.contains("seed")) cfg["seed"] = 0;
  cfg["threads"] = a.threads;
  cfg["command"] = command;
  return cfg;
}

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  localtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

fs::path make_run_dir(const CommonArgs& a, const std::string& command) {
  fs::path dir;
  if (!a.run_dir.empty()) {
    dir = a.run_dir;
  } else {
    dir = fs::path(a.out_dir) / (timestamp_now() + "-" + command);
    int suffix = 1;
    while (fs::exists(dir))
      dir = fs::path(a.out_dir) / (timestamp_now() + "-" + command + "-" + std::to_string(++suffix));
  }
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void write_config_snapshot(const fs::path& dir, const json& cfg) {
  write_text(dir / "config_resolved.json", cfg.dump(2) + "\n");
}

uint64_t cfg_seed(const json& cfg) { return cfg.at("seed").get<uint64_t>(); }

// ---- prep helpers ---------------------------------------------------------

json corpus_stats(const std::vector<AnnotatedSentence>& corpus, const LabelScheme& scheme) {
  std::vector<int64_t> class_counts(static_cast<size_t>(scheme.num_classes()), 0);
  int64_t entities = 0;
  for (const auto& s : corpus) {
    for (const auto& e : s.entities) {
      ++class_counts[static_cast<size_t>(e.class_id)];
      ++entities;
    }
  }
  json cc = json::object();
  for (int c = 0; c < scheme.num_classes(); ++c)
    cc[scheme.classes()[static_cast<size_t>(c)]] = class_counts[static_cast<size_t>(c)];
  return json{{"sentences", corpus.size()},
              {"entities", entities},
              {"class_counts", cc},
              {"num_classes", scheme.num_classes()},
              {"num_tags", scheme.num_tags()}};
}

// ---- subcommands ----------------------------------------------------------

int cmd_synth(const CommonArgs& common) {
  json cfg = resolve_config(common, "synth");
  const fs::path dir = make_run_dir(common, "synth");
  SynthConfig sc = synth_config_from_json(cfg.value("synth", json::object()));
  if (!cfg.contains("synth") || !cfg["synth"].contains("seed")) sc.seed = cfg_seed(cfg);
  SynthCorpus corpus = synth_generate(sc);
  save_jsonl((dir / "corpus.jsonl").string(), corpus.sentences, corpus.scheme);
  corpus.build_vocab().save((dir / "vocab.txt").string());
  json stats = corpus_stats(corpus.sentences, corpus.scheme);
  stats["corpus_hash"] = fnv1a64_file((dir / "corpus.jsonl").string());
  write_text(dir / "stats.json", stats.dump(2) + "\n");
  write_config_snapshot(dir, cfg);
  std::cout << "synth: wrote " << corpus.sentences.size() << " sentences to " << dir << "\n";
  return 0;
}

int cmd_prep(const CommonArgs& common, const std::string& in_path, const std::string& vocab_path,
             bool export_conll_flag) {
  json cfg = resolve_config(common, "prep");
  const fs::path dir = make_run_dir(common, "prep");
  LabelScheme scheme = scheme_from_json(cfg.value("scheme", json::object()));
  Vocab vocab = Vocab::load(vocab_path);

  std::vector<std::string> unresolved;
  std::vector<AnnotatedSentence> corpus = load_jsonl(in_path, scheme, &unresolved);
  if (corpus.empty()) throw DataError("prep: empty corpus: " + in_path);

  const json split_cfg = cfg.value("split", json::object());
  const double r_train = split_cfg.value("train", 0.8);
  const double r_valid = split_cfg.value("valid", 0.1);
  const double r_test = split_cfg.value("test", 0.1);
  DatasetSplit split = split_dataset(corpus, r_train, r_valid, r_test, cfg_seed(cfg));

  const int max_seq_len = cfg.value("max_seq_len", 64);
  std::vector<std::string> warnings;
  Dataset train = prepare_dataset(split.train, vocab, scheme, max_seq_len, &warnings);
  Dataset valid = prepare_dataset(split.valid, vocab, scheme, max_seq_len, &warnings);
  Dataset test = prepare_dataset(split.test, vocab, scheme, max_seq_len, &warnings);

  save_examples_jsonl((dir / "train.jsonl").string(), train);
  save_examples_jsonl((dir / "valid.jsonl").string(), valid);
  save_examples_jsonl((dir / "test.jsonl").string(), test);
  vocab.save((dir / "vocab.txt").string());
  if (export_conll_flag) {
    export_conll((dir / "train.tsv").string(), train, vocab, scheme);
    export_conll((dir / "valid.tsv").string(), valid, vocab, scheme);
    export_conll((dir / "test.tsv").string(), test, vocab, scheme);
  }

  json stats = corpus_stats(corpus, scheme);
  stats["split_sizes"] = {{"train", train.size()}, {"valid", valid.size()}, {"test", test.size()}};
  stats["max_seq_len"] = max_seq_len;
  stats["alignment_warnings"] = warnings;
  stats["unresolved_entities"] = unresolved;
  json bundle{{"scheme", {{"classes", scheme.classes()}}},
              {"stats", stats},
              {"vocab_size", vocab.size()}};
  write_text(dir / "bundle.json", bundle.dump(2) + "\n");

  uint64_t h = fnv1a64_file((dir / "train.jsonl").string());
  h ^= fnv1a64_file((dir / "valid.jsonl").string());
  h ^= fnv1a64_file((dir / "test.jsonl").string());
  json report{{"bundle_hash", h},
              {"unresolved", unresolved.size()},
              {"warnings", warnings.size()}};
  write_text(dir / "prep_report.json", report.dump(2) + "\n");
  if (!unresolved.empty()) {
    std::string lines;
    for (const auto& u : unresolved) lines += u + "\n";
    write_text(dir / "unresolved.txt", lines);
  }
  write_config_snapshot(dir, cfg);
  std::cout << "prep: bundle at " << dir << " (" << train.size() << "/" << valid.size() << "/"
            << test.size() << " examples, " << unresolved.size() << " unresolved)\n";
  return 0;
}

int cmd_train_teacher(const CommonArgs& common, const std::string& data_dir, bool no_crf) {
  json cfg = resolve_config(common, "train-teacher");
  const fs::path dir = make_run_dir(common, "train-teacher");
  write_config_snapshot(dir, cfg);
  Bundle bundle = load_bundle(data_dir);

  EncoderConfig ec = encoder_config_from_json(cfg.value("teacher", json::object()));
  ec.vocab_size = bundle.vocab.size();
  ec.num_tags = bundle.scheme.num_tags();
  if (cfg.contains("max_seq_len")) ec.max_seq_len = cfg["max_seq_len"].get<int>();
  TrainConfig tc = train_config_from_json(cfg.value("train_teacher", json::object()));
  tc.seed = cfg_seed(cfg);

  EncoderModel model = build_model(ec, cfg_seed(cfg), !no_crf);
  TrainOutcome out = train_teacher(model, bundle.train, bundle.valid, bundle.scheme, tc);
  save_checkpoint(model, bundle.scheme, (dir / "teacher.ckpt").string());
  out.log.save_jsonl((dir / "trainlog.jsonl").string());
  json result{{"best_val_macro_f1", out.best_val_macro_f1},
              {"best_step", out.best_step},
              {"stop_reason", out.stop_reason},
              {"steps", out.steps},
              {"checkpoint", (dir / "teacher.ckpt").string()},
              {"crf", !no_crf}};
  write_text(dir / "result.json", result.dump(2) + "\n");
  std::cout << "train-teacher: best val macro-F1 " << out.best_val_macro_f1 << " ("
            << out.stop_reason << "), checkpoint at " << (dir / "teacher.ckpt") << "\n";
  return 0;
}

int cmd_cache_logits(const CommonArgs& common, const std::string& model_path,
                     const std::string& data_dir, const std::string& split,
                     const std::string& out_prefix) {
  json cfg = resolve_config(common, "cache-logits");
  Bundle bundle = load_bundle(data_dir);
  const Dataset* data = &bundle.train;
  if (split == "valid")
    data = &bundle.valid;
  else if (split == "test")
    data = &bundle.test;
  else if (split != "train")
    throw ConfigError("cache-logits: split must be train, valid or test");

  EncoderModel model = load_checkpoint(model_path);
  std::vector<Tensor> logits;
  logits.reserve(data->size());
  for (const auto& ex : *data) logits.push_back(emissions(model, ex.token_ids, ex.attention_mask));
  fs::create_directories(fs::path(out_prefix).parent_path());
  LogitCache::write(out_prefix, logits);
  const fs::path dir = fs::path(out_prefix).parent_path();
  if (!dir.empty()) write_config_snapshot(dir, cfg);
  std::cout << "cache-logits: " << logits.size() << " matrices -> " << out_prefix
            << ".{jsonl,bin}\n";
  return 0;
}

int cmd_distill(const CommonArgs& common, const std::string& data_dir,
                const std::string& teacher_path, const std::string& cache_prefix,
                const std::string& valid_cache_prefix, double alpha_flag,
                const std::string& indices_flag) {
  json cfg = resolve_config(common, "distill");
  const fs::path dir = make_run_dir(common, "distill");
  write_config_snapshot(dir, cfg);
  Bundle bundle = load_bundle(data_dir);

  EncoderModel teacher = load_checkpoint(teacher_path);
  EncoderConfig sc = teacher.config;
  sc.num_layers = 2;
  if (cfg.contains("student")) {
    const json& sj = cfg["student"];
    if (sj.contains("num_layers")) sc.num_layers = sj["num_layers"].get<int>();
    if (sj.contains("dropout")) sc.dropout = sj["dropout"].get<double>();
  }
  std::vector<int> indices;
  if (!indices_flag.empty()) {
    std::stringstream ss(indices_flag);
    std::string part;
    while (std::getline(ss, part, ',')) indices.push_back(std::stoi(part));
  } else if (cfg.contains("student") && cfg["student"].contains("layer_indices")) {
    indices = cfg["student"]["layer_indices"].get<std::vector<int>>();
  } else {
    indices = default_layer_indices(teacher.config.num_layers, sc.num_layers);
  }

  KDConfig kd = kd_config_from_json(cfg.value("kd", json::object()));
  if (alpha_flag >= 0.0) kd.alpha = alpha_flag;
  TrainConfig tc = train_config_from_json(cfg.value("train_student", json::object()));
  tc.seed = cfg_seed(cfg);

  LogitCache cache = LogitCache::read(cache_prefix);
  LogitCache vcache;
  const LogitCache* vcache_ptr = nullptr;
  if (!valid_cache_prefix.empty()) {
    vcache = LogitCache::read(valid_cache_prefix);
    vcache_ptr = &vcache;
  }

  EncoderModel student =
      init_student_from_teacher(teacher, sc, indices, false, cfg_seed(cfg));
  TrainOutcome out = train_student(student, cache, bundle.train, bundle.valid, vcache_ptr,
                                   bundle.scheme, kd, tc);
  save_checkpoint(student, bundle.scheme, (dir / "student.ckpt").string());
  out.log.save_jsonl((dir / "trainlog.jsonl").string());
  json result{{"best_val_macro_f1", out.best_val_macro_f1},
              {"best_step", out.best_step},
              {"stop_reason", out.stop_reason},
              {"steps", out.steps},
              {"alpha", kd.alpha},
              {"tau", kd.tau},
              {"layer_indices", indices},
              {"checkpoint", (dir / "student.ckpt").string()}};
  write_text(dir / "result.json", result.dump(2) + "\n");
  std::cout << "distill: best val macro-F1 " << out.best_val_macro_f1 << ", layers {";
  for (size_t i = 0; i < indices.size(); ++i) std::cout << (i ? "," : "") << indices[i];
  std::cout << "}, checkpoint at " << (dir / "student.ckpt") << "\n";
  return 0;
}

int cmd_quantize(const CommonArgs& common, const std::string& model_path) {
  json cfg = resolve_config(common, "quantize");
  const fs::path dir = make_run_dir(common, "quantize");
  write_config_snapshot(dir, cfg);
  LabelScheme scheme;
  EncoderModel model = load_checkpoint(model_path, &scheme);
  QuantReport qr = quantize_model(model);  // refuses if already INT8
  const std::string out_path = (dir / "model_int8.ckpt").string();
  save_checkpoint(model, scheme, out_path);

  const ModelStats before = model_stats(model_path);
  const ModelStats after = model_stats(out_path);
  json report{{"input", model_path},
              {"output", out_path},
              {"converted_params", qr.converted_params},
              {"retained_params", qr.retained_params},
              {"converted_tensors", qr.converted_tensors},
              {"converted_bytes_fp32", qr.fp32_bytes},
              {"converted_bytes_int8", qr.int8_bytes},
              {"converted_ratio",
               qr.fp32_bytes == 0 ? 0.0
                                  : static_cast<double>(qr.int8_bytes) /
                                        static_cast<double>(qr.fp32_bytes)},
              {"payload_bytes_before", before.payload_bytes},
              {"payload_bytes_after", after.payload_bytes},
              {"file_bytes_before", before.file_bytes},
              {"file_bytes_after", after.file_bytes}};
  write_text(dir / "quantize_report.json", report.dump(2) + "\n");
  std::cout << "quantize: " << qr.converted_params << " params -> INT8, payload "
            << before.payload_bytes << " -> " << after.payload_bytes << " bytes, report at "
            << (dir / "quantize_report.json") << "\n";
  return 0;
}

int cmd_eval(const CommonArgs& common, const std::string& model_path, const std::string& data_dir,
             const std::string& split) {
  json cfg = resolve_config(common, "eval");
  const fs::path dir = make_run_dir(common, "eval");
  write_config_snapshot(dir, cfg);
  Bundle bundle = load_bundle(data_dir);
  const Dataset* data = &bundle.test;
  if (split == "train")
    data = &bundle.train;
  else if (split == "valid")
    data = &bundle.valid;
  else if (split != "test")
    throw ConfigError("eval: split must be train, valid or test");

  EncoderModel model = load_checkpoint(model_path);
  const auto report = evaluate_dataset(model, *data, bundle.scheme, common.threads);
  write_text(dir / "report.json", report_to_json(report) + "\n");
  write_text(dir / "confusion.csv", confusion_to_csv(report));
  std::cout << render_report_table(report);
  std::cout << "eval: report at " << (dir / "report.json") << "\n";
  return 0;
}

int cmd_bench(const CommonArgs& common, const std::vector<std::string>& model_paths,
              const std::string& baseline, int seq_len, int reps, int warmup) {
  json cfg = resolve_config(common, "bench");
  const fs::path dir = make_run_dir(common, "bench");
  write_config_snapshot(dir, cfg);
  if (model_paths.empty()) throw ConfigError("bench: at least one --model required");

  BenchReport report;
  report.baseline = baseline.empty() ? model_paths.front() : baseline;
  report.threads = 1;
  report.seq_len = seq_len;
  report.reps = reps;
  report.warmup = warmup;
  report.precision = precision() == Precision::F32 ? "f32" : "f64";

  for (const auto& path : model_paths) {
    BenchEntry e;
    e.name = path;
    e.stats = model_stats(path);
    EncoderModel model = load_checkpoint(path);
    e.latency = measure_latency(model, seq_len, reps, warmup, cfg_seed(cfg));
    report.entries.push_back(std::move(e));
  }
  double base_median = -1.0;
  for (const auto& e : report.entries)
    if (e.name == report.baseline) base_median = e.latency.median_ms;
  if (base_median < 0.0) throw ConfigError("bench: baseline not among the measured models");
  for (auto& e : report.entries) e.speedup = base_median / e.latency.median_ms;

  write_text(dir / "bench.json", bench_to_json(report) + "\n");
  const std::string table = render_bench_table(report);
  write_text(dir / "table.txt", table);
  std::cout << table;
  return 0;
}

int cmd_ablate(const CommonArgs& common) {
  json cfg = resolve_config(common, "ablate");
  const fs::path dir = make_run_dir(common, "ablate");
  write_config_snapshot(dir, cfg);

  AblationConfig ac;
  ac.synth = synth_config_from_json(cfg.value("synth", json::object()));
  ac.teacher = encoder_config_from_json(cfg.value("teacher", json::object()));
  ac.teacher_train = train_config_from_json(cfg.value("train_teacher", json::object()));
  ac.student_train = train_config_from_json(cfg.value("train_student", json::object()));
  ac.kd = kd_config_from_json(cfg.value("kd", json::object()));
  if (cfg.contains("student") && cfg["student"].contains("num_layers"))
    ac.student_layers = cfg["student"]["num_layers"].get<int>();
  if (cfg.contains("student") && cfg["student"].contains("layer_indices"))
    ac.layer_indices = cfg["student"]["layer_indices"].get<std::vector<int>>();
  if (cfg.contains("seeds")) ac.seeds = cfg["seeds"].get<std::vector<uint64_t>>();
  ac.threads = common.threads;
  if (cfg.contains("latency")) {
    const json& lj = cfg["latency"];
    ac.with_latency = lj.value("enabled", true);
    ac.latency_reps = lj.value("reps", 30);
    ac.latency_warmup = lj.value("warmup", 5);
    ac.latency_seq_len = lj.value("seq_len", 32);
  }

  AblationResult result = run_ablation(ac, &std::cout);

  write_text(dir / "summary.json", result.summary.dump(2) + "\n");
  write_text(dir / "table1.txt", ablation_table1(result));
  write_text(dir / "table3.txt", ablation_table3(result));
  write_text(dir / "fig2_sweep.csv", sweep_to_csv(result.sweep));
  if (ac.with_latency) {
    write_text(dir / "table2.txt", render_bench_table(result.latency));
    write_text(dir / "latency.json", bench_to_json(result.latency) + "\n");
  }
  std::cout << ablation_table1(result);
  std::cout << "ablate: reports at " << dir << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"sequence-tagger compression toolkit: CRF teacher, distilled student, INT8"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonArgs common;

  auto* synth = app.add_subcommand("synth", "generate a synthetic annotated corpus");
  add_common(synth, common);

  auto* prep = app.add_subcommand("prep", "ingest, resolve, tokenize, align and split");
  std::string in_path, vocab_path;
  bool conll = false;
  prep->add_option("--in", in_path, "input corpus JSONL")->required();
  prep->add_option("--vocab", vocab_path, "subword vocabulary file")->required();
  prep->add_flag("--export-conll", conll, "also write token<TAB>tag TSV files");
  add_common(prep, common);

  auto* tt = app.add_subcommand("train-teacher", "train the encoder (+CRF) teacher");
  std::string data_dir;
  bool no_crf = false;
  tt->add_option("--data", data_dir, "prepared bundle directory")->required();
  tt->add_flag("--no-crf", no_crf, "train a linear-head teacher instead of CRF");
  add_common(tt, common);

  auto* cache = app.add_subcommand("cache-logits", "freeze a teacher and dump emission logits");
  std::string model_path, split = "train", out_prefix;
  cache->add_option("--model", model_path, "teacher checkpoint")->required();
  cache->add_option("--data", data_dir, "prepared bundle directory")->required();
  cache->add_option("--split", split, "train|valid|test (default train)");
  cache->add_option("--out-prefix", out_prefix, "output path prefix")->required();
  add_common(cache, common);

  auto* distill = app.add_subcommand("distill", "layer-transfer a student and train it with KD");
  std::string teacher_path, cache_prefix, valid_cache_prefix, indices_flag;
  double alpha_flag = -1.0;
  distill->add_option("--data", data_dir, "prepared bundle directory")->required();
  distill->add_option("--teacher", teacher_path, "teacher checkpoint for layer transfer")
      ->required();
  distill->add_option("--teacher-cache", cache_prefix, "logit cache prefix (train split)")
      ->required();
  distill->add_option("--valid-cache", valid_cache_prefix, "logit cache prefix (valid split)");
  distill->add_option("--alpha", alpha_flag, "loss mix; 1.0 disables the soft term (no-KD)");
  distill->add_option("--layer-indices", indices_flag, "comma list, e.g. 1,5,9,12");
  add_common(distill, common);

  auto* quant = app.add_subcommand("quantize", "convert fully-connected weights to INT8");
  quant->add_option("--model", model_path, "input checkpoint")->required();
  add_common(quant, common);

  auto* eval = app.add_subcommand("eval", "strict span metrics and confusion matrix");
  eval->add_option("--model", model_path, "checkpoint to evaluate")->required();
  eval->add_option("--data", data_dir, "prepared bundle directory")->required();
  eval->add_option("--split", split, "train|valid|test (default test)");
  add_common(eval, common);

  auto* bench = app.add_subcommand("bench", "latency, parameter and size benchmarking");
  std::vector<std::string> bench_models;
  std::string baseline;
  int seq_len = 128, reps = 50, warmup = 10;
  bench->add_option("--model", bench_models, "checkpoints to measure")->required();
  bench->add_option("--baseline", baseline, "baseline checkpoint path (default: first)");
  bench->add_option("--seq-len", seq_len, "input length");
  bench->add_option("--reps", reps, "timed repetitions (>= 30)");
  bench->add_option("--warmup", warmup, "discarded warmup runs (>= 5)");
  add_common(bench, common);

  auto* ablate = app.add_subcommand("ablate", "full multi-seed ablation suite");
  add_common(ablate, common);

  try {
    std::vector<const char*> argv;
    argv.push_back("slimtag");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(common);
    if (prep->parsed()) return cmd_prep(common, in_path, vocab_path, conll);
    if (tt->parsed()) return cmd_train_teacher(common, data_dir, no_crf);
    if (cache->parsed()) return cmd_cache_logits(common, model_path, data_dir, split, out_prefix);
    if (distill->parsed())
      return cmd_distill(common, data_dir, teacher_path, cache_prefix, valid_cache_prefix,
                         alpha_flag, indices_flag);
    if (quant->parsed()) return cmd_quantize(common, model_path);
    if (eval->parsed()) return cmd_eval(common, model_path, data_dir, split);
    if (bench->parsed()) return cmd_bench(common, bench_models, baseline, seq_len, reps, warmup);
    if (ablate->parsed()) return cmd_ablate(common);
    std::cerr << "no subcommand given\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace slimtag
