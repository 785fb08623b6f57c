// crisiskit command-line interface: dataset building, validation sampling,
// tokenizer training, teacher training, fine-tuning, distillation, inference
// benchmarking, and case-study analytics. Every stage resolves its config
// from (command line > CRISIS_* env > --config file > defaults), runs
// deterministically from the global seed, and writes a run manifest.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "crisiskit/analytics.hpp"
#include "crisiskit/bench.hpp"
#include "crisiskit/dataset_builder.hpp"
#include "crisiskit/distill.hpp"
#include "crisiskit/finetune.hpp"
#include "crisiskit/manifest.hpp"
#include "crisiskit/model_io.hpp"
#include "crisiskit/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using Real = float;

namespace {

struct Global {
  std::uint64_t seed = 42;
  std::string out = "out";
  std::string config_path;
  json config = json::object();
};

// config-file lookup: {"stage": {"key": value}} with a flat fallback
template <class T>
T cfg_get(const json& config, const std::string& stage, const std::string& key, T fallback) {
  if (config.contains(stage) && config[stage].contains(key))
    return config[stage][key].get<T>();
  if (config.contains(key)) return config[key].get<T>();
  return fallback;
}

std::string out_path(const Global& g, const std::string& name) {
  fs::create_directories(g.out);
  return (fs::path(g.out) / name).string();
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw std::runtime_error("missing input: " + path);
}

std::vector<crisiskit::LabelledId> labelled_ids_from_records(
    const std::vector<crisiskit::RawRecord>& records) {
  std::vector<crisiskit::LabelledId> out;
  for (const auto& r : records) {
    if (!r.label) throw std::runtime_error("record " + r.id + " is missing a label");
    out.push_back({r.id, *r.label});
  }
  return out;
}

std::vector<crisiskit::LabelledId> labelled_ids_from_csv(const std::string& path) {
  auto table = crisiskit::read_csv(path);
  if (table.header.size() < 2)
    throw std::runtime_error(path + ": expected header id,label");
  std::vector<crisiskit::LabelledId> out;
  for (const auto& row : table.rows) {
    auto label = crisiskit::parse_label(row[1]);
    if (!label) throw std::runtime_error(path + ": unknown label " + row[1]);
    out.push_back({row[0], *label});
  }
  return out;
}

crisiskit::EncoderConfig student_config_from(const std::string& spec, int vocab_size,
                                             int max_positions) {
  if (spec == "teacher" || spec == "s_m" || spec == "s_s" || spec == "s_t")
    return crisiskit::desk_shape(spec, vocab_size, max_positions);
  require_file(spec);
  std::ifstream in(spec);
  crisiskit::EncoderConfig cfg = json::parse(in).get<crisiskit::EncoderConfig>();
  cfg.vocab_size = vocab_size;
  cfg.max_positions = max_positions;
  return cfg;
}

// ----------------------------------------------------------------------
// subcommand payloads

struct BuildDatasetArgs {
  std::string annotations;
  std::string records;
};

int cmd_build_dataset(const Global& g, const BuildDatasetArgs& args) {
  require_file(args.annotations);
  auto matrix = crisiskit::AnnotationMatrix::from_csv(args.annotations);
  auto result = crisiskit::agreement_filter(matrix);

  std::vector<crisiskit::RawRecord> agreed;
  if (!args.records.empty()) {
    require_file(args.records);
    auto corpus = crisiskit::read_jsonl(args.records);
    std::map<std::string, const crisiskit::RawRecord*> by_id;
    for (const auto& r : corpus) by_id[r.id] = &r;
    for (const auto& [id, label] : result.agreed) {
      auto it = by_id.find(id);
      if (it == by_id.end())
        throw std::runtime_error("annotation id not in corpus: " + id);
      crisiskit::RawRecord r = *it->second;
      r.label = label;
      agreed.push_back(std::move(r));
    }
  } else {
    for (const auto& [id, label] : result.agreed) {
      crisiskit::RawRecord r;
      r.id = id;
      r.label = label;
      agreed.push_back(std::move(r));
    }
  }

  const auto dataset_path = out_path(g, "t_agree.jsonl");
  crisiskit::write_jsonl(dataset_path, agreed);

  json counts = json::object();
  for (const auto& [label, count] : result.class_counts)
    counts[crisiskit::to_string(label)] = count;
  json summary = {{"total_rows", matrix.rows()},
                  {"agreed", result.agreed.size()},
                  {"dropped", result.dropped},
                  {"class_counts", counts}};
  const auto counts_path = out_path(g, "class_counts.json");
  write_json(counts_path, summary);
  std::cout << summary.dump(2) << "\n";

  crisiskit::RunManifest manifest;
  manifest.subcommand = "build-dataset";
  manifest.seed = g.seed;
  manifest.out_base = g.out;
  manifest.config = {{"annotations", args.annotations}, {"records", args.records}};
  manifest.add_input(args.annotations);
  if (!args.records.empty()) manifest.add_input(args.records);
  manifest.add_output(dataset_path);
  manifest.add_output(counts_path);
  manifest.write(out_path(g, "manifest.json"));
  return 0;
}

struct ValidateArgs {
  std::string dataset;
  std::vector<std::string> humans;
  double margin = 0.03;
  double confidence = 0.95;
};

int cmd_validate(const Global& g, const ValidateArgs& args) {
  require_file(args.dataset);
  auto records = crisiskit::read_jsonl(args.dataset);
  auto labelled = labelled_ids_from_records(records);

  auto plan = crisiskit::make_sample_plan(labelled, args.margin, args.confidence);
  auto sample = crisiskit::stratified_validation_sample(labelled, plan, g.seed);

  std::map<std::string, const crisiskit::RawRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  std::vector<crisiskit::RawRecord> sample_records;
  for (const auto& s : sample) sample_records.push_back(*by_id.at(s.id));
  const auto sample_path = out_path(g, "validation_sample.jsonl");
  crisiskit::write_jsonl(sample_path, sample_records);

  json forced = json::array();
  for (auto l : plan.forced_classes) forced.push_back(crisiskit::to_string(l));
  json plan_json = {{"population", plan.population},
                    {"margin_of_error", plan.margin},
                    {"confidence", plan.confidence},
                    {"sample_size", plan.n},
                    {"forced_classes", forced},
                    {"final_sample", sample.size()}};
  const auto plan_path = out_path(g, "sample_plan.json");
  write_json(plan_path, plan_json);
  std::cout << plan_json.dump(2) << "\n";

  crisiskit::RunManifest manifest;
  manifest.subcommand = "validate";
  manifest.seed = g.seed;
  manifest.out_base = g.out;
  manifest.config = {{"dataset", args.dataset},
                     {"margin", args.margin},
                     {"confidence", args.confidence},
                     {"humans", args.humans}};
  manifest.add_input(args.dataset);
  manifest.add_output(sample_path);
  manifest.add_output(plan_path);

  if (!args.humans.empty()) {
    std::vector<std::pair<std::string, std::vector<crisiskit::LabelledId>>> humans;
    for (const auto& path : args.humans) {
      require_file(path);
      manifest.add_input(path);
      humans.push_back({fs::path(path).stem().string(), labelled_ids_from_csv(path)});
    }
    auto reports = crisiskit::validation_report(sample, humans);
    json out = json::array();
    for (const auto& v : reports) {
      json r = to_json(v.report);
      r["annotator"] = v.annotator;
      r["band"] = v.band;
      out.push_back(r);
      std::cout << v.annotator << ": kappa " << v.report.kappa << " (" << v.band << ")\n";
    }
    const auto report_path = out_path(g, "validation_report.json");
    write_json(report_path, out);
    manifest.add_output(report_path);
  }
  manifest.write(out_path(g, "manifest.json"));
  return 0;
}

struct TokenizerArgs {
  std::string corpus;
  int vocab_size = 8192;
};

int cmd_tokenizer(const Global& g, const TokenizerArgs& args) {
  require_file(args.corpus);
  auto records = crisiskit::read_jsonl(args.corpus, /*require_text=*/true);
  std::vector<crisiskit::CleanText> corpus;
  corpus.reserve(records.size());
  for (const auto& r : records) corpus.push_back(crisiskit::normalize_text(r.text));
  auto tok = crisiskit::BpeTokenizer::train(corpus, args.vocab_size);

  const auto vocab_path = out_path(g, "vocab.tsv");
  const auto merges_path = out_path(g, "merges.txt");
  tok.save(vocab_path, merges_path);
  std::cout << "trained tokenizer: " << tok.vocab_size() << " tokens\n";

  crisiskit::RunManifest manifest;
  manifest.subcommand = "tokenizer";
  manifest.seed = g.seed;
  manifest.out_base = g.out;
  manifest.config = {{"corpus", args.corpus}, {"vocab_size", args.vocab_size}};
  manifest.add_input(args.corpus);
  manifest.add_output(vocab_path);
  manifest.add_output(merges_path);
  manifest.write(out_path(g, "manifest.json"));
  return 0;
}

struct TrainTeacherArgs {
  std::string dataset;
  std::string tokenizer_dir;
  std::string shape = "teacher";
  int max_length = 64;
  crisiskit::FinetuneConfig finetune;
};

int cmd_train_teacher(const Global& g, const TrainTeacherArgs& args) {
  require_file(args.dataset);
  require_file(crisiskit::modeldir::vocab_path(args.tokenizer_dir));
  auto tok = crisiskit::load_tokenizer_dir(args.tokenizer_dir);
  auto records = crisiskit::read_jsonl(args.dataset, /*require_text=*/true);
  auto ds = crisiskit::encode_dataset(tok, records, args.max_length, true);
  auto splits = crisiskit::split_stratified(ds.labels, {.seed = g.seed});

  auto cfg = student_config_from(args.shape, tok.vocab_size(), args.max_length);
  crisiskit::Rng init = crisiskit::named_stream(g.seed, "teacher-init");
  auto clf = crisiskit::Classifier<Real>::init(cfg, init);
  auto result = crisiskit::finetune_run(clf, ds, splits, args.finetune, g.seed);
  const double test_f1 =
      crisiskit::evaluate_macro_f1(clf, ds, splits.test, args.finetune.batch_size);

  const auto model_dir = out_path(g, "teacher");
  crisiskit::save_classifier_dir(model_dir, clf, tok);

  json report = {{"best_val_macro_f1", result.best_val_f1},
                 {"best_epoch", result.best_epoch},
                 {"epochs_run", result.epochs_run},
                 {"test_macro_f1", test_f1},
                 {"model_dir", model_dir}};
  const auto report_path = out_path(g, "teacher_report.json");
  write_json(report_path, report);
  std::cout << report.dump(2) << "\n";

  crisiskit::RunManifest manifest;
  manifest.subcommand = "train-teacher";
  manifest.seed = g.seed;
  manifest.out_base = g.out;
  manifest.config = {{"dataset", args.dataset},
                     {"shape", args.shape},
                     {"max_length", args.max_length},
                     {"learning_rate", args.finetune.learning_rate},
                     {"batch_size", args.finetune.batch_size},
                     {"max_epochs", args.finetune.max_epochs},
                     {"patience", args.finetune.patience}};
  manifest.add_input(args.dataset);
  manifest.add_output(crisiskit::modeldir::bin_path(model_dir));
  manifest.add_output(report_path);
  manifest.write(out_path(g, "manifest.json"));
  return 0;
}

struct FinetuneArgs {
  std::string model_dir;
  std::string dataset;
  std::string task_name = "task";
  int max_length = 64;
  std::string save_model;
  crisiskit::FinetuneConfig finetune;
};

int cmd_finetune(const Global& g, const FinetuneArgs& args) {
  require_file(args.dataset);
  require_file(crisiskit::modeldir::config_path(args.model_dir));
  auto tok = crisiskit::load_tokenizer_dir(args.model_dir);
  auto records = crisiskit::read_jsonl(args.dataset, /*require_text=*/true);
  auto ds = crisiskit::encode_dataset(tok, records, args.max_length, true);
  auto splits = crisiskit::split_stratified(ds.labels, {.seed = g.seed});

  auto base_cfg = crisiskit::read_model_config(args.model_dir);
  crisiskit::EncoderConfig enc_cfg = base_cfg.get<crisiskit::EncoderConfig>();

  // fresh head per repeat; encoder weights reloaded from the model dir
  auto make_classifier = [&](std::uint64_t run_seed) {
    auto encoder = crisiskit::load_encoder_dir<Real>(args.model_dir);
    crisiskit::Rng head_rng(run_seed);
    crisiskit::Classifier<Real> clf;
    clf.encoder = std::move(encoder);
    clf.head = crisiskit::ClassifierHead<Real>::init(enc_cfg.hidden_size,
                                                     enc_cfg.num_classes, head_rng);
    clf.pooling = crisiskit::PoolingMode::MeanPool;
    return clf;
  };

  crisiskit::FinetuneConfig cfg = args.finetune;
  cfg.seed = g.seed;
  auto report = crisiskit::repeat_with_ci<Real>(make_classifier, ds, splits, cfg);

  const auto metrics_path = out_path(g, "metrics.json");
  write_json(metrics_path, to_json(report));
  const auto tsv_path = out_path(g, "metrics.tsv");
  {
    std::ofstream tsv(tsv_path);
    tsv << crisiskit::tsv_row(fs::path(args.model_dir).filename().string(), args.task_name,
                              report)
        << "\n";
  }
  std::cout << crisiskit::tsv_row(fs::path(args.model_dir).filename().string(),
                                  args.task_name, report)
            << "\n";

  crisiskit::RunManifest manifest;
  manifest.subcommand = "finetune";
  manifest.seed = g.seed;
  manifest.out_base = g.out;
  manifest.config = {{"model", args.model_dir},
                     {"dataset", args.dataset},
                     {"task", args.task_name},
                     {"max_length", args.max_length},
                     {"learning_rate", cfg.learning_rate},
                     {"batch_size", cfg.batch_size},
                     {"max_epochs", cfg.max_epochs},
                     {"patience", cfg.patience},
                     {"repeats", cfg.repeats}};
  manifest.add_input(args.dataset);
  manifest.add_output(metrics_path);

  if (!args.save_model.empty()) {
    auto clf = make_classifier(g.seed);
    crisiskit::finetune_run(clf, ds, splits, cfg, g.seed);
    crisiskit::save_classifier_dir(args.save_model, clf, tok);
    manifest.add_output(crisiskit::modeldir::bin_path(args.save_model));
  }
  manifest.write(out_path(g, "manifest.json"));
  return 0;
}

struct DistillArgs {
  std::string mode = "task";
  std::string teacher_dir;
  std::string dataset;   // task mode
  std::string corpus;    // generic mode
  std::string student = "s_t";
  std::string pooling = "mean";
  int max_length = 64;
  crisiskit::TaskDistillConfig task;
  crisiskit::GenericDistillConfig generic;
};

int cmd_distill(const Global& g, const DistillArgs& args) {
  require_file(crisiskit::modeldir::config_path(args.teacher_dir));
  auto tok = crisiskit::load_tokenizer_dir(args.teacher_dir);

  if (args.mode == "task") {
    require_file(args.dataset);
    auto teacher = crisiskit::load_classifier_dir<Real>(args.teacher_dir);
    auto records = crisiskit::read_jsonl(args.dataset, /*require_text=*/true);
    auto ds = crisiskit::encode_dataset(tok, records, args.max_length, true);
    auto splits = crisiskit::split_stratified(ds.labels, {.seed = g.seed});

    auto cfg = student_config_from(args.student, tok.vocab_size(), args.max_length);
    crisiskit::Rng init = crisiskit::named_stream(g.seed, "student-init");
    auto student = crisiskit::Classifier<Real>::init(cfg, init);

    crisiskit::TaskDistillConfig tcfg = args.task;
    tcfg.seed = g.seed;
    auto result = crisiskit::distill_task(teacher, student, ds, splits, tcfg);
    const double test_f1 =
        crisiskit::evaluate_macro_f1(student, ds, splits.test, tcfg.batch_size);
    const double teacher_f1 =
        crisiskit::evaluate_macro_f1(teacher, ds, splits.test, tcfg.batch_size);

    const auto student_dir = out_path(g, "student_task");
    crisiskit::save_classifier_dir(student_dir, student, tok);
    const auto trace_path = out_path(g, "loss_trace.csv");
    result.trace.to_csv(trace_path);

    json report = {{"best_val_macro_f1", result.best_val_f1},
                   {"best_epoch", result.best_epoch},
                   {"epochs_run", result.epochs_run},
                   {"student_test_macro_f1", test_f1},
                   {"teacher_test_macro_f1", teacher_f1},
                   {"model_dir", student_dir}};
    const auto report_path = out_path(g, "distill_report.json");
    write_json(report_path, report);
    std::cout << report.dump(2) << "\n";

    crisiskit::RunManifest manifest;
    manifest.subcommand = "distill";
    manifest.seed = g.seed;
  manifest.out_base = g.out;
    manifest.config = {{"mode", "task"},
                       {"teacher", args.teacher_dir},
                       {"dataset", args.dataset},
                       {"student", args.student},
                       {"alpha", tcfg.alpha},
                       {"temperature", tcfg.temperature},
                       {"learning_rate", tcfg.learning_rate},
                       {"batch_size", tcfg.batch_size},
                       {"max_epochs", tcfg.max_epochs}};
    manifest.add_input(args.dataset);
    manifest.add_output(crisiskit::modeldir::bin_path(student_dir));
    manifest.add_output(trace_path);
    manifest.add_output(report_path);
    manifest.write(out_path(g, "manifest.json"));
    return 0;
  }

  if (args.mode != "generic")
    throw std::runtime_error("unknown distillation mode: " + args.mode);

  require_file(args.corpus);
  auto teacher = crisiskit::load_encoder_dir<Real>(args.teacher_dir);
  auto records = crisiskit::read_jsonl(args.corpus, /*require_text=*/true);
  auto ds = crisiskit::encode_dataset(tok, records, args.max_length, false);

  auto cfg = student_config_from(args.student, tok.vocab_size(), args.max_length);
  crisiskit::Rng init = crisiskit::named_stream(g.seed, "student-init");
  auto student = crisiskit::EncoderModel<Real>::init(cfg, init);
  crisiskit::Rng proj_init = crisiskit::named_stream(g.seed, "projection-init");
  auto proj = crisiskit::DownsampleProjection<Real>::init(teacher.cfg.hidden_size,
                                                          cfg.hidden_size, proj_init);

  crisiskit::GenericDistillConfig gcfg = args.generic;
  gcfg.pooling = crisiskit::pooling_from_string(args.pooling);
  gcfg.seed = g.seed;
  auto result = crisiskit::distill_generic(teacher, student, proj, ds, gcfg);

  const auto student_dir = out_path(g, "student_generic");
  crisiskit::save_encoder_dir(student_dir, student, tok);
  crisiskit::save_projection(student_dir, proj);
  const auto trace_path = out_path(g, "loss_trace.csv");
  result.trace.to_csv(trace_path);

  json report = {{"initial_smoothed_loss", result.initial_smoothed},
                 {"final_smoothed_loss", result.final_smoothed},
                 {"steps", result.trace.points.size()},
                 {"pooling", args.pooling},
                 {"model_dir", student_dir}};
  const auto report_path = out_path(g, "distill_report.json");
  write_json(report_path, report);
  std::cout << report.dump(2) << "\n";

  crisiskit::RunManifest manifest;
  manifest.subcommand = "distill";
  manifest.seed = g.seed;
  manifest.out_base = g.out;
  manifest.config = {{"mode", "generic"},
                     {"teacher", args.teacher_dir},
                     {"corpus", args.corpus},
                     {"student", args.student},
                     {"pooling", args.pooling},
                     {"learning_rate", gcfg.learning_rate},
                     {"batch_size", gcfg.batch_size},
                     {"epochs", gcfg.epochs}};
  manifest.add_input(args.corpus);
  manifest.add_output(crisiskit::modeldir::bin_path(student_dir));
  manifest.add_output(trace_path);
  manifest.add_output(report_path);
  manifest.write(out_path(g, "manifest.json"));
  return 0;
}

struct ComparePoolingArgs {
  std::string teacher_dir;
  std::string corpus;
  std::string student = "s_t";
  int max_length = 64;
  crisiskit::GenericDistillConfig generic;
};

int cmd_compare_pooling(const Global& g, const ComparePoolingArgs& args) {
  require_file(args.corpus);
  require_file(crisiskit::modeldir::config_path(args.teacher_dir));
  auto tok = crisiskit::load_tokenizer_dir(args.teacher_dir);
  auto teacher = crisiskit::load_encoder_dir<Real>(args.teacher_dir);
  auto records = crisiskit::read_jsonl(args.corpus, /*require_text=*/true);
  auto ds = crisiskit::encode_dataset(tok, records, args.max_length, false);

  auto cfg = student_config_from(args.student, tok.vocab_size(), args.max_length);
  crisiskit::GenericDistillConfig gcfg = args.generic;
  gcfg.seed = g.seed;
  auto report = crisiskit::compare_pooling(teacher, cfg, ds, gcfg);

  const auto mean_trace = out_path(g, "loss_trace_mean.csv");
  const auto cls_trace = out_path(g, "loss_trace_cls.csv");
  report.mean_pool_trace.to_csv(mean_trace);
  report.cls_trace.to_csv(cls_trace);

  json out = {{"mean_pool_final_loss", report.mean_pool_final_loss},
              {"cls_final_loss", report.cls_final_loss},
              {"lower", report.mean_pool_final_loss <= report.cls_final_loss ? "mean" : "cls"}};
  const auto report_path = out_path(g, "pooling_comparison.json");
  write_json(report_path, out);
  std::cout << out.dump(2) << "\n";

  crisiskit::RunManifest manifest;
  manifest.subcommand = "compare-pooling";
  manifest.seed = g.seed;
  manifest.out_base = g.out;
  manifest.config = {{"teacher", args.teacher_dir},
                     {"corpus", args.corpus},
                     {"student", args.student},
                     {"learning_rate", gcfg.learning_rate},
                     {"batch_size", gcfg.batch_size},
                     {"epochs", gcfg.epochs}};
  manifest.add_input(args.corpus);
  manifest.add_output(report_path);
  manifest.add_output(mean_trace);
  manifest.add_output(cls_trace);
  manifest.write(out_path(g, "manifest.json"));
  return 0;
}

struct BenchArgs {
  std::string model = "s_t";
  std::string baseline;
  crisiskit::BenchConfig bench;
  int threads = 1;
};

crisiskit::BenchReport bench_one(const Global& g, const std::string& spec,
                                 const crisiskit::BenchConfig& cfg) {
  if (fs::exists(crisiskit::modeldir::config_path(spec))) {
    auto model = crisiskit::load_encoder_dir<Real>(spec);
    return crisiskit::run_benchmark(model, cfg, fs::path(spec).filename().string());
  }
  auto shape = crisiskit::desk_shape(spec, 8192, std::max(cfg.input_length, 64));
  crisiskit::Rng rng = crisiskit::named_stream(g.seed, "bench-init");
  auto model = crisiskit::EncoderModel<Real>::init(shape, rng);
  return crisiskit::run_benchmark(model, cfg, spec);
}

int cmd_bench(const Global& g, const BenchArgs& args) {
  auto report = bench_one(g, args.model, args.bench);
  std::vector<crisiskit::BenchReport> rows = {report};
  json out = {{"report", to_json(report)}};

  crisiskit::BenchReport baseline;
  const bool have_baseline = !args.baseline.empty();
  if (have_baseline) {
    baseline = bench_one(g, args.baseline, args.bench);
    rows.push_back(baseline);
    out["baseline"] = to_json(baseline);
    out["speedup"] =
        crisiskit::format_speedup(crisiskit::speedup_vs_baseline(report, baseline));
  }
  if (args.threads > 1)
    out["aggregate_throughput_threads_" + std::to_string(args.threads)] = [&] {
      if (fs::exists(crisiskit::modeldir::config_path(args.model))) {
        auto model = crisiskit::load_encoder_dir<Real>(args.model);
        return crisiskit::aggregate_throughput(model, args.bench, args.threads);
      }
      crisiskit::Rng rng = crisiskit::named_stream(g.seed, "bench-init");
      auto model = crisiskit::EncoderModel<Real>::init(
          crisiskit::desk_shape(args.model, 8192, std::max(args.bench.input_length, 64)),
          rng);
      return crisiskit::aggregate_throughput(model, args.bench, args.threads);
    }();

  const auto report_path = out_path(g, "bench.json");
  write_json(report_path, out);
  std::cout << out.dump(2) << "\n";
  std::cout << crisiskit::bench_table(rows, have_baseline ? &rows[1] : nullptr);
  if (have_baseline) std::cout << "speedup: " << out["speedup"].get<std::string>() << "\n";

  crisiskit::RunManifest manifest;
  manifest.subcommand = "bench";
  manifest.seed = g.seed;
  manifest.out_base = g.out;
  manifest.config = {{"model", args.model},
                     {"baseline", args.baseline},
                     {"batch_size", args.bench.batch_size},
                     {"iterations", args.bench.iterations},
                     {"warmup", args.bench.warmup},
                     {"input_length", args.bench.input_length},
                     {"threads", args.threads}};
  manifest.add_output(report_path);
  manifest.write(out_path(g, "manifest.json"));
  return 0;
}

struct AnalyzeArgs {
  std::string records;
  std::string model_dir;          // classify when records lack labels
  std::string resource_model_dir; // optional second classifier
  std::string group_by = "country";
  std::string trend_by = "resource";
  std::vector<std::string> resource_filter;
  int top_k = 10;
  int max_length = 64;
};

int cmd_analyze(const Global& g, const AnalyzeArgs& args) {
  require_file(args.records);
  auto records = crisiskit::read_jsonl(args.records);

  crisiskit::RunManifest manifest;
  manifest.subcommand = "analyze";
  manifest.seed = g.seed;
  manifest.out_base = g.out;
  manifest.add_input(args.records);

  const bool unlabelled =
      std::any_of(records.begin(), records.end(),
                  [](const crisiskit::RawRecord& r) { return !r.label.has_value(); });
  if (unlabelled) {
    if (args.model_dir.empty())
      throw std::runtime_error("records are unlabelled; pass --model to classify them");
    auto tok = crisiskit::load_tokenizer_dir(args.model_dir);
    auto clf = crisiskit::load_classifier_dir<Real>(args.model_dir);
    records = crisiskit::label_corpus(clf, tok, std::move(records), args.max_length);
  }
  if (!args.resource_model_dir.empty()) {
    auto tok = crisiskit::load_tokenizer_dir(args.resource_model_dir);
    auto clf = crisiskit::load_classifier_dir<Real>(args.resource_model_dir);
    records = crisiskit::tag_resources(clf, tok, std::move(records), args.max_length);
  }

  const auto by = crisiskit::group_by_from_string(args.group_by);
  auto ro = crisiskit::ro_ratio(records, by);
  const auto ro_path = out_path(g, "ro_ratio.csv");
  crisiskit::write_csv(ro_path, crisiskit::ro_table(ro));
  manifest.add_output(ro_path);

  const auto trend_key = args.trend_by == "label" ? crisiskit::TrendKey::ByLabel
                                                  : crisiskit::TrendKey::Resource;
  auto trend = crisiskit::monthly_trend(records, trend_key, args.resource_filter);
  const auto trend_path = out_path(g, "trend.csv");
  crisiskit::write_csv(trend_path, crisiskit::trend_table_csv(trend));
  manifest.add_output(trend_path);
  const auto svg_path = out_path(g, "trend.svg");
  crisiskit::write_trend_svg(svg_path, trend,
                             args.trend_by == "label" ? "monthly labels" : "monthly resources");
  manifest.add_output(svg_path);

  for (auto [label, name] : {std::pair{crisiskit::Label::Request, "top_requests.csv"},
                             std::pair{crisiskit::Label::Offer, "top_offers.csv"}}) {
    auto top = crisiskit::top_regions(records, label, args.top_k, by);
    const auto path = out_path(g, name);
    crisiskit::write_csv(path, crisiskit::top_regions_csv(top));
    manifest.add_output(path);
  }

  json summary = {{"records", records.size()},
                  {"regions", ro.size()},
                  {"untimed", trend.untimed},
                  {"months", trend.months.size()}};
  const auto summary_path = out_path(g, "analyze_summary.json");
  write_json(summary_path, summary);
  manifest.add_output(summary_path);
  std::cout << summary.dump(2) << "\n";

  manifest.config = {{"records", args.records},
                     {"group_by", args.group_by},
                     {"trend_by", args.trend_by},
                     {"top_k", args.top_k}};
  manifest.write(out_path(g, "manifest.json"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Global g;

  // --config is resolved before CLI11 so file values become option defaults
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config" || std::string(argv[i]) == "-c")
      g.config_path = argv[i + 1];
  if (g.config_path.empty())
    if (const char* env = std::getenv("CRISIS_CONFIG")) g.config_path = env;
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) {
      std::cerr << json{{"error", "missing input: " + g.config_path}}.dump() << "\n";
      return 1;
    }
    g.config = json::parse(in);
  }
  g.seed = cfg_get<std::uint64_t>(g.config, "global", "seed", 42);
  g.out = cfg_get<std::string>(g.config, "global", "out", "out");

  CLI::App app{"crisis-text toolkit: datasets, distillation, evaluation, benchmarks"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags remain valid after the subcommand name
  app.add_option("--seed", g.seed, "global random seed")->envname("CRISIS_SEED");
  app.add_option("--out", g.out, "output directory")->envname("CRISIS_OUT");
  app.add_option("--config,-c", g.config_path, "JSON config file (defaults for flags)");

  BuildDatasetArgs bd;
  auto* bd_cmd = app.add_subcommand("build-dataset",
                                    "filter a multi-annotator matrix to unanimous rows");
  bd_cmd->add_option("--annotations", bd.annotations, "annotation matrix csv")->required();
  bd_cmd->add_option("--records", bd.records, "corpus jsonl to join texts from");

  ValidateArgs va;
  va.margin = cfg_get(g.config, "validate", "margin", 0.03);
  va.confidence = cfg_get(g.config, "validate", "confidence", 0.95);
  auto* va_cmd = app.add_subcommand("validate",
                                    "draw the human-validation sample and score kappa");
  va_cmd->add_option("--dataset", va.dataset, "labelled jsonl (agreement output)")->required();
  va_cmd->add_option("--humans", va.humans, "human label csvs (id,label)");
  va_cmd->add_option("--margin", va.margin, "margin of error");
  va_cmd->add_option("--confidence", va.confidence, "confidence level");

  TokenizerArgs tk;
  tk.vocab_size = cfg_get(g.config, "tokenizer", "vocab_size", 8192);
  auto* tk_cmd = app.add_subcommand("tokenizer", "train the shared subword tokenizer");
  tk_cmd->add_option("--corpus", tk.corpus, "corpus jsonl")->required();
  tk_cmd->add_option("--vocab-size", tk.vocab_size, "vocabulary size cap");

  auto add_finetune_flags = [&](CLI::App* cmd, crisiskit::FinetuneConfig& cfg,
                                const std::string& stage) {
    cfg.learning_rate = cfg_get(g.config, stage, "learning_rate", cfg.learning_rate);
    cfg.batch_size = cfg_get(g.config, stage, "batch_size", cfg.batch_size);
    cfg.max_epochs = cfg_get(g.config, stage, "max_epochs", cfg.max_epochs);
    cfg.patience = cfg_get(g.config, stage, "patience", cfg.patience);
    cfg.repeats = cfg_get(g.config, stage, "repeats", cfg.repeats);
    cmd->add_option("--lr", cfg.learning_rate, "learning rate");
    cmd->add_option("--batch-size", cfg.batch_size, "batch size");
    cmd->add_option("--max-epochs", cfg.max_epochs, "maximum epochs");
    cmd->add_option("--patience", cfg.patience, "early-stopping patience");
  };

  TrainTeacherArgs tt;
  auto* tt_cmd = app.add_subcommand("train-teacher",
                                    "train a classifier to act as the distillation teacher");
  tt_cmd->add_option("--dataset", tt.dataset, "labelled jsonl")->required();
  tt_cmd->add_option("--tokenizer", tt.tokenizer_dir, "tokenizer directory")->required();
  tt_cmd->add_option("--shape", tt.shape, "teacher|s_m|s_s|s_t or config json path");
  tt_cmd->add_option("--max-length", tt.max_length, "sequence length");
  add_finetune_flags(tt_cmd, tt.finetune, "train_teacher");

  FinetuneArgs ft;
  auto* ft_cmd = app.add_subcommand("finetune",
                                    "fine-tune + evaluate with repeats and a 95% CI");
  ft_cmd->add_option("--model", ft.model_dir, "model directory")->required();
  ft_cmd->add_option("--dataset", ft.dataset, "labelled jsonl")->required();
  ft_cmd->add_option("--task", ft.task_name, "task name for the report row");
  ft_cmd->add_option("--max-length", ft.max_length, "sequence length");
  ft_cmd->add_option("--save-model", ft.save_model, "directory for the final classifier");
  add_finetune_flags(ft_cmd, ft.finetune, "finetune");
  ft_cmd->add_option("--repeats", ft.finetune.repeats, "fine-tuning repeats");

  DistillArgs di;
  di.task.alpha = cfg_get(g.config, "distill", "alpha", di.task.alpha);
  di.task.temperature = cfg_get(g.config, "distill", "temperature", di.task.temperature);
  di.task.learning_rate = cfg_get(g.config, "distill", "task_learning_rate",
                                  di.task.learning_rate);
  di.generic.learning_rate = cfg_get(g.config, "distill", "generic_learning_rate",
                                     di.generic.learning_rate);
  di.generic.batch_size = cfg_get(g.config, "distill", "generic_batch_size",
                                  di.generic.batch_size);
  di.generic.epochs = cfg_get(g.config, "distill", "epochs", di.generic.epochs);
  auto* di_cmd = app.add_subcommand("distill", "task or generic knowledge distillation");
  di_cmd->add_option("--mode", di.mode, "task|generic")->required();
  di_cmd->add_option("--teacher", di.teacher_dir, "teacher model directory")->required();
  di_cmd->add_option("--dataset", di.dataset, "labelled jsonl (task mode)");
  di_cmd->add_option("--corpus", di.corpus, "unlabelled jsonl (generic mode)");
  di_cmd->add_option("--student", di.student, "s_m|s_s|s_t or config json path");
  di_cmd->add_option("--pooling", di.pooling, "student pooling: mean|cls (generic)");
  di_cmd->add_option("--max-length", di.max_length, "sequence length");
  di_cmd->add_option("--alpha", di.task.alpha, "soft-loss weight (task)");
  di_cmd->add_option("--temperature", di.task.temperature, "softening temperature (task)");
  di_cmd->add_option("--task-lr", di.task.learning_rate, "task learning rate");
  di_cmd->add_option("--task-batch-size", di.task.batch_size, "task batch size");
  di_cmd->add_option("--max-epochs", di.task.max_epochs, "task max epochs");
  di_cmd->add_option("--patience", di.task.patience, "task patience");
  di_cmd->add_option("--generic-lr", di.generic.learning_rate, "generic learning rate");
  di_cmd->add_option("--generic-batch-size", di.generic.batch_size, "generic batch size");
  di_cmd->add_option("--epochs", di.generic.epochs, "generic passes over the corpus");

  ComparePoolingArgs cp;
  cp.generic = di.generic;
  auto* cp_cmd = app.add_subcommand(
      "compare-pooling", "train mean-pool vs CLS students under identical seeds");
  cp_cmd->add_option("--teacher", cp.teacher_dir, "teacher model directory")->required();
  cp_cmd->add_option("--corpus", cp.corpus, "unlabelled jsonl")->required();
  cp_cmd->add_option("--student", cp.student, "s_m|s_s|s_t or config json path");
  cp_cmd->add_option("--max-length", cp.max_length, "sequence length");
  cp_cmd->add_option("--generic-lr", cp.generic.learning_rate, "learning rate");
  cp_cmd->add_option("--generic-batch-size", cp.generic.batch_size, "batch size");
  cp_cmd->add_option("--epochs", cp.generic.epochs, "passes over the corpus");

  BenchArgs be;
  be.bench.batch_size = cfg_get(g.config, "bench", "batch_size", 32);
  be.bench.iterations = cfg_get(g.config, "bench", "iterations", 1000);
  be.bench.warmup = cfg_get(g.config, "bench", "warmup", 10);
  be.bench.input_length = cfg_get(g.config, "bench", "input_length", 64);
  auto* be_cmd = app.add_subcommand("bench", "measure inference latency and throughput");
  be_cmd->add_option("--model", be.model, "model dir or shape tag")->required();
  be_cmd->add_option("--baseline", be.baseline, "baseline model dir or shape tag");
  be_cmd->add_option("--batch-size", be.bench.batch_size, "batch size");
  be_cmd->add_option("--iterations", be.bench.iterations, "timed iterations");
  be_cmd->add_option("--warmup", be.bench.warmup, "warm-up passes");
  be_cmd->add_option("--input-length", be.bench.input_length, "synthetic sequence length");
  be_cmd->add_option("--threads", be.threads, "optional multi-reader stream count");

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze",
                                    "request/offer ratios, trends, and top regions");
  an_cmd->add_option("--records", an.records, "geo records jsonl")->required();
  an_cmd->add_option("--model", an.model_dir, "classifier for unlabelled records");
  an_cmd->add_option("--resource-model", an.resource_model_dir, "resource classifier");
  an_cmd->add_option("--group-by", an.group_by, "country|city");
  an_cmd->add_option("--trend-by", an.trend_by, "resource|label");
  an_cmd->add_option("--resource-filter", an.resource_filter, "resources to keep");
  an_cmd->add_option("--top-k", an.top_k, "rows in the top-regions tables");
  an_cmd->add_option("--max-length", an.max_length, "sequence length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (bd_cmd->parsed()) return cmd_build_dataset(g, bd);
    if (va_cmd->parsed()) return cmd_validate(g, va);
    if (tk_cmd->parsed()) return cmd_tokenizer(g, tk);
    if (tt_cmd->parsed()) return cmd_train_teacher(g, tt);
    if (ft_cmd->parsed()) return cmd_finetune(g, ft);
    if (di_cmd->parsed()) return cmd_distill(g, di);
    if (cp_cmd->parsed()) return cmd_compare_pooling(g, cp);
    if (be_cmd->parsed()) return cmd_bench(g, be);
    if (an_cmd->parsed()) return cmd_analyze(g, an);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
