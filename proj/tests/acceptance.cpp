// Acceptance suite: one binary, one pass/fail line per criterion.
// Everything runs on synthetic desk-scale data with pinned tolerances.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "crisiskit/analytics.hpp"
#include "crisiskit/bench.hpp"
#include "crisiskit/dataset_builder.hpp"
#include "crisiskit/distill.hpp"
#include "crisiskit/finetune.hpp"
#include "crisiskit/grad_check.hpp"
#include "crisiskit/text_normalizer.hpp"
#include "normalization_cases.hpp"
#include "synthetic.hpp"

using namespace crisiskit;
using num::Tensor;

namespace {

using Clock = std::chrono::steady_clock;

struct Harness {
  int failures = 0;

  void report(int number, const std::string& name, bool ok, const std::string& detail,
              double seconds) {
    std::printf("[%s] criterion %2d: %-22s %s (%.1fs)\n", ok ? "PASS" : "FAIL", number,
                name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

Tensor<double> randn(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.data) v = rng.normal() * scale;
  return t;
}

// ------------------------------------------------------------------ 1 ----

void criterion_gradients(Harness& h) {
  const auto t0 = Clock::now();
  double worst = 0;
  auto track = [&worst](double err) { worst = std::max(worst, err); };
  Rng rng(404);

  {  // matmul
    auto a = num::make_param(randn({3, 4}, rng));
    auto b = num::make_param(randn({4, 2}, rng));
    auto t = num::make_const(randn({3, 2}, rng));
    track(num::grad_check({a, b}, [&] { return num::mse_loss(num::matmul_node(a, b), t); }));
  }
  {  // softmax with masking
    auto scores = num::make_param(randn({2, 3, 3}, rng));
    Tensor<double> mask({1, 3}, {1.0, 1.0, 0.0});
    auto t = num::make_const(randn({2, 3, 3}, rng, 0.2));
    track(num::grad_check(
        {scores}, [&] { return num::mse_loss(num::masked_softmax(scores, mask, 2), t); }));
  }
  {  // layer norm
    auto x = num::make_param(randn({3, 6}, rng));
    auto g = num::make_param(randn({6}, rng, 0.4));
    auto b = num::make_param(randn({6}, rng, 0.4));
    auto t = num::make_const(randn({3, 6}, rng));
    track(num::grad_check({x, g, b},
                          [&] { return num::mse_loss(num::layer_norm(x, g, b), t); }));
  }
  {  // gelu
    auto x = num::make_param(randn({4, 4}, rng));
    auto t = num::make_const(randn({4, 4}, rng));
    track(num::grad_check({x}, [&] { return num::mse_loss(num::gelu(x), t); }));
  }
  {  // mean pool and cls pool
    auto x = num::make_param(randn({2, 4, 3}, rng));
    Tensor<double> mask({2, 4}, {1, 1, 0, 0, 1, 1, 1, 0});
    auto t = num::make_const(randn({2, 3}, rng));
    track(num::grad_check({x}, [&] { return num::mse_loss(num::mean_pool(x, mask), t); }));
    track(num::grad_check({x}, [&] { return num::mse_loss(num::cls_pool(x), t); }));
  }
  {  // the three losses
    auto logits = num::make_param(randn({3, 4}, rng));
    std::vector<int> labels = {0, 2, 3};
    std::vector<double> weights = {1.0, 0.5, 2.0};
    track(num::grad_check({logits},
                          [&] { return num::cross_entropy_loss(logits, labels, weights); }));
    Tensor<double> teacher = randn({3, 4}, rng);
    track(num::grad_check({logits},
                          [&] { return num::kl_distill_loss(teacher, logits, 2.0); }));
    auto a = num::make_param(randn({2, 3}, rng));
    auto b = num::make_param(randn({2, 3}, rng));
    track(num::grad_check({a, b}, [&] { return num::mse_loss(a, b); }));
  }
  {  // downsample projection
    Rng proj_rng(5);
    auto proj = DownsampleProjection<double>::init(6, 3, proj_rng);
    auto x = num::make_const(randn({4, 6}, rng));
    auto t = num::make_const(randn({4, 3}, rng));
    track(num::grad_check({proj.weight, proj.bias},
                          [&] { return num::mse_loss(proj.project(x), t); }));
  }
  {  // full encoder block through pooling, head, and loss
    EncoderConfig cfg;
    cfg.hidden_size = 8;
    cfg.num_layers = 1;
    cfg.num_heads = 2;
    cfg.intermediate_size = 16;
    cfg.vocab_size = 11;
    cfg.max_positions = 5;
    cfg.num_classes = 3;
    Rng init(3);
    auto clf = Classifier<double>::init(cfg, init);
    TokenSequence s1{{2, 8, 9, 10, 0}, {1, 1, 1, 1, 0}};
    TokenSequence s2{{2, 7, 0, 0, 0}, {1, 1, 0, 0, 0}};
    auto batch = TokenBatch::from(std::vector<TokenSequence>{s1, s2});
    std::vector<int> labels = {1, 2};
    track(num::grad_check(clf.params(), [&] {
      return num::cross_entropy_loss(clf.logits(batch), labels, {});
    }));
  }

  const double secs = seconds_since(t0);
  h.report(1, "gradient suite", worst < 1e-4 && secs < 120,
           fmt("max rel err %.2e, budget 120s", worst), secs);
}

// ------------------------------------------------------------------ 2 ----

void criterion_agreement(Harness& h) {
  const auto t0 = Clock::now();
  Rng rng(8181);
  AnnotationMatrix m;
  m.annotator_names = {"a1", "a2", "a3", "a4"};
  for (int r = 0; r < 10000; ++r) {
    m.ids.push_back("t" + std::to_string(r));
    std::vector<std::optional<Label>> row;
    const Label base = Label(rng.next_below(4));
    const bool agree = rng.next_double() < 0.55;
    for (int a = 0; a < 4; ++a) row.push_back(agree ? base : Label(rng.next_below(4)));
    m.cells.push_back(std::move(row));
  }

  auto result = agreement_filter(m);

  // independent brute-force row scan
  std::vector<LabelledId> oracle;
  for (size_t r = 0; r < m.rows(); ++r) {
    bool same = true;
    for (size_t a = 1; a < 4; ++a)
      if (!(m.cells[r][a] == m.cells[r][0])) same = false;
    if (same && m.cells[r][0].has_value()) oracle.push_back({m.ids[r], *m.cells[r][0]});
  }

  bool equal = result.agreed.size() == oracle.size();
  for (size_t i = 0; equal && i < oracle.size(); ++i)
    equal = result.agreed[i].id == oracle[i].id && result.agreed[i].label == oracle[i].label;

  bool permutation_ok = true;
  Rng perm_rng(77);
  for (int trial = 0; trial < 100 && permutation_ok; ++trial) {
    std::vector<size_t> perm = {0, 1, 2, 3};
    perm_rng.shuffle(perm.begin(), perm.end());
    AnnotationMatrix shuffled = m;
    for (size_t r = 0; r < m.rows(); ++r)
      for (size_t a = 0; a < 4; ++a) shuffled.cells[r][a] = m.cells[r][perm[a]];
    auto res = agreement_filter(shuffled);
    permutation_ok = res.agreed.size() == result.agreed.size();
    for (size_t i = 0; permutation_ok && i < res.agreed.size(); ++i)
      permutation_ok = res.agreed[i].id == result.agreed[i].id &&
                       res.agreed[i].label == result.agreed[i].label;
  }

  const bool exact_partition = result.agreed.size() + size_t(result.dropped) == m.rows();
  h.report(2, "agreement oracle", equal && permutation_ok && exact_partition,
           fmt("%zu/10000 kept equal brute force, 100 column shuffles invariant",
               result.agreed.size()),
           seconds_since(t0));
}

// ------------------------------------------------------------------ 3 ----

void criterion_sample_size(Harness& h) {
  const auto t0 = Clock::now();
  const auto headline = sample_size(101000, 0.03, 0.95);
  bool ok = headline >= 1055 && headline <= 1058;

  const double z = probit(0.975);
  std::int64_t prev = 0;
  const std::int64_t populations[20] = {10,     25,     50,     100,    250,
                                        500,    1000,   2500,   5000,   10000,
                                        25000,  50000,  75000,  101000, 150000,
                                        250000, 500000, 750000, 1000000, 5000000};
  for (std::int64_t n_pop : populations) {
    const auto got = sample_size(n_pop, 0.03, 0.95);
    const double n0 = z * z * 0.25 / (0.03 * 0.03);
    const double fpc = n0 / (1.0 + (n0 - 1.0) / double(n_pop));
    const auto hand = std::max<std::int64_t>(
        1, std::min<std::int64_t>(n_pop, std::int64_t(std::ceil(fpc - 1e-9))));
    if (got != hand || got < prev) ok = false;
    prev = got;
  }
  std::int64_t prev_e = std::int64_t(1) << 40;
  for (double e : {0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.07, 0.10, 0.13, 0.16,
                   0.20, 0.25, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 0.95}) {
    const auto got = sample_size(101000, e, 0.95);
    if (got > prev_e) ok = false;
    prev_e = got;
  }

  h.report(3, "sample-size check", ok,
           fmt("n(101000, 3%%, 95%%) = %lld in [1055,1058]; 20-point grids monotone",
               (long long)headline),
           seconds_since(t0));
}

// ------------------------------------------------------------------ 4 ----

void criterion_kappa(Harness& h) {
  const auto t0 = Clock::now();
  std::vector<Label> a, b;
  auto fill = [&](Label la, Label lb, int n) {
    for (int i = 0; i < n; ++i) {
      a.push_back(la);
      b.push_back(lb);
    }
  };
  fill(Label::Request, Label::Request, 45);
  fill(Label::Request, Label::Offer, 5);
  fill(Label::Offer, Label::Request, 5);
  fill(Label::Offer, Label::Offer, 45);
  const double confusion_kappa = cohens_kappa(a, b).kappa;
  const bool confusion_ok = std::abs(confusion_kappa - 0.8) <= 1e-12;

  std::vector<Label> same = {Label::Request, Label::Offer, Label::Irrelevant, Label::Request};
  const bool identity_ok = cohens_kappa(same, same).kappa == 1.0;

  Rng rng(90);
  std::vector<Label> u, v;
  for (int i = 0; i < 10000; ++i) {
    u.push_back(Label(rng.next_below(4)));
    v.push_back(Label(rng.next_below(4)));
  }
  const double mc = cohens_kappa(u, v).kappa;
  const bool mc_ok = std::abs(mc) < 0.05;

  h.report(4, "kappa checks", confusion_ok && identity_ok && mc_ok,
           fmt("confusion k=%.12f, identity k=1, monte carlo k=%.4f", confusion_kappa, mc),
           seconds_since(t0));
}

// ------------------------------------------------------------------ 5 ----

struct TaskWorld {
  BpeTokenizer tok;
  TextDataset ds;
  Splits splits;
  int max_len = 16;

  explicit TaskWorld(int n) : tok(make_tok(n)) {
    auto records = testdata::separable_records(n, 20250101);
    ds = encode_dataset(tok, records, max_len, true);
    splits = split_stratified(ds.labels, SplitSpec{});
  }

  static BpeTokenizer make_tok(int n) {
    auto records = testdata::separable_records(n, 20250101);
    std::vector<CleanText> corpus;
    for (const auto& r : records) corpus.push_back(normalize_text(r.text));
    return BpeTokenizer::train(corpus, 800);
  }
};

void criterion_finetune(Harness& h, TaskWorld& world) {
  const auto t0 = Clock::now();

  // protocol pieces with hand-derived expectations
  const std::vector<int> gold = {0, 0, 1, 1};
  const std::vector<int> pred = {0, 1, 1, 1};
  const bool f1_ok = std::abs(macro_f1(pred, gold) - (11.0 / 15.0)) <= 1e-9;

  EarlyStopper stopper(5, 1e-4);
  const std::vector<double> plateau = {0.5, 0.6, 0.6, 0.6, 0.6, 0.6, 0.6};
  int stopped_after = 0;
  for (size_t i = 0; i < plateau.size(); ++i) {
    if (stopper.observe(plateau[i])) {
      stopped_after = int(i) + 1;
      break;
    }
  }
  const bool stopping_ok = stopped_after == 7 && stopper.best_epoch() == 2;

  // the full protocol on the 2000-record separable task
  FinetuneConfig cfg;
  cfg.learning_rate = 3e-3;  // desk-scale rate for a randomly initialized model
  cfg.batch_size = 32;
  cfg.max_epochs = 30;
  cfg.patience = 5;
  Rng init = named_stream(501, "acceptance-finetune");
  auto clf =
      Classifier<float>::init(desk_shape("s_t", world.tok.vocab_size(), world.max_len), init);
  auto result = finetune_run(clf, world.ds, world.splits, cfg, 501);
  const double test_f1 = evaluate_macro_f1(clf, world.ds, world.splits.test, cfg.batch_size);

  const double secs = seconds_since(t0);
  h.report(5, "fine-tuning protocol",
           f1_ok && stopping_ok && test_f1 >= 0.95 && result.epochs_run <= 30 && secs < 600,
           fmt("test macro F1 %.4f (stopped after %d epochs), plateau stop 7/best 2", test_f1,
               result.epochs_run),
           secs);
}

// ------------------------------------------------------------------ 6 ----

void criterion_task_distill(Harness& h, TaskWorld& world) {
  const auto t0 = Clock::now();

  FinetuneConfig tcfg;
  tcfg.learning_rate = 1e-3;
  tcfg.batch_size = 32;
  tcfg.max_epochs = 30;
  tcfg.patience = 5;
  Rng t_init = named_stream(601, "acceptance-teacher");
  auto teacher = Classifier<float>::init(
      desk_shape("teacher", world.tok.vocab_size(), world.max_len), t_init);
  finetune_run(teacher, world.ds, world.splits, tcfg, 601);
  const double teacher_f1 =
      evaluate_macro_f1(teacher, world.ds, world.splits.test, tcfg.batch_size);

  TaskDistillConfig dcfg;
  dcfg.alpha = 0.5;
  dcfg.temperature = 1.0;
  dcfg.learning_rate = 1e-3;
  dcfg.batch_size = 32;
  dcfg.max_epochs = 30;
  dcfg.patience = 5;
  dcfg.seed = 602;
  Rng s_init = named_stream(602, "acceptance-student");
  auto student =
      Classifier<float>::init(desk_shape("s_m", world.tok.vocab_size(), world.max_len), s_init);
  auto result = distill_task(teacher, student, world.ds, world.splits, dcfg);
  const double student_f1 =
      evaluate_macro_f1(student, world.ds, world.splits.test, dcfg.batch_size);

  const double secs = seconds_since(t0);
  const bool ok = (teacher_f1 - student_f1) <= 0.05 && secs < 1200;
  h.report(6, "task distillation", ok,
           fmt("teacher F1 %.4f vs student F1 %.4f (gap %.4f, limit 0.05), %d epochs",
               teacher_f1, student_f1, teacher_f1 - student_f1, result.epochs_run),
           secs);
}

// ------------------------------------------------------------------ 7 ----

void criterion_generic_distill(Harness& h) {
  const auto t0 = Clock::now();
  const int max_len = 16;

  auto corpus_records = testdata::filler_corpus(50000, 7070);
  std::vector<CleanText> clean;
  clean.reserve(corpus_records.size());
  for (const auto& r : corpus_records) clean.push_back(normalize_text(r.text));
  auto tok = BpeTokenizer::train(clean, 2000);
  auto corpus = encode_dataset(tok, corpus_records, max_len, false);

  Rng t_init = named_stream(701, "acceptance-generic-teacher");
  auto teacher =
      EncoderModel<float>::init(desk_shape("teacher", tok.vocab_size(), max_len), t_init);
  const auto teacher_before = snapshot(teacher.params());

  GenericDistillConfig cfg;
  cfg.learning_rate = 2e-3;
  cfg.batch_size = 32;
  cfg.epochs = 1;

  bool drops_ok = true;
  std::string drops;
  for (const char* tag : {"s_m", "s_s", "s_t"}) {
    Rng s_init = named_stream(fnv1a64(tag), "acceptance-generic-student");
    auto student =
        EncoderModel<float>::init(desk_shape(tag, tok.vocab_size(), max_len), s_init);
    Rng p_init = named_stream(fnv1a64(tag), "acceptance-generic-proj");
    auto proj = DownsampleProjection<float>::init(teacher.cfg.hidden_size,
                                                  student.cfg.hidden_size, p_init);
    cfg.seed = fnv1a64(tag);
    auto result = distill_generic(teacher, student, proj, corpus, cfg);
    const double ratio = result.final_smoothed / result.initial_smoothed;
    drops += fmt("%s %.1f%% ", tag, 100.0 * ratio);
    if (!(ratio <= 0.10)) drops_ok = false;
  }

  bool teacher_frozen = true;
  const auto teacher_after = snapshot(teacher.params());
  for (size_t i = 0; i < teacher_before.size(); ++i)
    if (teacher_before[i].data != teacher_after[i].data) teacher_frozen = false;

  // pooling comparison on a 10k subset; the ordering is reported, not asserted
  TextDataset subset;
  for (size_t i = 0; i < 10000; ++i) {
    subset.ids.push_back(corpus.ids[i]);
    subset.sequences.push_back(corpus.sequences[i]);
    subset.labels.push_back(corpus.labels[i]);
  }
  GenericDistillConfig pcfg = cfg;
  pcfg.seed = 703;
  auto pooling =
      compare_pooling(teacher, desk_shape("s_t", tok.vocab_size(), max_len), subset, pcfg);
  const bool pooling_ok =
      std::isfinite(pooling.mean_pool_final_loss) && std::isfinite(pooling.cls_final_loss);

  const double secs = seconds_since(t0);
  h.report(7, "generic distillation",
           drops_ok && teacher_frozen && pooling_ok && secs < 1800,
           fmt("EMA at %sof initial (limit 10%%); teacher frozen; pooling mean %.3e vs "
               "cls %.3e (%s lower)",
               drops.c_str(), pooling.mean_pool_final_loss, pooling.cls_final_loss,
               pooling.mean_pool_final_loss <= pooling.cls_final_loss ? "mean" : "cls"),
           secs);
}

// ------------------------------------------------------------------ 8 ----

void criterion_bench(Harness& h) {
  const auto t0 = Clock::now();
  BenchConfig cfg;
  cfg.batch_size = 32;
  cfg.iterations = 40;
  cfg.warmup = 5;
  cfg.input_length = 32;

  std::vector<BenchReport> reports;
  bool identity_ok = true;
  for (const char* tag : {"teacher", "s_m", "s_s", "s_t"}) {
    Rng rng = named_stream(801, "acceptance-bench");
    auto model = EncoderModel<float>::init(desk_shape(tag, 2048, 64), rng);
    auto rep = run_benchmark(model, cfg, tag);
    if (std::abs(rep.throughput * rep.seconds_per_batch - double(cfg.batch_size)) >
        1e-9 * cfg.batch_size)
      identity_ok = false;
    reports.push_back(rep);
  }

  bool ordering_ok = true;
  for (size_t i = 0; i + 1 < reports.size(); ++i)
    if (!(reports[i].throughput < reports[i + 1].throughput)) ordering_ok = false;

  const bool self_ok = speedup_vs_baseline(reports[0], reports[0]) == 1.0;

  std::string detail = "samples/s ";
  for (const auto& r : reports) detail += fmt("%s %.0f ", r.model_tag.c_str(), r.throughput);
  detail += fmt("| vs teacher %s %s %s | self x1.0",
                format_speedup(speedup_vs_baseline(reports[1], reports[0])).c_str(),
                format_speedup(speedup_vs_baseline(reports[2], reports[0])).c_str(),
                format_speedup(speedup_vs_baseline(reports[3], reports[0])).c_str());
  h.report(8, "benchmark identities", identity_ok && ordering_ok && self_ok, detail,
           seconds_since(t0));
}

// ------------------------------------------------------------------ 9 ----

void criterion_analytics(Harness& h) {
  const auto t0 = Clock::now();

  struct ReferenceRow {
    const char* country;
    std::int64_t requests;
    std::int64_t offers;
    double reference_ro;
  };
  const std::vector<ReferenceRow> reference = {
      {"IND", 143300, 39200, 3.65}, {"ZAF", 5800, 3100, 1.88},
      {"PAK", 3900, 2100, 1.85},    {"NGA", 8000, 4800, 1.66},
      {"PHL", 3000, 2300, 1.29},    {"GBR", 32100, 25100, 1.27},
      {"AUS", 2600, 2200, 1.17},    {"USA", 76800, 77800, 0.99},
      {"IRL", 19000, 2200, 0.84},   {"CAN", 6800, 9600, 0.72}};

  std::vector<RawRecord> records;
  std::int64_t total_requests = 0, total_offers = 0;
  std::int64_t id = 0;
  for (const auto& row : reference) {
    total_requests += row.requests;
    total_offers += row.offers;
    for (std::int64_t i = 0; i < row.requests; ++i) {
      RawRecord r;
      r.id = std::to_string(id++);
      r.label = Label::Request;
      r.country = row.country;
      records.push_back(std::move(r));
    }
    for (std::int64_t i = 0; i < row.offers; ++i) {
      RawRecord r;
      r.id = std::to_string(id++);
      r.label = Label::Offer;
      r.country = row.country;
      records.push_back(std::move(r));
    }
  }

  auto table = ro_ratio(records, GroupBy::Country);

  int within = 0;
  bool ireland_flagged = false;
  bool india_usa_ok = true;
  std::int64_t sum_requests = 0, sum_offers = 0;
  for (const auto& row : table) {
    sum_requests += row.requests;
    sum_offers += row.offers;
    const auto pub =
        std::find_if(reference.begin(), reference.end(),
                     [&](const ReferenceRow& p) { return p.country == row.region; });
    const double delta = std::abs(row.ratio - pub->reference_ro);
    if (delta <= 0.02) ++within;
    if (row.region == "IRL") {
      // the reference 0.84 contradicts its own counts (19k / 2.2k = 8.64)
      ireland_flagged = delta > 0.02;
      std::printf("       note: IRL counts give %.2f vs reference 0.84 -> flagged, not "
                  "matched\n",
                  row.ratio);
    }
    if (row.region == "IND" && std::abs(row.ratio - 3.65) > 0.02) india_usa_ok = false;
    if (row.region == "USA" && std::abs(row.ratio - 0.99) > 0.02) india_usa_ok = false;
  }
  const bool sums_ok = sum_requests == total_requests && sum_offers == total_offers;

  h.report(9, "analytics reproduction",
           within >= 8 && ireland_flagged && india_usa_ok && sums_ok,
           fmt("%d/10 ratios within 0.02, Ireland flagged, totals %lld/%lld exact", within,
               (long long)sum_requests, (long long)sum_offers),
           seconds_since(t0));
}

// ----------------------------------------------------------------- 10 ----

std::string fuzz_string(Rng& rng) {
  static const std::string ascii = "abcdefghij @&#;:/.xyz_019\"'<>-";
  static const std::vector<std::string> fragments = {
      "https://t.co/", "http://", "@user", "@", "&amp;", "&lt;", "&#64;", "&zzz;",
      "\n", "\t", "  ", "\xF0\x9F\x99\x82", "\xE2\x9D\xA4\xEF\xB8\x8F",
      "\xF0\x9F\xA7\xBF", "HTTPURL", "@USER", "&#x1F642;", "\xC2\xA0"};
  std::string out;
  const int pieces = int(rng.next_below(12));
  for (int i = 0; i < pieces; ++i) {
    if (rng.next_double() < 0.5) {
      out += fragments[rng.next_below(fragments.size())];
    } else {
      const int len = 1 + int(rng.next_below(6));
      for (int k = 0; k < len; ++k) out += ascii[rng.next_below(ascii.size())];
    }
  }
  return out;
}

void criterion_preprocessing(Harness& h) {
  const auto t0 = Clock::now();

  int mismatches = 0;
  for (const auto& [input, expected] : testdata::normalization_cases())
    if (normalize_text(input).text != expected) ++mismatches;
  const bool corpus_ok = mismatches == 0 && testdata::normalization_cases().size() >= 50;

  int idempotence_failures = 0;
  Rng rng(1010);
  for (int i = 0; i < 10000; ++i) {
    const std::string raw = fuzz_string(rng);
    const std::string once = normalize_text(raw).text;
    if (normalize_text(once).text != once) ++idempotence_failures;
  }

  h.report(10, "preprocessing", corpus_ok && idempotence_failures == 0,
           fmt("%zu cases byte-exact, %d/10000 fuzz idempotence failures",
               testdata::normalization_cases().size(), idempotence_failures),
           seconds_since(t0));
}

}  // namespace

int main() {
  Harness h;
  criterion_gradients(h);
  criterion_agreement(h);
  criterion_sample_size(h);
  criterion_kappa(h);
  {
    TaskWorld world(2000);
    criterion_finetune(h, world);
    criterion_task_distill(h, world);
  }
  criterion_generic_distill(h);
  criterion_bench(h);
  criterion_analytics(h);
  criterion_preprocessing(h);

  if (h.failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria failed\n", h.failures);
  return 1;
}
