// End-to-end walkthrough on synthetic data: normalize + tokenize a small
// corpus, train a teacher classifier, distill a smaller student from its
// logits, and compare inference speed. Runs in about a minute on a laptop.

#include <iostream>

#include "crisiskit/bench.hpp"
#include "crisiskit/distill.hpp"
#include "crisiskit/finetune.hpp"

using namespace crisiskit;

namespace {

std::vector<RawRecord> tiny_task(int n) {
  static const char* marker[4][2] = {{"need", "asap"},
                                     {"offering", "donate"},
                                     {"need", "offering"},
                                     {"weather", "chat"}};
  static const char* filler[] = {"the", "a", "in", "city", "today"};
  Rng rng(7);
  std::vector<RawRecord> out;
  for (int i = 0; i < n; ++i) {
    const int cls = i % 4;
    std::string text = std::string(marker[cls][rng.next_below(2)]);
    text += " " + std::string(marker[cls][rng.next_below(2)]);
    for (int w = 0; w < 3; ++w) text += " " + std::string(filler[rng.next_below(5)]);
    out.push_back({.id = "d" + std::to_string(i), .text = text, .label = Label(cls)});
  }
  return out;
}

}  // namespace

int main() {
  const int max_len = 16;
  auto records = tiny_task(400);

  std::vector<CleanText> corpus;
  for (const auto& r : records) corpus.push_back(normalize_text(r.text));
  auto tok = BpeTokenizer::train(corpus, 500);
  std::cout << "tokenizer: " << tok.vocab_size() << " tokens\n";

  auto ds = encode_dataset(tok, records, max_len, true);
  auto splits = split_stratified(ds.labels, SplitSpec{});

  auto teacher_cfg = desk_shape("s_m", tok.vocab_size(), max_len);
  Rng t_init(1);
  auto teacher = Classifier<float>::init(teacher_cfg, t_init);
  FinetuneConfig fcfg;
  fcfg.learning_rate = 3e-3;
  fcfg.max_epochs = 10;
  fcfg.patience = 3;
  auto t_result = finetune_run(teacher, ds, splits, fcfg, 1);
  std::cout << "teacher val F1 " << t_result.best_val_f1 << " (epoch "
            << t_result.best_epoch << ")\n";

  auto student_cfg = desk_shape("s_t", tok.vocab_size(), max_len);
  Rng s_init(2);
  auto student = Classifier<float>::init(student_cfg, s_init);
  TaskDistillConfig dcfg;
  dcfg.learning_rate = 3e-3;
  dcfg.max_epochs = 10;
  dcfg.patience = 3;
  auto d_result = distill_task(teacher, student, ds, splits, dcfg);
  std::cout << "student val F1 " << d_result.best_val_f1 << " vs teacher "
            << t_result.best_val_f1 << "\n";

  BenchConfig bcfg;
  bcfg.batch_size = 16;
  bcfg.iterations = 20;
  bcfg.warmup = 3;
  bcfg.input_length = max_len;
  auto t_bench = run_benchmark(teacher.encoder, bcfg, "teacher");
  auto s_bench = run_benchmark(student.encoder, bcfg, "student");
  std::cout << bench_table({t_bench, s_bench}, &t_bench);
  std::cout << "student speedup: "
            << format_speedup(speedup_vs_baseline(s_bench, t_bench)) << "\n";
  return 0;
}
