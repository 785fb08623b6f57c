#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "crisiskit/bpe_tokenizer.hpp"
#include "crisiskit/finetune.hpp"
#include "crisiskit/rng.hpp"
#include "synthetic.hpp"

using namespace crisiskit;

TEST_CASE("stratified split on the ten-item two-class example") {
  std::vector<int> labels = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  auto s = split_stratified(labels, SplitSpec{});
  CHECK(s.train.size() == 7);
  CHECK(s.val.size() == 1);
  CHECK(s.test.size() == 2);

  auto count_class = [&labels](const std::vector<size_t>& idx, int c) {
    return std::count_if(idx.begin(), idx.end(), [&](size_t i) { return labels[i] == c; });
  };
  // class balance within one item of the global ratio in every split
  CHECK(std::abs(double(count_class(s.train, 0)) - 3.5) <= 1.0);
  CHECK(std::abs(double(count_class(s.val, 0)) - 0.5) <= 1.0);
  CHECK(std::abs(double(count_class(s.test, 0)) - 1.0) <= 1.0);
}

TEST_CASE("stratified split rejects degenerate inputs") {
  std::vector<int> single(10, 3);
  CHECK_THROWS_WITH(split_stratified(single, SplitSpec{}),
                    Catch::Matchers::ContainsSubstring("two classes"));
  std::vector<int> tiny = {0, 0, 0, 1, 1};
  CHECK_THROWS_WITH(split_stratified(tiny, SplitSpec{}),
                    Catch::Matchers::ContainsSubstring("class too small"));
}

TEST_CASE("stratified split is an exact partition and deterministic per seed") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 30 + int(rng.next_below(400));
    const int k = 2 + int(rng.next_below(3));
    std::vector<int> labels;
    for (int c = 0; c < k; ++c)
      for (int i = 0; i < 3; ++i) labels.push_back(c);  // floor of 3 per class
    while (int(labels.size()) < n) labels.push_back(int(rng.next_below(std::uint64_t(k))));

    SplitSpec spec;
    spec.seed = rng.next_u64();
    auto s = split_stratified(labels, spec);

    std::vector<size_t> all;
    all.insert(all.end(), s.train.begin(), s.train.end());
    all.insert(all.end(), s.val.begin(), s.val.end());
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    REQUIRE(all.size() == labels.size());
    for (size_t i = 0; i < all.size(); ++i) REQUIRE(all[i] == i);  // partition, no overlap

    auto again = split_stratified(labels, spec);
    CHECK(again.train == s.train);
    CHECK(again.val == s.val);
    CHECK(again.test == s.test);

    // per-class proportions within one item of the global ratio
    std::map<int, std::int64_t> class_total;
    for (int l : labels) class_total[l] += 1;
    auto check_balance = [&](const std::vector<size_t>& idx, double frac) {
      std::map<int, std::int64_t> got;
      for (size_t i : idx) got[labels[i]] += 1;
      for (const auto& [c, total] : class_total)
        CHECK(std::abs(double(got[c]) - frac * double(total)) <= 1.0 + 1e-9);
    };
    check_balance(s.train, 0.7);
    check_balance(s.val, 0.1);
    check_balance(s.test, 0.2);
  }
}

TEST_CASE("class weights") {
  std::vector<int> balanced = {0, 0, 1, 1};
  auto w = class_weights(balanced);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == 1.0);

  std::vector<int> skewed = {0, 0, 1};
  w = class_weights(skewed);
  CHECK(w[0] == Catch::Approx(0.75));
  CHECK(w[1] == Catch::Approx(1.5));

  std::vector<int> reordered = {1, 0, 0};
  auto w2 = class_weights(reordered);
  CHECK(w2[0] == w[0]);
  CHECK(w2[1] == w[1]);
}

TEST_CASE("macro f1") {
  std::vector<int> gold = {0, 0, 1, 1};
  std::vector<int> perfect = gold;
  CHECK(macro_f1(perfect, gold) == 1.0);

  std::vector<int> pred = {0, 1, 1, 1};
  CHECK(macro_f1(pred, gold) == Catch::Approx(11.0 / 15.0).epsilon(1e-12));

  std::vector<int> wrong = {1, 1, 0, 0};
  CHECK(macro_f1(wrong, gold) == 0.0);

  SECTION("invariant under relabeling bijections") {
    Rng rng(3);
    std::vector<int> g, p;
    for (int i = 0; i < 200; ++i) {
      g.push_back(int(rng.next_below(4)));
      p.push_back(int(rng.next_below(4)));
    }
    const double base = macro_f1(p, g);
    std::vector<int> perm = {2, 3, 1, 0};
    std::vector<int> g2, p2;
    for (int v : g) g2.push_back(perm[size_t(v)]);
    for (int v : p) p2.push_back(perm[size_t(v)]);
    CHECK(macro_f1(p2, g2) == Catch::Approx(base).margin(1e-12));
  }

  SECTION("a class absent from both sides contributes zero") {
    std::vector<int> g = {0, 0, 1, 1};
    std::vector<int> p = {0, 0, 1, 1};
    CHECK(macro_f1(p, g, {0, 1, 2}) == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
  }

  std::vector<int> shorter = {0};
  CHECK_THROWS_WITH(macro_f1(shorter, gold), Catch::Matchers::ContainsSubstring("length"));
}

TEST_CASE("early stopping rule") {
  SECTION("scripted plateau stops after epoch 7 with best epoch 2") {
    EarlyStopper es(5, 1e-4);
    std::vector<double> seq = {0.5, 0.6, 0.6, 0.6, 0.6, 0.6, 0.6};
    int stopped_after = 0;
    for (size_t i = 0; i < seq.size(); ++i) {
      if (es.observe(seq[i])) {
        stopped_after = int(i) + 1;
        break;
      }
    }
    CHECK(stopped_after == 7);
    CHECK(es.best_epoch() == 2);
    CHECK(es.best() == 0.6);
  }

  SECTION("improvement of exactly the threshold does not reset patience") {
    EarlyStopper es(2, 1e-4);
    CHECK_FALSE(es.observe(0.5));
    CHECK_FALSE(es.observe(0.5 + 1e-4));  // not strictly greater than best+threshold
    CHECK(es.observe(0.5 + 1e-4));
    CHECK(es.best_epoch() == 1);
  }
}

TEST_CASE("confidence interval helper") {
  CHECK(ci95_half_width({0.70, 0.80}) == Catch::Approx(0.6353).margin(5e-4));
  CHECK(ci95_half_width({0.5, 0.5, 0.5}) == 0.0);
  CHECK(ci95_half_width({0.7}) == 0.0);
}

namespace {

struct Fixture {
  TextDataset ds;
  Splits splits;
  BpeTokenizer tok;
  EncoderConfig cfg;

  explicit Fixture(int n)
      : tok(make_tokenizer(n)), cfg(desk_shape("s_t", 8192, 24)) {
    auto records = testdata::separable_records(n, 1234);
    cfg.vocab_size = tok.vocab_size();
    ds = encode_dataset(tok, records, cfg.max_positions, true);
    splits = split_stratified(ds.labels, SplitSpec{});
  }

  static BpeTokenizer make_tokenizer(int n) {
    auto records = testdata::separable_records(n, 1234);
    std::vector<CleanText> corpus;
    for (const auto& r : records) corpus.push_back(normalize_text(r.text));
    return BpeTokenizer::train(corpus, 600);
  }
};

}  // namespace

TEST_CASE("fine-tuning learns a small separable task and restores the best epoch") {
  Fixture fx(240);
  FinetuneConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.max_epochs = 12;
  cfg.patience = 4;
  cfg.batch_size = 16;

  Rng init(11);
  auto clf = Classifier<float>::init(fx.cfg, init);
  auto result = finetune_run(clf, fx.ds, fx.splits, cfg, 11);

  CHECK(result.epochs_run <= cfg.max_epochs);
  CHECK(result.best_epoch <= result.epochs_run);
  CHECK(result.best_val_f1 > 0.8);

  // restored parameters reproduce the reported best validation score
  const double recomputed = evaluate_macro_f1(clf, fx.ds, fx.splits.val, cfg.batch_size);
  CHECK(recomputed == Catch::Approx(result.best_val_f1).margin(1e-12));

  const double test_f1 = evaluate_macro_f1(clf, fx.ds, fx.splits.test, cfg.batch_size);
  CHECK(test_f1 > 0.75);
}

TEST_CASE("weighted loss with unit weights equals unweighted loss bit for bit") {
  Fixture fx(80);  // balanced by construction
  std::vector<int> train_labels;
  for (size_t i : fx.splits.train) train_labels.push_back(fx.ds.labels[i]);
  auto w = class_weights(train_labels);
  for (const auto& [c, ww] : w) REQUIRE(ww == 1.0);

  Rng init(5);
  auto clf = Classifier<float>::init(fx.cfg, init);
  auto batch = gather_batch<float>(fx.ds, std::span<const size_t>(fx.splits.train));
  std::vector<int> labels;
  std::vector<double> weights;
  for (size_t i : fx.splits.train) {
    labels.push_back(fx.ds.labels[i]);
    weights.push_back(w.at(fx.ds.labels[i]));
  }
  auto weighted = num::cross_entropy_loss(clf.logits(batch), labels, weights);
  auto unweighted = num::cross_entropy_loss(clf.logits(batch), labels, {});
  CHECK(weighted->value.data[0] == unweighted->value.data[0]);
}

TEST_CASE("repeat_with_ci aggregates runs") {
  Fixture fx(120);
  FinetuneConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.max_epochs = 4;
  cfg.patience = 3;
  cfg.batch_size = 16;
  cfg.repeats = 2;

  auto report = repeat_with_ci<float>(
      [&fx](std::uint64_t seed) {
        Rng rng(seed);
        return Classifier<float>::init(fx.cfg, rng);
      },
      fx.ds, fx.splits, cfg);

  CHECK(report.per_run_f1.size() == 2);
  CHECK(report.ci_defined);
  CHECK(report.mean_f1 ==
        Catch::Approx((report.per_run_f1[0] + report.per_run_f1[1]) / 2).margin(1e-12));
  CHECK(report.per_class.size() == 4);
  for (double f1 : report.per_run_f1) {
    CHECK(f1 >= 0.0);
    CHECK(f1 <= 1.0);
  }

  cfg.repeats = 1;
  auto single = repeat_with_ci<float>(
      [&fx](std::uint64_t seed) {
        Rng rng(seed);
        return Classifier<float>::init(fx.cfg, rng);
      },
      fx.ds, fx.splits, cfg);
  CHECK_FALSE(single.ci_defined);
  CHECK(single.ci_half_width == 0.0);
}
