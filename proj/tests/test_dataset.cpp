#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "crisiskit/dataset_builder.hpp"
#include "crisiskit/rng.hpp"

using namespace crisiskit;

namespace {

AnnotationMatrix synthetic_matrix(int rows, int annotators, std::uint64_t seed,
                                  double agree_prob) {
  Rng rng(seed);
  AnnotationMatrix m;
  for (int a = 0; a < annotators; ++a)
    m.annotator_names.push_back("annotator_" + std::to_string(a + 1));
  for (int r = 0; r < rows; ++r) {
    m.ids.push_back("t" + std::to_string(r));
    std::vector<std::optional<Label>> row;
    const Label base = Label(rng.next_below(4));
    const bool planted_agree = rng.next_double() < agree_prob;
    for (int a = 0; a < annotators; ++a) {
      if (planted_agree) row.push_back(base);
      else row.push_back(Label(rng.next_below(4)));
    }
    m.cells.push_back(std::move(row));
  }
  return m;
}

// independent brute-force oracle: per row, compare every cell to the first
std::vector<LabelledId> brute_force_scan(const AnnotationMatrix& m) {
  std::vector<LabelledId> out;
  for (size_t r = 0; r < m.rows(); ++r) {
    bool all_same = true;
    for (size_t a = 0; a < m.annotators(); ++a) {
      if (!m.cells[r][a].has_value() || !(*m.cells[r][a] == *m.cells[r][0])) {
        all_same = false;
        break;
      }
    }
    if (all_same) out.push_back({m.ids[r], *m.cells[r][0]});
  }
  return out;
}

bool same_result(const std::vector<LabelledId>& a, const std::vector<LabelledId>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].id != b[i].id || !(a[i].label == b[i].label)) return false;
  return true;
}

}  // namespace

TEST_CASE("agreement filter keeps unanimous rows with their label") {
  AnnotationMatrix m;
  m.annotator_names = {"a1", "a2", "a3", "a4"};
  m.ids = {"keep", "drop"};
  m.cells = {{Label::Request, Label::Request, Label::Request, Label::Request},
             {Label::Request, Label::Request, Label::Request, Label::Offer}};
  auto res = agreement_filter(m);
  REQUIRE(res.agreed.size() == 1);
  CHECK(res.agreed[0].id == "keep");
  CHECK(res.agreed[0].label == Label::Request);
  CHECK(res.dropped == 1);
  CHECK(res.class_counts[Label::Request] == 1);
  CHECK(res.agreed.size() + size_t(res.dropped) == m.rows());
}

TEST_CASE("unparseable annotator output counts as disagreement") {
  AnnotationMatrix m;
  m.annotator_names = {"a1", "a2"};
  m.ids = {"r1"};
  m.cells = {{Label::Offer, std::nullopt}};
  auto res = agreement_filter(m);
  CHECK(res.agreed.empty());
  CHECK(res.dropped == 1);
}

TEST_CASE("agreement filter equals a brute-force scan on 10k rows") {
  auto m = synthetic_matrix(10000, 4, 99, 0.6);
  auto res = agreement_filter(m);
  auto oracle = brute_force_scan(m);
  CHECK(same_result(res.agreed, oracle));
  CHECK(res.agreed.size() + size_t(res.dropped) == m.rows());
}

TEST_CASE("agreement filter is invariant to annotator column order") {
  auto m = synthetic_matrix(500, 4, 123, 0.5);
  auto base = agreement_filter(m);
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<size_t> perm = {0, 1, 2, 3};
    rng.shuffle(perm.begin(), perm.end());
    AnnotationMatrix shuffled = m;
    for (size_t r = 0; r < m.rows(); ++r)
      for (size_t a = 0; a < 4; ++a) shuffled.cells[r][a] = m.cells[r][perm[a]];
    CHECK(same_result(agreement_filter(shuffled).agreed, base.agreed));
  }
}

TEST_CASE("sample size formula") {
  CHECK(sample_size(101000, 0.03, 0.95) == 1056);
  CHECK(sample_size(101000, 0.03, 0.95) >= 1055);
  CHECK(sample_size(101000, 0.03, 0.95) <= 1058);
  CHECK(sample_size(10, 0.03, 0.95) == 10);
  CHECK(sample_size(1000000, 0.99, 0.95) == 1);

  SECTION("monotone in population and margin over a grid") {
    const double z = probit(0.975);
    std::int64_t prev_n = 0;
    for (std::int64_t n_pop : {10LL, 50LL, 100LL, 500LL, 1000LL, 5000LL, 10000LL, 50000LL,
                               100000LL, 1000000LL}) {
      const auto got = sample_size(n_pop, 0.03, 0.95);
      // hand formula
      const double n0 = z * z * 0.25 / (0.03 * 0.03);
      const double fpc = n0 / (1.0 + (n0 - 1.0) / double(n_pop));
      CHECK(got == std::max<std::int64_t>(
                       1, std::min<std::int64_t>(n_pop, std::int64_t(std::ceil(fpc - 1e-9)))));
      CHECK(got >= prev_n);
      prev_n = got;
    }
    std::int64_t prev_e = 1 << 30;
    for (double e : {0.01, 0.02, 0.03, 0.05, 0.08, 0.10, 0.15, 0.25, 0.50, 0.90}) {
      const auto got = sample_size(100000, e, 0.95);
      CHECK(got <= prev_e);
      prev_e = got;
    }
  }
}

TEST_CASE("validation sampling plan forces tiny classes in whole") {
  // class mix shaped like a large agreed set: 80.5k/15.7k/5k/38
  std::vector<LabelledId> records;
  auto add = [&records](Label l, int n) {
    for (int i = 0; i < n; ++i)
      records.push_back({"id" + std::to_string(records.size()), l});
  };
  add(Label::Irrelevant, 80500);
  add(Label::Request, 15700);
  add(Label::Offer, 5000);
  add(Label::RequestAndOffer, 38);

  auto plan = make_sample_plan(records, 0.03, 0.95);
  CHECK(plan.population == 101238);
  CHECK(plan.n >= 1055);
  CHECK(plan.n <= 1058);
  REQUIRE(plan.forced_classes.size() == 1);
  CHECK(plan.forced_classes[0] == Label::RequestAndOffer);

  auto sample = stratified_validation_sample(records, plan, 42);
  CHECK(std::int64_t(sample.size()) <= plan.n + 38);

  std::map<Label, std::int64_t> got;
  for (const auto& r : sample) got[r.label] += 1;
  CHECK(got[Label::RequestAndOffer] == 38);  // all forced rows present

  // non-forced class proportions within one item of the proportional share
  std::map<Label, std::int64_t> counts{{Label::Irrelevant, 80500},
                                       {Label::Request, 15700},
                                       {Label::Offer, 5000},
                                       {Label::RequestAndOffer, 38}};
  auto alloc = largest_remainder_allocation(counts, plan.n);
  for (Label l : {Label::Irrelevant, Label::Request, Label::Offer})
    CHECK(std::abs(got[l] - alloc[l]) <= 1);

  // determinism
  auto sample2 = stratified_validation_sample(records, plan, 42);
  REQUIRE(sample.size() == sample2.size());
  for (size_t i = 0; i < sample.size(); ++i) CHECK(sample[i].id == sample2[i].id);
}

TEST_CASE("single-class population degenerates to a plain sample") {
  std::vector<LabelledId> records;
  for (int i = 0; i < 2000; ++i) records.push_back({"id" + std::to_string(i), Label::Offer});
  auto plan = make_sample_plan(records, 0.05, 0.95);
  CHECK(plan.forced_classes.empty());
  auto sample = stratified_validation_sample(records, plan, 1);
  CHECK(std::int64_t(sample.size()) == plan.n);
}

TEST_CASE("cohens kappa") {
  SECTION("identical vectors with two classes give 1") {
    std::vector<Label> a = {Label::Request, Label::Offer, Label::Request, Label::Offer};
    auto rep = cohens_kappa(a, a);
    CHECK(rep.kappa == Catch::Approx(1.0).margin(1e-15));
    CHECK(rep.p_observed == 1.0);
  }

  SECTION("constructed 2-class confusion 45,5/5,45") {
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
    auto rep = cohens_kappa(a, b);
    CHECK(rep.p_observed == Catch::Approx(0.9).margin(1e-15));
    CHECK(rep.p_expected == Catch::Approx(0.5).margin(1e-15));
    CHECK(rep.kappa == Catch::Approx(0.8).margin(1e-12));
  }

  SECTION("kappa is symmetric") {
    Rng rng(5);
    std::vector<Label> a, b;
    for (int i = 0; i < 300; ++i) {
      a.push_back(Label(rng.next_below(4)));
      b.push_back(Label(rng.next_below(4)));
    }
    CHECK(cohens_kappa(a, b).kappa == Catch::Approx(cohens_kappa(b, a).kappa).margin(1e-15));
  }

  SECTION("a constant rater scores at most zero") {
    Rng rng(6);
    std::vector<Label> a, b;
    for (int i = 0; i < 500; ++i) {
      a.push_back(Label(rng.next_below(4)));
      b.push_back(Label::Irrelevant);
    }
    CHECK(cohens_kappa(a, b).kappa <= 1e-12);
  }

  SECTION("independent uniform labels have kappa near zero") {
    Rng rng(7);
    std::vector<Label> a, b;
    for (int i = 0; i < 10000; ++i) {
      a.push_back(Label(rng.next_below(4)));
      b.push_back(Label(rng.next_below(4)));
    }
    CHECK(std::abs(cohens_kappa(a, b).kappa) < 0.05);
  }

  SECTION("degenerate complete agreement defines kappa as 1") {
    std::vector<Label> a = {Label::Offer, Label::Offer};
    CHECK(cohens_kappa(a, a).kappa == 1.0);
  }

  SECTION("length mismatch throws") {
    std::vector<Label> a = {Label::Offer};
    std::vector<Label> b = {Label::Offer, Label::Offer};
    CHECK_THROWS_WITH(cohens_kappa(a, b), Catch::Matchers::ContainsSubstring("length mismatch"));
  }
}

TEST_CASE("kappa interpretation bands") {
  CHECK(std::string(kappa_band(0.934)) == "almost perfect");
  CHECK(std::string(kappa_band(0.924)) == "almost perfect");
  CHECK(std::string(kappa_band(0.81)) == "almost perfect");
  CHECK(std::string(kappa_band(0.7)) == "substantial");
  CHECK(std::string(kappa_band(0.5)) == "moderate");
  CHECK(std::string(kappa_band(-0.2)) == "poor");
}

TEST_CASE("validation report") {
  std::vector<LabelledId> machine = {{"a", Label::Request},
                                     {"b", Label::Offer},
                                     {"c", Label::Irrelevant},
                                     {"d", Label::Request}};
  SECTION("humans copying the machine labels score kappa 1") {
    auto out = validation_report(machine, {{"h1", machine}, {"h2", machine}});
    REQUIRE(out.size() == 2);
    for (const auto& v : out) {
      CHECK(v.report.kappa == Catch::Approx(1.0).margin(1e-15));
      CHECK(v.band == "almost perfect");
    }
  }
  SECTION("id misalignment is an error") {
    std::vector<LabelledId> bad = {{"a", Label::Request},
                                   {"b", Label::Offer},
                                   {"c", Label::Irrelevant},
                                   {"zz", Label::Request}};
    CHECK_THROWS_WITH(validation_report(machine, {{"h1", bad}}),
                      Catch::Matchers::ContainsSubstring("misalignment"));
    std::vector<LabelledId> short_set = {{"a", Label::Request}};
    CHECK_THROWS_WITH(validation_report(machine, {{"h1", short_set}}),
                      Catch::Matchers::ContainsSubstring("misalignment"));
  }
}

TEST_CASE("annotation matrix csv round trip") {
  namespace fs = std::filesystem;
  const auto path = (fs::temp_directory_path() / "crisiskit_ann.csv").string();
  {
    std::ofstream out(path);
    out << "id,annotator_1,annotator_2,annotator_3,annotator_4\n";
    out << "t1,Request,Request,Request,Request\n";
    out << "t2,Offer,Request and Offer,Offer,Offer\n";
    out << "t3,request_and_offer,Request and Offer,REQUEST AND OFFER,Request and Offer\n";
    out << "t4,Offer,garbage,Offer,Offer\n";
  }
  auto m = AnnotationMatrix::from_csv(path);
  REQUIRE(m.rows() == 4);
  REQUIRE(m.annotators() == 4);
  auto res = agreement_filter(m);
  REQUIRE(res.agreed.size() == 2);
  CHECK(res.agreed[0].id == "t1");
  CHECK(res.agreed[1].id == "t3");
  CHECK(res.agreed[1].label == Label::RequestAndOffer);
  CHECK(res.dropped == 2);
}
