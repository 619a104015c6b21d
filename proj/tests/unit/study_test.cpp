#include <floweval/study.hpp>

#include <floweval/image.hpp>
#include <floweval/oracle.hpp>

#include "fixtures.hpp"

#include <doctest.h>
#include <json.hpp>

#include <memory>
#include <set>
#include <string>
#include <vector>

using namespace floweval;
using namespace floweval::agreement;

namespace {

struct World {
  std::vector<StudyItem> corpus;
  std::vector<fixtures::Chart> truths;
  std::vector<fixtures::Chart> generations;
  std::shared_ptr<backends::OracleUniverse> universe = std::make_shared<backends::OracleUniverse>();

  void add(const std::string& id, std::uint64_t seed, std::size_t size, std::size_t deletions,
           std::size_t fabrications) {
    fixtures::Chart gt = fixtures::make_chart(seed, size);
    fixtures::Chart gen = gt;
    if (deletions > 0) gen = fixtures::delete_nodes(gen, deletions, seed + 1);
    if (fabrications > 0) gen = fixtures::fabricate_elements(gen, fabrications);
    fixtures::check_separation({&gt.elements, &gen.elements});

    ImageRef image = image_from_bytes(gt.source, id + ".png");
    universe->add(image, gt.elements);
    corpus.push_back({id, image, gt.source, gen.source, ""});
    truths.push_back(std::move(gt));
    generations.push_back(std::move(gen));
  }

  backends::OcrClient ocr_client() const {
    return backends::OcrClient(backends::oracle_ocr_backend(universe), backends::BackendConfig{});
  }
  backends::VeClient ve_client() const {
    return backends::VeClient(backends::oracle_ve_backend(universe), backends::BackendConfig{});
  }
};

double expected_recall(const ElementSet& gt, const ElementSet& gen) {
  std::multiset<std::string> pool(gen.text_pool.begin(), gen.text_pool.end());
  std::size_t matched = 0;
  for (const std::string& text : gt.text_pool) {
    auto it = pool.find(text);
    if (it == pool.end()) continue;
    pool.erase(it);
    ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(gt.text_pool.size());
}

double expected_precision(const ElementSet& gt, const ElementSet& gen) {
  const auto canon = gt.canonical();
  std::set<std::string> members(canon.begin(), canon.end());
  std::size_t entailed = 0;
  for (const Element& e : gen.elements)
    if (members.count(e.canonical)) ++entailed;
  return static_cast<double>(entailed) / static_cast<double>(gen.size());
}

}  // namespace

TEST_SUITE("study") {
  TEST_CASE("zero-noise study reproduces the closed-form scores") {
    World world;
    world.add("item-0", 101, 20, 0, 0);
    world.add("item-1", 102, 24, 1, 0);
    world.add("item-2", 103, 30, 2, 1);
    world.add("item-3", 104, 36, 3, 0);
    world.add("item-4", 105, 18, 1, 2);

    auto ocr = world.ocr_client();
    auto ve = world.ve_client();
    StudyResult result = run_validation_study(world.corpus, ocr, ve);

    CHECK(result.attempted == 5);
    CHECK(result.failures == 0);
    CHECK(!result.degraded);
    REQUIRE(result.rows.size() == 5);

    for (std::size_t i = 0; i < 5; ++i) {
      const StudyRow& row = result.rows[i];
      CHECK(row.id == world.corpus[i].id);
      REQUIRE(!row.failed);
      const ElementSet& gt = world.truths[i].elements;
      const ElementSet& gen = world.generations[i].elements;
      double want_recall = expected_recall(gt, gen);
      double want_precision = expected_precision(gt, gen);
      REQUIRE(row.report.recall_ocr.has_value());
      REQUIRE(row.recall_actual_text.has_value());
      CHECK(*row.report.recall_ocr == doctest::Approx(want_recall).epsilon(1e-15));
      CHECK(*row.recall_actual_text == doctest::Approx(want_recall).epsilon(1e-15));
      REQUIRE(row.report.precision_ve.has_value());
      REQUIRE(row.report.precision_actual.has_value());
      CHECK(*row.report.precision_ve == doctest::Approx(want_precision).epsilon(1e-15));
      CHECK(*row.report.precision_actual == doctest::Approx(want_precision).epsilon(1e-15));
    }

    const AgreementReport* recall = result.find_series("recall");
    const AgreementReport* precision = result.find_series("precision");
    const AgreementReport* f1 = result.find_series("f1");
    REQUIRE(recall);
    REQUIRE(precision);
    REQUIRE(f1);
    CHECK(recall->n == 5);
    CHECK(precision->n == 5);
    CHECK(f1->n == 5);
    CHECK(*recall->rmse == 0.0);
    CHECK(*recall->mae == 0.0);
    CHECK(*precision->rmse == 0.0);
    CHECK(*precision->mae == 0.0);
    REQUIRE(recall->pearson_r.has_value());
    CHECK(*recall->pearson_r == doctest::Approx(1.0));
    CHECK(*recall->kendall_tau == doctest::Approx(1.0));
    CHECK(*precision->pearson_r == doctest::Approx(1.0));
    CHECK(*f1->rmse > 0.0);

    REQUIRE(result.ocr_component.micro_f1.has_value());
    CHECK(*result.ocr_component.micro_f1 == doctest::Approx(1.0));
    REQUIRE(result.ve_component.micro_f1.has_value());
    CHECK(*result.ve_component.micro_f1 == doctest::Approx(1.0));
    REQUIRE(result.ve_component.fpr.has_value());
    REQUIRE(result.ve_component.fnr.has_value());
    CHECK(*result.ve_component.fpr == 0.0);
    CHECK(*result.ve_component.fnr == 0.0);

    std::size_t total_generated = 0;
    for (const auto& gen : world.generations) total_generated += gen.elements.size();
    CHECK(result.ve_component.n == total_generated);
  }

  TEST_CASE("identity corpus saturates every series") {
    World world;
    world.add("a", 201, 16, 0, 0);
    world.add("b", 202, 22, 0, 0);
    world.add("c", 203, 28, 0, 0);

    auto ocr = world.ocr_client();
    auto ve = world.ve_client();
    StudyResult result = run_validation_study(world.corpus, ocr, ve);

    for (const char* name : {"recall", "precision", "f1"}) {
      const AgreementReport* series = result.find_series(name);
      REQUIRE(series);
      CHECK(series->n == 3);
      CHECK(*series->rmse == 0.0);
      CHECK(!series->pearson_r.has_value());
      CHECK(series->has_flag(kFlagConstantSeries));
      CHECK(series->has_flag(kFlagAllTied));
    }
  }

  TEST_CASE("rows come back sorted by id") {
    World world;
    world.add("charlie", 301, 14, 0, 0);
    world.add("alpha", 302, 14, 1, 0);
    world.add("bravo", 303, 14, 0, 1);

    auto ocr = world.ocr_client();
    auto ve = world.ve_client();
    StudyResult result = run_validation_study(world.corpus, ocr, ve);
    REQUIRE(result.rows.size() == 3);
    CHECK(result.rows[0].id == "alpha");
    CHECK(result.rows[1].id == "bravo");
    CHECK(result.rows[2].id == "charlie");
  }

  TEST_CASE("item failures are recorded and excluded from the statistics") {
    World world;
    world.add("good-0", 401, 18, 1, 0);
    world.add("good-1", 402, 20, 0, 1);

    StudyItem unloadable;
    unloadable.id = "missing";
    unloadable.load_error = "open failed: no such file";
    world.corpus.push_back(unloadable);

    StudyItem bad_gt;
    bad_gt.id = "broken-gt";
    bad_gt.ground_truth_source = "flowchart TD\n    A[\"never closed\n";
    bad_gt.generated_source = "flowchart TD\n    A[\"x\"]\n    B[\"y\"]\n    A --> B\n";
    world.corpus.push_back(bad_gt);

    auto ocr = world.ocr_client();
    auto ve = world.ve_client();
    StudyResult result = run_validation_study(world.corpus, ocr, ve);

    CHECK(result.attempted == 4);
    CHECK(result.failures == 2);
    CHECK(result.degraded);

    const StudyRow* missing = nullptr;
    const StudyRow* broken = nullptr;
    for (const StudyRow& row : result.rows) {
      if (row.id == "missing") missing = &row;
      if (row.id == "broken-gt") broken = &row;
    }
    REQUIRE(missing);
    REQUIRE(broken);
    CHECK(missing->failed);
    CHECK(missing->error == "open failed: no such file");
    CHECK(broken->failed);
    CHECK(!broken->error.empty());

    const AgreementReport* recall = result.find_series("recall");
    REQUIRE(recall);
    CHECK(recall->n == 2);

    std::string csv = study_rows_to_csv(result);
    CHECK(csv.find("missing,,,,,,,item_failed\n") != std::string::npos);

    std::string json = study_to_json(result);
    auto doc = nlohmann::json::parse(json);
    CHECK(doc["failures"] == 2);
    CHECK(doc["degraded"] == true);
  }

  TEST_CASE("degradation needs more than the configured failure ratio") {
    World world;
    world.add("g0", 501, 14, 0, 0);
    world.add("g1", 502, 14, 1, 0);
    world.add("g2", 503, 16, 0, 0);
    world.add("g3", 504, 16, 0, 1);
    StudyItem unloadable;
    unloadable.id = "zz-missing";
    unloadable.load_error = "open failed";
    world.corpus.push_back(unloadable);

    auto ocr = world.ocr_client();
    auto ve = world.ve_client();
    StudyResult result = run_validation_study(world.corpus, ocr, ve);
    CHECK(result.failures == 1);
    CHECK(!result.degraded);  // 1 of 5 is exactly the 0.2 default, not above it
  }

  TEST_CASE("lenient ground-truth mode tolerates what strict rejects") {
    World world;
    world.add("solid", 601, 15, 0, 0);

    StudyItem wobbly;
    wobbly.id = "wobbly";
    wobbly.image = image_from_bytes("wobbly bytes", "wobbly.png");
    wobbly.ground_truth_source = "flowchart TD\n    A[\"never closed\n";
    wobbly.generated_source = "flowchart TD\n    A[\"x\"]\n";
    world.corpus.push_back(wobbly);

    auto ocr = world.ocr_client();
    auto ve = world.ve_client();

    StudyResult strict_run = run_validation_study(world.corpus, ocr, ve);
    CHECK(strict_run.failures == 1);

    StudyOptions lenient;
    lenient.ground_truth_mode = mermaid::ParseMode::lenient;
    StudyResult lenient_run = run_validation_study(world.corpus, ocr, ve, lenient);
    CHECK(lenient_run.failures == 0);
  }

  TEST_CASE("outputs are deterministic across worker counts") {
    World world;
    world.add("w0", 701, 18, 0, 0);
    world.add("w1", 702, 22, 2, 0);
    world.add("w2", 703, 26, 1, 1);
    world.add("w3", 704, 20, 0, 2);
    world.add("w4", 705, 24, 1, 0);
    world.add("w5", 706, 16, 0, 0);

    auto ocr = world.ocr_client();
    auto ve = world.ve_client();

    StudyOptions serial;
    serial.workers = 1;
    StudyOptions wide;
    wide.workers = 4;

    std::string a = study_to_json(run_validation_study(world.corpus, ocr, ve, serial));
    std::string b = study_to_json(run_validation_study(world.corpus, ocr, ve, wide));
    CHECK(a == b);
    std::string csv = study_rows_to_csv(run_validation_study(world.corpus, ocr, ve, wide));
    CHECK(csv == study_rows_to_csv(run_validation_study(world.corpus, ocr, ve, serial)));
  }

  TEST_CASE("csv and table carry the frozen layout") {
    World world;
    world.add("only", 801, 15, 0, 0);
    auto ocr = world.ocr_client();
    auto ve = world.ve_client();
    StudyResult result = run_validation_study(world.corpus, ocr, ve);

    std::string csv = study_rows_to_csv(result);
    CHECK(csv.rfind("id,recall_ocr,recall_actual,precision_ve,precision_actual,f1_ocr_ve,"
                    "f1_actual,flags\n",
                    0) == 0);
    CHECK(csv.find("only,1,1,1,1,1,1,\n") != std::string::npos);

    std::string table = study_summary_table(result);
    CHECK(table.find("series") != std::string::npos);
    CHECK(table.find("recall") != std::string::npos);
    CHECK(table.find("precision") != std::string::npos);
    CHECK(table.find("micro_f1=1.000") != std::string::npos);

    auto doc = nlohmann::json::parse(study_to_json(result));
    REQUIRE(doc["series"].is_array());
    CHECK(doc["series"].size() == 3);
    CHECK(doc["series"][0]["series"] == "recall");
    CHECK(doc["rows"][0]["id"] == "only");
    CHECK(doc["rows"][0]["recall_ocr"] == 1.0);
    // An identity corpus has no absent elements, so the false-positive rate
    // has an empty denominator; the false-negative rate is a real 0.
    CHECK(doc["ve_component"]["fpr"].is_null());
    CHECK(doc["ve_component"]["fnr"] == 0.0);
  }
}
