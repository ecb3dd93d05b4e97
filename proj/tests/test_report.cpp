#include <doctest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "stepeval/error.hpp"
#include "stepeval/harness.hpp"
#include "stepeval/io.hpp"

using namespace stepeval;

namespace {

ExperimentReport ten_outcomes() {
  ExperimentReport report;
  report.config = {{"run_seed", 1}};
  report.strategy_label = "kshot_cot k=3";
  report.model_name = "mistral-7b";
  for (int i = 1; i <= 10; ++i) {
    QuestionOutcome q;
    q.question_id = std::to_string(i);
    q.prompt.text = "prompt " + q.question_id;
    q.prompt.strategy = PromptStrategy::kshot(3);
    q.prompt.exemplar_ids = {"a", "b", "c"};
    q.prompt.target_id = q.question_id;
    const double s = 0.1 * i;
    q.attempts.push_back({"text, with \"quotes\"\nand newline", s, 12, std::nullopt});
    if (i % 4 == 0) {
      q.discarded = true;
    } else {
      q.final_text = q.attempts.back().text;
      MetricReport m;
      m.rouge1 = make_prf(s, s / 2);
      m.rouge2 = make_prf(s / 3, s / 5);
      m.rougeL = make_prf(s / 7, s / 11);
      m.meteor = s * s;
      m.tfidf_cosine = 1.0 / (1.0 + i);
      if (i % 2 == 1) m.embed_f1 = s / 13;
      q.metrics = m;
    }
    report.per_question.push_back(q);
  }
  aggregate(report);
  return report;
}

}  // namespace

TEST_CASE("aggregation") {
  const auto r = ten_outcomes();
  CHECK(r.discard_rate == doctest::Approx(0.2));
  CHECK(r.scored_count == 8);
  CHECK(r.aggregates.at("meteor").count == 8);
  CHECK(r.aggregates.at("embed_f1").count == 5);
  CHECK_FALSE(r.accuracy);
}

TEST_CASE("structured dump round-trips exactly") {
  const auto r = ten_outcomes();
  const auto again = report_from_json(nlohmann::json::parse(report_to_json(r).dump()));
  CHECK(again.aggregates == r.aggregates);
  CHECK(again.per_question == r.per_question);
  CHECK(again.discard_rate == r.discard_rate);
  CHECK(report_to_json(again).dump() == report_to_json(r).dump());
}

TEST_CASE("human labels") {
  SUBCASE("all true") {
    std::istringstream labels("id,label\n1,true\n2,true\n3,TRUE\n");
    const auto r = import_human_labels(ten_outcomes(), labels);
    CHECK(r.accuracy == 1.0);
    CHECK(r.labeled_count == 3);
  }
  SUBCASE("five of ten") {
    std::string text;
    for (int i = 1; i <= 10; ++i) text += std::to_string(i) + (i <= 5 ? ",true\n" : ",false\n");
    std::istringstream labels(text);
    const auto r = import_human_labels(ten_outcomes(), labels);
    CHECK(r.accuracy == 0.5);
    CHECK(r.labeled_count == 10);
  }
  SUBCASE("unknown id") {
    std::istringstream labels("1,true\n99,false\n");
    try {
      import_human_labels(ten_outcomes(), labels);
      FAIL("expected an error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("'99'") != std::string::npos);
    }
  }
  SUBCASE("duplicate id") {
    std::istringstream labels("1,true\n1,false\n");
    CHECK_THROWS_AS(import_human_labels(ten_outcomes(), labels), ValidationError);
  }
  SUBCASE("bad value") {
    std::istringstream labels("1,maybe\n");
    CHECK_THROWS_AS(import_human_labels(ten_outcomes(), labels), ValidationError);
  }
}

TEST_CASE("tabular output") {
  const auto r = ten_outcomes();
  const std::string csv = per_question_csv(r);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header.starts_with("id,discarded,attempts,gate_similarity,rouge1_precision"));
  std::size_t discarded = 0;
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) {
    ++rows;
    const auto first = line.find(',');
    if (line.compare(first + 1, 5, "true,") == 0) ++discarded;
  }
  CHECK(rows == 10);
  CHECK(static_cast<double>(discarded) / static_cast<double>(rows) == r.discard_rate);

  const ExperimentReport reports[] = {r, r};
  const std::string summary = summary_csv(reports);
  CHECK(summary.starts_with("strategy,model,questions,scored,discard_rate,labeled,accuracy,"));
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 3);
  CHECK(summary.find("kshot_cot k=3,mistral-7b,10,8,0.2,0,,") != std::string::npos);
}

TEST_CASE("emit_report writes files") {
  const auto dir = testutil::scratch_dir("emit");
  const auto r = ten_outcomes();
  const auto structured = emit_report(r, ReportFormat::structured, dir);
  REQUIRE(structured.size() == 1);
  CHECK(structured[0].filename() == "report.json");
  const auto tabular = emit_report(r, ReportFormat::tabular, dir);
  REQUIRE(tabular.size() == 2);
  CHECK(std::filesystem::exists(dir / "report.csv"));
  CHECK(std::filesystem::exists(dir / "summary.csv"));
  CHECK(load_report(dir / "report.json").aggregates == r.aggregates);
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
  }
}

TEST_CASE("sweep table has one row per k") {
  const auto r = ten_outcomes();
  const std::vector<SweepEntry> sweep = {{1, r}, {3, r}, {6, r}, {8, r}};
  const auto csv = sweep_csv(sweep);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.starts_with("k,questions,scored,discard_rate,accuracy,"));
}

TEST_CASE("unwritable output is an io error") {
  const auto dir = testutil::scratch_dir("unwritable");
  std::ofstream(dir / "blocker") << "x";
  CHECK_THROWS_AS(emit_report(ten_outcomes(), ReportFormat::structured, dir / "blocker" / "sub"), IoError);
}

TEST_CASE("malformed report file") {
  const auto dir = testutil::scratch_dir("bad-report");
  std::ofstream(dir / "r.json") << "{\"config\": {}}";
  CHECK_THROWS_AS(load_report(dir / "r.json"), ValidationError);
}
