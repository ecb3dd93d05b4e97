#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "stepeval/error.hpp"
#include "stepeval/prompt.hpp"

using namespace stepeval;

namespace {

QuestionRecord rec(std::string id, std::string question, std::vector<std::string> steps, std::string answer) {
  return {std::move(id), Subject::physics, std::move(question), std::move(steps), std::move(answer), std::nullopt};
}

const QuestionRecord kBall = rec("ball",
                                 "A ball is thrown vertically upwards with an initial velocity of 20 m/s. Calculate the "
                                 "maximum height reached by the ball. Assume g = 9.8 m/s^2 .",
                                 {"v^2 = u^2 - 2gh", "h = 400/19.6"}, "h = 20.41 m");
const std::vector<QuestionRecord> kProjectiles = {
    rec("stone", "A stone is thrown vertically upwards with an initial velocity of 15 m/s. Calculate the maximum height reached by the stone.",
        {"h = 225/19.6"}, "h = 11.48 m"),
    rec("arrow", "An arrow is shot vertically upwards with an initial velocity of 25 m/s. Calculate the maximum height reached by the arrow.",
        {"h = 625/19.6"}, "h = 31.89 m"),
    rec("rocket", "A rocket is launched vertically upwards with an initial velocity of 30 m/s. Calculate the maximum height reached by the rocket.",
        {"h = 900/19.6"}, "h = 45.92 m"),
};

const QuestionRecord kCar = rec("car",
                                "A car accelerates from rest at a constant rate of 2 m/s^2 . Calculate the time it takes "
                                "to reach a velocity of 20 m/s .",
                                {"v = u + at"}, "t = 10 s");

const QuestionRecord kBlock = rec("block5",
                                  "A 5 kg block slides down a frictionless inclined plane with an angle of 30 degrees. "
                                  "Calculate the speed of the block after sliding 2 meters.",
                                  {"F = mg sin(30 degrees)"}, "v = 4.43 m/s");
const std::vector<QuestionRecord> kBlocks = {
    rec("block3", "A 3 kg block slides down a frictionless inclined plane with an angle of 45 degrees. Calculate the speed of the block after sliding 1 meter.",
        {"a"}, "v = 3.72 m/s"),
    rec("block4", "A 4 kg block slides down a frictionless inclined plane with an angle of 60 degrees. Calculate the speed of the block after sliding 1.5 meters.",
        {"b"}, "v = 5.05 m/s"),
    rec("block6", "A 6 kg block slides down a frictionless inclined plane with an angle of 30 degrees. Calculate the speed of the block after sliding 2.5 meters.",
        {"c"}, "v = 4.95 m/s"),
};

constexpr std::string_view kRecall = "Recall relevant exemplars and solve the question";

}  // namespace

TEST_CASE("k-shot prompt numbers its exemplars") {
  const auto p = render_kshot_cot(kBall, kProjectiles);
  CHECK(p.exemplar_ids == std::vector<std::string>{"stone", "arrow", "rocket"});
  CHECK(p.strategy.kind == StrategyKind::kshot_cot);
  CHECK(p.strategy.k == 3);
  CHECK(p.text.starts_with("1. " + kProjectiles[0].question + "\n"));
  CHECK(p.text.find("\n\n2. " + kProjectiles[1].question + "\n") != std::string::npos);
  CHECK(p.text.find("\n\n3. " + kProjectiles[2].question + "\n") != std::string::npos);
  CHECK(p.text.find("Steps:\n- h = 225/19.6\nAnswer: h = 11.48 m") != std::string::npos);
  CHECK(p.text.ends_with("Question: " + kBall.question));
  CHECK(p.text.find(kBall.final_answer) == std::string::npos);
}

TEST_CASE("analogical prompt is the bare recall sentence") {
  const auto p = render_analogical(kCar);
  CHECK(p.text == std::string(kRecall) + ": \"" + kCar.question + "\"");
  CHECK(p.exemplar_ids.empty());
  CHECK(p.strategy.self_examples == kDefaultSelfExamples);

  const auto counted = render_analogical(kCar, 5);
  CHECK(counted.text.starts_with("Recall 5 relevant exemplars"));
  CHECK(counted.strategy.self_examples == 5);
  CHECK_THROWS_AS(render_analogical(kCar, 0), ValidationError);
}

TEST_CASE("analogical CoT prompt: three numbered lines then the recall sentence") {
  const auto p = render_analogical_cot(kBlock, kBlocks, 3);
  const std::string expected =
      "1. " + kBlocks[0].question + "\n2. " + kBlocks[1].question + "\n3. " + kBlocks[2].question + "\n" +
      std::string(kRecall) + ": \"" + kBlock.question + "\"";
  CHECK(p.text == expected);
  CHECK(p.strategy.kind == StrategyKind::analogical_cot);
  CHECK(p.strategy.k == 3);
  CHECK(p.strategy.self_examples == 3);
}

TEST_CASE("baseline prompt") {
  const auto p = render_baseline(kCar);
  CHECK(p.text.find(kCar.question) != std::string::npos);
  CHECK(p.exemplar_ids.empty());
  CHECK(p.text.find("Recall") == std::string::npos);
}

TEST_CASE("render_prompt validates the strategy") {
  CHECK_THROWS_AS(render_prompt(PromptStrategy::kshot(0), kBall, {}, false), ValidationError);
  CHECK_THROWS_AS(render_prompt(PromptStrategy::kshot(2), kBall, kProjectiles, false), ValidationError);
  CHECK_THROWS_AS(render_prompt({StrategyKind::baseline_zero_shot, 1, 0}, kBall, std::span(kProjectiles).first(1), false),
                  ValidationError);
  CHECK_THROWS_AS(render_prompt(PromptStrategy::analogical(0), kBall, {}, false), ValidationError);
  CHECK(render_prompt(PromptStrategy::kshot(3), kBall, kProjectiles, false) == render_kshot_cot(kBall, kProjectiles));
  const auto counted = render_prompt(PromptStrategy::analogical(4), kCar, {}, true);
  CHECK(counted.text.starts_with("Recall 4 relevant"));
  const auto bare = render_prompt(PromptStrategy::analogical(4), kCar, {}, false);
  CHECK(bare.text.starts_with(kRecall));
  CHECK(bare.strategy.self_examples == 4);
}

TEST_CASE("target among exemplars is rejected") {
  std::vector<QuestionRecord> with_target = kProjectiles;
  with_target[1] = kBall;
  CHECK_THROWS_AS(render_kshot_cot(kBall, with_target), ValidationError);
}

TEST_CASE("exemplar selection") {
  std::vector<QuestionRecord> pool = kProjectiles;
  pool.push_back(kCar);
  pool.insert(pool.end(), kBlocks.begin(), kBlocks.end());
  pool.push_back(kBall);

  const auto picked = select_exemplars(kBall, pool, 3, 1);
  REQUIRE(picked.size() == 3);
  for (const auto& r : picked) {
    CHECK(r.id != kBall.id);
    CHECK((r.id == "stone" || r.id == "arrow" || r.id == "rocket"));
  }
  CHECK(select_exemplars(kBall, pool, 3, 1) == picked);
  CHECK(select_exemplars(kBall, pool, 0, 1).empty());
  CHECK_THROWS_AS(select_exemplars(kBall, pool, 9, 1), ValidationError);

  const auto blocks = select_exemplars(kBlock, pool, 3, 1);
  for (const auto& r : blocks) CHECK(r.id.starts_with("block"));
}

TEST_CASE("exemplar index can skip records with the target's question") {
  QuestionRecord twin = kBall;
  twin.id = "twin";
  const ExemplarIndex index({twin, kProjectiles[0], kProjectiles[1]});
  ExemplarIndex::Options options;
  options.exclude_same_question = true;
  const auto picked = index.select(kBall, 2, 0, options);
  for (const auto& r : picked) CHECK(r.id != "twin");
  CHECK(index.select(kBall, 1, 0).front().id == "twin");
}

TEST_CASE("templates file overrides sections") {
  std::istringstream in("[[baseline]]\nQ: {question}\n[[analogical]]\nThink of similar problems, then solve: {question}\n");
  const auto t = PromptTemplates::parse(in);
  CHECK(t.baseline == "Q: {question}");
  CHECK(t.kshot_target == PromptTemplates::defaults().kshot_target);
  CHECK(render_baseline(kCar, t).text == "Q: " + kCar.question);

  std::istringstream bad("[[baseline]]\n{nonsense}\n");
  CHECK_THROWS_AS(PromptTemplates::parse(bad), ValidationError);
  std::istringstream unknown("[[nope]]\ntext\n");
  CHECK_THROWS_AS(PromptTemplates::parse(unknown), ValidationError);
}

TEST_CASE("placeholder text inside a question is not expanded") {
  const QuestionRecord tricky = rec("t", "What is {steps} here?", {"one"}, "two");
  const auto p = render_baseline(tricky);
  CHECK(p.text.find("What is {steps} here?") != std::string::npos);
}

TEST_CASE("strategy names") {
  CHECK(parse_strategy_kind("kshot") == StrategyKind::kshot_cot);
  CHECK(parse_strategy_kind("analogical-cot") == StrategyKind::analogical_cot);
  CHECK_THROWS_AS(parse_strategy_kind("zero"), ValidationError);
}
