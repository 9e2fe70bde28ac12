#include <doctest.h>

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nodality/weaklabel.hpp"

using namespace nodality;

namespace {

LabelingFunction keyword_lf(const std::string& id, const std::string& topic,
                            std::vector<std::string> keywords) {
  return LabelingFunction(id, topic, RuleType::keyword_set, std::move(keywords));
}

LabelingFunction regex_lf(const std::string& id, const std::string& topic,
                          const std::string& pattern) {
  return LabelingFunction(id, topic, RuleType::regex, {pattern});
}

}  // namespace

TEST_CASE("keyword LFs vote on word-boundary matches, case-insensitively") {
  LabelingFunction lf = keyword_lf("lf1", "economy", {"inflation"});
  CHECK(lf.matches("inflation is rising"));
  CHECK(lf.matches("Inflation!"));
  CHECK(lf.matches("about INFLATION today"));
  CHECK(!lf.matches("hello world"));
  CHECK(!lf.matches("reinflationary"));
  CHECK(!lf.matches("inflation_rate"));  // underscore continues the word
  CHECK(lf.matches("(inflation)"));
}

TEST_CASE("keyword phrases must appear as whole contiguous words") {
  LabelingFunction lf = keyword_lf("lf1", "crisis", {"cost of living"});
  CHECK(lf.matches("the cost of living crisis deepens"));
  CHECK(lf.matches("Cost Of Living"));
  CHECK(!lf.matches("cost of giving"));
  CHECK(!lf.matches("the cost ofliving"));
}

TEST_CASE("regex LFs use case-insensitive ECMAScript syntax") {
  LabelingFunction lf = regex_lf(
      "lf2", "economy", R"((rising|inflation|rise)\W+(?:\w+\W+){0,6}?(inflation|is rising))");
  CHECK(lf.matches("prices are rising and so is inflation"));
  CHECK(!lf.matches("nothing to see here"));
}

TEST_CASE("rule validation happens at construction") {
  CHECK_THROWS_AS(keyword_lf("lf", "t", {}), std::invalid_argument);
  CHECK_THROWS_AS(regex_lf("lf", "t", "(unbalanced"), std::invalid_argument);
}

TEST_CASE("apply_lfs fills the vote matrix") {
  std::vector<LabelingFunction> lfs = {keyword_lf("k1", "economy", {"inflation"}),
                                       keyword_lf("k2", "nhs", {"hospital"}),
                                       keyword_lf("k3", "economy", {"prices"})};
  std::vector<std::string> corpus = {"inflation and prices", "hospital wait times", "cats"};
  LabelMatrix m = apply_lfs(lfs, corpus);
  CHECK(m.rows == 3);
  CHECK(m.lf_ids == std::vector<std::string>{"k1", "k2", "k3"});
  CHECK(m.topics == std::vector<std::string>{"economy", "nhs"});

  auto topic_index = [&](const std::string& t) {
    return static_cast<std::int32_t>(
        std::find(m.topics.begin(), m.topics.end(), t) - m.topics.begin());
  };
  CHECK(m.at(0, 0) == topic_index("economy"));
  CHECK(m.at(0, 1) == kAbstain);
  CHECK(m.at(0, 2) == topic_index("economy"));
  CHECK(m.at(1, 1) == topic_index("nhs"));
  CHECK(m.at(2, 0) == kAbstain);
  CHECK(m.at(2, 1) == kAbstain);
  CHECK(m.at(2, 2) == kAbstain);

  // parallel application returns the same matrix
  LabelMatrix m4 = apply_lfs(lfs, corpus, 4);
  CHECK(m4.votes == m.votes);
}

TEST_CASE("majority aggregation is a strict plurality") {
  std::vector<LabelingFunction> lfs = {keyword_lf("k1", "a", {"alpha"}),
                                       keyword_lf("k2", "a", {"apple"}),
                                       keyword_lf("k3", "b", {"beta"})};
  std::vector<std::string> corpus = {
      "alpha apple",        // votes [a, a, -] -> a
      "nothing",            // votes [-, -, -] -> unlabeled
      "alpha beta",         // votes [a, -, b] -> tie -> unlabeled
      "alpha apple beta",   // votes [a, a, b] -> a
  };
  auto labels = aggregate(apply_lfs(lfs, corpus), AggregatePolicy::majority);
  REQUIRE(labels.size() == 4);
  CHECK(labels[0] == "a");
  CHECK(!labels[1].has_value());
  CHECK(!labels[2].has_value());
  CHECK(labels[3] == "a");
}

TEST_CASE("majority is invariant to LF column order") {
  std::vector<LabelingFunction> lfs = {keyword_lf("k1", "a", {"alpha"}),
                                       keyword_lf("k2", "b", {"beta"}),
                                       keyword_lf("k3", "a", {"apple"})};
  std::vector<std::string> corpus = {"alpha apple beta", "beta", "alpha beta"};
  auto forward = aggregate(apply_lfs(lfs, corpus), AggregatePolicy::majority);
  std::reverse(lfs.begin(), lfs.end());
  auto reversed = aggregate(apply_lfs(lfs, corpus), AggregatePolicy::majority);
  CHECK(forward == reversed);
}

TEST_CASE("weighted aggregation needs gold labels and trusts accurate LFs") {
  // k_bad fires on everything and is usually wrong; k_good is always right.
  std::vector<LabelingFunction> lfs = {regex_lf("k_bad", "a", ".*"),
                                       keyword_lf("k_good", "b", {"beta"})};
  std::vector<std::string> corpus = {"beta one", "beta two", "beta three", "plain a"};
  std::vector<std::string> gold = {"b", "b", "b", "a"};
  LabelMatrix m = apply_lfs(lfs, corpus);

  CHECK_THROWS_AS(aggregate(m, AggregatePolicy::weighted), std::invalid_argument);

  // majority deadlocks on the [a, b] rows; weighting by accuracy breaks it
  auto majority = aggregate(m, AggregatePolicy::majority);
  CHECK(!majority[0].has_value());
  auto weighted = aggregate(m, AggregatePolicy::weighted, &gold);
  CHECK(weighted[0] == "b");
  CHECK(weighted[1] == "b");
  CHECK(weighted[2] == "b");
  CHECK(weighted[3] == "a");
}

TEST_CASE("aggregate_multi reports every topic with a vote") {
  std::vector<LabelingFunction> lfs = {keyword_lf("k1", "a", {"alpha"}),
                                       keyword_lf("k2", "b", {"beta"})};
  std::vector<std::string> corpus = {"alpha beta", "alpha", "none"};
  auto labels = aggregate_multi(apply_lfs(lfs, corpus));
  CHECK(labels[0] == std::vector<std::string>{"a", "b"});
  CHECK(labels[1] == std::vector<std::string>{"a"});
  CHECK(labels[2].empty());
}

TEST_CASE("evaluate: perfect predictions give an identity matrix") {
  std::vector<std::string> gold = {"a", "b", "Other", "a"};
  std::vector<std::optional<std::string>> predicted = {"a", "b", std::nullopt, "a"};
  ConfusionMatrix cm = evaluate(predicted, gold);
  CHECK(cm.classes == std::vector<std::string>{"Other", "a", "b"});
  for (std::size_t r = 0; r < cm.classes.size(); ++r)
    for (std::size_t c = 0; c < cm.classes.size(); ++c)
      CHECK(cm.rates[r][c] == (r == c ? 1.0 : 0.0));
}

TEST_CASE("evaluate: everything predicted Other fills the first column") {
  std::vector<std::string> gold = {"a", "b", "a", "Other"};
  std::vector<std::optional<std::string>> predicted(4, std::nullopt);
  ConfusionMatrix cm = evaluate(predicted, gold);
  for (std::size_t r = 0; r < cm.classes.size(); ++r) {
    CHECK(cm.rates[r][0] == 1.0);
    for (std::size_t c = 1; c < cm.classes.size(); ++c) CHECK(cm.rates[r][c] == 0.0);
  }
}

TEST_CASE("evaluate: a 20-text fixture matches the hand tally") {
  // gold: 8 of a (6 right, 2 to b), 7 of b (7 right), 5 Other (4 right, 1 to a)
  std::vector<std::string> gold;
  std::vector<std::optional<std::string>> predicted;
  for (int i = 0; i < 6; ++i) { gold.push_back("a"); predicted.push_back("a"); }
  for (int i = 0; i < 2; ++i) { gold.push_back("a"); predicted.push_back("b"); }
  for (int i = 0; i < 7; ++i) { gold.push_back("b"); predicted.push_back("b"); }
  for (int i = 0; i < 4; ++i) { gold.push_back("Other"); predicted.push_back(std::nullopt); }
  gold.push_back("Other");
  predicted.push_back("a");

  ConfusionMatrix cm = evaluate(predicted, gold);
  CHECK(cm.total == 20);
  CHECK(cm.rate("a", "a") == doctest::Approx(0.75));
  CHECK(cm.rate("a", "b") == doctest::Approx(0.25));
  CHECK(cm.rate("b", "b") == doctest::Approx(1.0));
  CHECK(cm.rate("Other", "Other") == doctest::Approx(0.8));
  CHECK(cm.rate("Other", "a") == doctest::Approx(0.2));
  for (std::size_t r = 0; r < cm.classes.size(); ++r) {
    double row = 0.0;
    for (double v : cm.rates[r]) row += v;
    CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("evaluate validates its inputs") {
  CHECK_THROWS_AS(evaluate({std::nullopt}, {"a", "b"}), std::invalid_argument);
  // predicted topic never present in gold
  CHECK_THROWS_AS(evaluate({std::optional<std::string>("ghost")}, {"a"}),
                  std::invalid_argument);
}

TEST_CASE("LF files round-trip and reject duplicate ids") {
  std::vector<LabelingFunction> lfs = {keyword_lf("k1", "economy", {"inflation", "prices"}),
                                       regex_lf("r1", "nhs", "hospital|ward")};
  std::ostringstream out;
  write_lfs(out, lfs);
  std::istringstream in(out.str());
  auto again = read_lfs(in);
  REQUIRE(again.size() == 2);
  CHECK(again[0].lf_id() == "k1");
  CHECK(again[0].type() == RuleType::keyword_set);
  CHECK(again[0].payload() == std::vector<std::string>{"inflation", "prices"});
  CHECK(again[1].type() == RuleType::regex);
  CHECK(again[1].matches("the Hospital ward"));

  std::ostringstream dup;
  write_lfs(dup, {keyword_lf("same", "a", {"x"}), keyword_lf("same", "b", {"y"})});
  std::istringstream dup_in(dup.str());
  CHECK_THROWS_AS(read_lfs(dup_in), std::runtime_error);
}

TEST_CASE("apply_lfs is permutation-equivariant over rows") {
  std::vector<LabelingFunction> lfs = {keyword_lf("k1", "a", {"alpha"}),
                                       keyword_lf("k2", "b", {"beta"})};
  std::vector<std::string> corpus = {"alpha", "beta", "alpha beta", "none"};
  LabelMatrix forward = apply_lfs(lfs, corpus);
  std::vector<std::string> shuffled = {corpus[2], corpus[0], corpus[3], corpus[1]};
  LabelMatrix back = apply_lfs(lfs, shuffled);
  std::size_t cols = lfs.size();
  std::vector<std::size_t> map = {2, 0, 3, 1};  // shuffled row i = forward row map[i]
  for (std::size_t i = 0; i < map.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) CHECK(back.at(i, j) == forward.at(map[i], j));
}
