#include "nodality/weaklabel.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <stdexcept>

#include "json.hpp"
#include "nodality/parallel.hpp"

namespace nodality {

using json = nlohmann::json;

namespace {

std::string to_lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

// Whole-word occurrence of `needle` (already lowercased) in lowercased
// `haystack`. Boundaries are non-word characters or the string ends; the
// needle itself may contain spaces or punctuation (phrase match).
bool contains_word(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return false;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]);
    const std::size_t end = pos + needle.size();
    const bool right_ok = end == haystack.size() || !is_word_char(haystack[end]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

}  // namespace

LabelingFunction::LabelingFunction(std::string lf_id, std::string topic, RuleType type,
                                   std::vector<std::string> payload)
    : lf_id_(std::move(lf_id)), topic_(std::move(topic)), type_(type),
      payload_(std::move(payload)) {
  if (lf_id_.empty()) throw std::invalid_argument("labeling function: empty lf_id");
  if (topic_.empty()) throw std::invalid_argument("labeling function: empty topic");
  if (type_ == RuleType::keyword_set) {
    if (payload_.empty())
      throw std::invalid_argument(lf_id_ + ": keyword rule with no keywords");
    for (const auto& k : payload_) lowered_.push_back(to_lower(k));
  } else {
    if (payload_.size() != 1)
      throw std::invalid_argument(lf_id_ + ": regex rule takes exactly one pattern");
    try {
      compiled_ = std::make_shared<std::regex>(payload_[0],
                                               std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      throw std::invalid_argument(lf_id_ + ": bad regex: " + e.what());
    }
  }
}

bool LabelingFunction::matches(const std::string& text) const {
  if (type_ == RuleType::keyword_set) {
    const std::string lowered = to_lower(text);
    for (const auto& k : lowered_)
      if (contains_word(lowered, k)) return true;
    return false;
  }
  return std::regex_search(text, *static_cast<const std::regex*>(compiled_.get()));
}

LabelMatrix apply_lfs(const std::vector<LabelingFunction>& lfs,
                      const std::vector<std::string>& corpus, std::size_t threads) {
  if (lfs.empty()) throw std::invalid_argument("apply_lfs: no labeling functions");

  LabelMatrix m;
  for (const auto& lf : lfs) {
    m.lf_ids.push_back(lf.lf_id());
    m.topics.push_back(lf.topic());
  }
  std::sort(m.topics.begin(), m.topics.end());
  m.topics.erase(std::unique(m.topics.begin(), m.topics.end()), m.topics.end());

  std::vector<std::int32_t> topic_index(lfs.size());
  for (std::size_t j = 0; j < lfs.size(); ++j) {
    auto it = std::lower_bound(m.topics.begin(), m.topics.end(), lfs[j].topic());
    topic_index[j] = static_cast<std::int32_t>(it - m.topics.begin());
  }

  m.rows = corpus.size();
  m.votes.assign(m.rows * lfs.size(), kAbstain);
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < lfs.size(); ++j)
      if (lfs[j].matches(corpus[i])) m.votes[i * lfs.size() + j] = topic_index[j];
  });
  return m;
}

std::vector<std::optional<std::string>> aggregate(const LabelMatrix& matrix,
                                                  AggregatePolicy policy,
                                                  const std::vector<std::string>* gold) {
  const std::size_t m = matrix.lf_ids.size();
  std::vector<double> weight(m, 1.0);

  if (policy == AggregatePolicy::weighted) {
    if (gold == nullptr)
      throw std::invalid_argument("aggregate: weighted policy needs gold labels");
    if (gold->size() != matrix.rows)
      throw std::invalid_argument("aggregate: gold length differs from matrix rows");
    // Laplace-smoothed accuracy of each LF over the rows where it voted.
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t voted = 0, correct = 0;
      for (std::size_t i = 0; i < matrix.rows; ++i) {
        const std::int32_t v = matrix.at(i, j);
        if (v == kAbstain) continue;
        ++voted;
        if (matrix.topics[static_cast<std::size_t>(v)] == (*gold)[i]) ++correct;
      }
      weight[j] = static_cast<double>(correct + 1) / static_cast<double>(voted + 2);
    }
  }

  std::vector<std::optional<std::string>> labels(matrix.rows);
  std::vector<double> tally(matrix.topics.size());
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    std::fill(tally.begin(), tally.end(), 0.0);
    bool any = false;
    for (std::size_t j = 0; j < m; ++j) {
      const std::int32_t v = matrix.at(i, j);
      if (v == kAbstain) continue;
      tally[static_cast<std::size_t>(v)] += weight[j];
      any = true;
    }
    if (!any) continue;
    std::size_t best = 0;
    for (std::size_t t = 1; t < tally.size(); ++t)
      if (tally[t] > tally[best]) best = t;
    bool tied = false;
    for (std::size_t t = 0; t < tally.size(); ++t)
      if (t != best && tally[t] == tally[best]) tied = true;
    if (!tied) labels[i] = matrix.topics[best];
  }
  return labels;
}

std::vector<std::vector<std::string>> aggregate_multi(const LabelMatrix& matrix) {
  std::vector<std::vector<std::string>> out(matrix.rows);
  std::vector<bool> seen(matrix.topics.size());
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    std::fill(seen.begin(), seen.end(), false);
    for (std::size_t j = 0; j < matrix.lf_ids.size(); ++j) {
      const std::int32_t v = matrix.at(i, j);
      if (v != kAbstain) seen[static_cast<std::size_t>(v)] = true;
    }
    for (std::size_t t = 0; t < seen.size(); ++t)
      if (seen[t]) out[i].push_back(matrix.topics[t]);
  }
  return out;
}

double ConfusionMatrix::rate(const std::string& actual, const std::string& predicted) const {
  auto idx = [&](const std::string& name) {
    auto it = std::find(classes.begin(), classes.end(), name);
    if (it == classes.end()) throw std::out_of_range("no class \"" + name + "\"");
    return static_cast<std::size_t>(it - classes.begin());
  };
  return rates[idx(actual)][idx(predicted)];
}

ConfusionMatrix evaluate(const std::vector<std::optional<std::string>>& predicted,
                         const std::vector<std::string>& gold) {
  if (predicted.size() != gold.size())
    throw std::invalid_argument("evaluate: predicted and gold lengths differ");

  std::vector<std::string> topics;
  for (const auto& g : gold)
    if (g != kOtherClass && !g.empty()) topics.push_back(g);
  std::sort(topics.begin(), topics.end());
  topics.erase(std::unique(topics.begin(), topics.end()), topics.end());

  auto known = [&](const std::string& t) {
    return std::binary_search(topics.begin(), topics.end(), t);
  };
  for (const auto& p : predicted)
    if (p && !known(*p))
      throw std::invalid_argument("evaluate: predicted topic \"" + *p +
                                  "\" never occurs in gold");

  ConfusionMatrix cm;
  cm.classes.push_back(kOtherClass);
  cm.classes.insert(cm.classes.end(), topics.begin(), topics.end());
  const std::size_t k = cm.classes.size();
  cm.counts.assign(k, std::vector<std::int64_t>(k, 0));
  cm.total = gold.size();

  auto class_of = [&](const std::string& name) -> std::size_t {
    if (name == kOtherClass || name.empty()) return 0;
    auto it = std::lower_bound(topics.begin(), topics.end(), name);
    return 1 + static_cast<std::size_t>(it - topics.begin());
  };
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::size_t row = class_of(gold[i]);
    const std::size_t col = predicted[i] ? class_of(*predicted[i]) : 0;
    ++cm.counts[row][col];
  }

  cm.rates.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t r = 0; r < k; ++r) {
    std::int64_t row_total = 0;
    for (std::int64_t c : cm.counts[r]) row_total += c;
    if (row_total == 0) continue;
    for (std::size_t c = 0; c < k; ++c)
      cm.rates[r][c] = static_cast<double>(cm.counts[r][c]) / static_cast<double>(row_total);
  }
  return cm;
}

std::vector<LabelingFunction> read_lfs(std::istream& in) {
  std::vector<LabelingFunction> lfs;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, bool> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("labeling functions line " + std::to_string(line_no) + ": " +
                               e.what());
    }
    const auto lf_id = j.at("lf_id").get<std::string>();
    if (seen.count(lf_id))
      throw std::runtime_error("duplicate lf_id \"" + lf_id + "\"");
    seen[lf_id] = true;
    const auto rule_type = j.at("rule_type").get<std::string>();
    std::vector<std::string> payload;
    if (rule_type == "keyword_set") {
      for (const auto& k : j.at("payload")) payload.push_back(k.get<std::string>());
      lfs.emplace_back(lf_id, j.at("topic").get<std::string>(), RuleType::keyword_set,
                       payload);
    } else if (rule_type == "regex") {
      payload.push_back(j.at("payload").get<std::string>());
      lfs.emplace_back(lf_id, j.at("topic").get<std::string>(), RuleType::regex, payload);
    } else {
      throw std::runtime_error("unknown rule_type \"" + rule_type + "\"");
    }
  }
  return lfs;
}

std::vector<LabelingFunction> read_lfs_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_lfs(in);
}

void write_lfs(std::ostream& out, const std::vector<LabelingFunction>& lfs) {
  for (const auto& lf : lfs) {
    json j;
    j["lf_id"] = lf.lf_id();
    j["topic"] = lf.topic();
    if (lf.type() == RuleType::keyword_set) {
      j["rule_type"] = "keyword_set";
      j["payload"] = lf.payload();
    } else {
      j["rule_type"] = "regex";
      j["payload"] = lf.payload()[0];
    }
    out << j.dump() << '\n';
  }
}

}  // namespace nodality
