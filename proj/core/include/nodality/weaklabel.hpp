#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nodality {

/// Vote value for "no opinion".
inline constexpr std::int32_t kAbstain = -1;

/// Class name used for texts that belong to no tracked topic.
inline constexpr const char* kOtherClass = "Other";

enum class RuleType { keyword_set, regex };

/// One rule-based labeler: votes its topic when the rule fires, abstains
/// otherwise. Keyword rules match case-insensitively on word boundaries and
/// may contain multi-word phrases; regex rules use ECMAScript syntax, also
/// case-insensitive.
class LabelingFunction {
 public:
  LabelingFunction(std::string lf_id, std::string topic, RuleType type,
                   std::vector<std::string> payload);

  const std::string& lf_id() const { return lf_id_; }
  const std::string& topic() const { return topic_; }
  RuleType type() const { return type_; }
  const std::vector<std::string>& payload() const { return payload_; }

  /// True when the rule fires on the text.
  bool matches(const std::string& text) const;

 private:
  std::string lf_id_;
  std::string topic_;
  RuleType type_;
  std::vector<std::string> payload_;  // keywords, or a single regex pattern
  std::vector<std::string> lowered_;  // lowercased keywords
  std::shared_ptr<const void> compiled_;
};

/// n×m matrix of votes: rows are texts, columns are labeling functions.
/// Entries are indices into `topics` or kAbstain.
struct LabelMatrix {
  std::vector<std::string> topics;  // sorted, deduplicated topic ids
  std::vector<std::string> lf_ids;  // column order = input LF order
  std::size_t rows = 0;
  std::vector<std::int32_t> votes;  // row-major, rows × lf_ids.size()

  std::int32_t at(std::size_t row, std::size_t col) const {
    return votes[row * lf_ids.size() + col];
  }
};

/// Applies every labeling function to every text.
LabelMatrix apply_lfs(const std::vector<LabelingFunction>& lfs,
                      const std::vector<std::string>& corpus, std::size_t threads = 1);

enum class AggregatePolicy { majority, weighted };

/// One label per text; std::nullopt = unlabeled (all abstained, or tie).
/// Majority: plurality of non-abstain votes. Weighted: votes carry per-LF
/// accuracy weights estimated on `gold` (Laplace-smoothed), then plurality
/// by total weight; requesting weighted without gold labels is an error.
/// Gold entries use topic ids, with any other value meaning "no topic".
std::vector<std::optional<std::string>> aggregate(
    const LabelMatrix& matrix, AggregatePolicy policy,
    const std::vector<std::string>* gold = nullptr);

/// Topics with at least one vote on the row, each topic treated as an
/// independent binary labeling problem. Used when texts may legitimately
/// belong to several topics at once.
std::vector<std::vector<std::string>> aggregate_multi(const LabelMatrix& matrix);

/// Row-normalized confusion matrix. Rows are actual (gold) classes, columns
/// predicted; class 0 is always "Other", the rest are sorted topic ids.
/// The diagonal of `rates` is per-class recall.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<std::vector<double>> rates;  // rows sum to 1 when nonempty
  std::size_t total = 0;

  double rate(const std::string& actual, const std::string& predicted) const;
};

/// Compares predictions against gold labels. Unlabeled predictions count as
/// "Other". Throws on length mismatch and on predicted topics that never
/// occur in gold (the matrix would not be square).
ConfusionMatrix evaluate(const std::vector<std::optional<std::string>>& predicted,
                         const std::vector<std::string>& gold);

/// Labeling-function file: one record per line with lf_id, topic, rule_type,
/// payload (keyword array or regex string).
std::vector<LabelingFunction> read_lfs(std::istream& in);
std::vector<LabelingFunction> read_lfs_file(const std::string& path);
void write_lfs(std::ostream& out, const std::vector<LabelingFunction>& lfs);

}  // namespace nodality
