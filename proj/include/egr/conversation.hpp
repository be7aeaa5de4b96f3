#pragma once

// Conversation data model, log ingestion, judgment aggregation and corpus
// statistics.

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace egr {

enum class Label { NonEgregious = 0, Egregious = 1 };

std::string_view to_string(Label label);
/// Accepts "egregious" / "non_egregious" (also "1" / "0").
Label parse_label(std::string_view text);

inline bool is_egregious(Label label) { return label == Label::Egregious; }

struct Turn {
  std::size_t turn_index = 0;
  std::string customer_text;
  std::string agent_text;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Conversation {
  std::string id;
  std::string domain_tag;
  std::vector<Turn> turns;

  std::size_t size() const { return turns.size(); }

  friend bool operator==(const Conversation&, const Conversation&) = default;
};

struct JudgmentSet {
  std::string conversation_id;
  std::vector<bool> judgments;
};

struct LabeledConversation {
  Conversation conversation;
  Label label = Label::NonEgregious;
};

/// A raw log record: one (conversation id, turn id, customer input, agent
/// response) tuple.
struct LogRecord {
  std::string conversation_id;
  long long turn_id = 0;
  std::string customer_text;
  std::string agent_text;
};

/// Groups records into conversations. Turns are sorted by turn id and
/// re-indexed densely from 0; conversations keep the order in which their
/// id first appears. Throws ValidationError on duplicate (id, turn id) or an
/// empty customer text.
std::vector<Conversation> group_records(std::span<const LogRecord> records,
                                        std::string_view domain_tag = {});

/// Reads line-delimited JSON records with the fields conversation_id,
/// turn_id, customer_text and agent_text. Blank lines are ignored.
/// Throws ParseError naming the line for malformed records.
std::vector<Conversation> parse_log(std::istream& in, std::string_view domain_tag = {});
std::vector<Conversation> parse_log_file(const std::string& path,
                                         std::string_view domain_tag = {});

void write_log(std::ostream& out, std::span<const Conversation> convs);
void write_log_file(const std::string& path, std::span<const Conversation> convs);

std::vector<Conversation> filter_short(std::span<const Conversation> convs,
                                       std::size_t min_turns = 2);

/// Egregious iff at least `quorum` judges flagged the conversation.
Label aggregate_judgments(const JudgmentSet& js, std::size_t quorum = 3);

/// Judgments file: one line per conversation, the id followed by
/// whitespace-separated 0/1 flags.
std::vector<JudgmentSet> read_judgments(std::istream& in);
std::vector<JudgmentSet> read_judgments_file(const std::string& path);

struct IdLabel {
  std::string conversation_id;
  Label label = Label::NonEgregious;

  friend bool operator==(const IdLabel&, const IdLabel&) = default;
};

/// Labels file: `conversation_id<TAB>egregious|non_egregious` per line.
std::vector<IdLabel> read_labels(std::istream& in);
std::vector<IdLabel> read_labels_file(const std::string& path);
void write_labels(std::ostream& out, std::span<const IdLabel> labels);
void write_labels_file(const std::string& path, std::span<const IdLabel> labels);

/// Joins conversations with labels by id. Every conversation must have a
/// label; labels without a conversation are ignored.
std::vector<LabeledConversation> attach_labels(std::span<const Conversation> convs,
                                               std::span<const IdLabel> labels);

/// Chance-corrected agreement between two raters' binary labels.
double cohens_kappa(const std::vector<bool>& a, const std::vector<bool>& b);

/// Mean Cohen's kappa over all unordered judge pairs. `raters[j]` holds
/// judge j's labels over the same items.
double mean_pairwise_kappa(std::span<const std::vector<bool>> raters);

struct LengthBin {
  std::size_t length = 0;
  std::size_t frequency = 0;

  friend bool operator==(const LengthBin&, const LengthBin&) = default;
};

struct LengthHistogram {
  std::vector<LengthBin> bins;  // ascending by length
  std::optional<double> mean_length;
};

LengthHistogram length_histogram(std::span<const Conversation> convs);

}  // namespace egr
