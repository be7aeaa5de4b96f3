#include "egr/conversation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "egr/error.hpp"
#include "json.hpp"

namespace egr {

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

const std::string& require_string(const nlohmann::json& rec, const char* key,
                                  std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  if (!it->is_string()) throw ParseError(line, std::string("field '") + key + "' must be a string");
  return it->get_ref<const std::string&>();
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::Egregious ? "egregious" : "non_egregious";
}

Label parse_label(std::string_view text) {
  if (text == "egregious" || text == "1") return Label::Egregious;
  if (text == "non_egregious" || text == "0") return Label::NonEgregious;
  throw ValidationError("unknown label '" + std::string(text) + "'");
}

std::vector<Conversation> group_records(std::span<const LogRecord> records,
                                        std::string_view domain_tag) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::map<long long, const LogRecord*>> grouped;
  for (const auto& rec : records) {
    auto [it, fresh] = grouped.try_emplace(rec.conversation_id);
    if (fresh) order.push_back(rec.conversation_id);
    if (!it->second.emplace(rec.turn_id, &rec).second) {
      throw ValidationError("duplicate turn " + std::to_string(rec.turn_id) +
                            " in conversation '" + rec.conversation_id + "'");
    }
    if (is_blank(rec.customer_text)) {
      throw ValidationError("empty customer text in conversation '" +
                            rec.conversation_id + "' turn " + std::to_string(rec.turn_id));
    }
  }

  std::vector<Conversation> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    Conversation conv{id, std::string(domain_tag), {}};
    const auto& by_turn = grouped.at(id);
    conv.turns.reserve(by_turn.size());
    std::size_t index = 0;
    for (const auto& [turn_id, rec] : by_turn) {
      conv.turns.push_back(Turn{index++, rec->customer_text, rec->agent_text});
    }
    out.push_back(std::move(conv));
  }
  return out;
}

std::vector<Conversation> parse_log(std::istream& in, std::string_view domain_tag) {
  std::vector<LogRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) throw ParseError(line_no, "record must be a JSON object");

    LogRecord r;
    r.conversation_id = require_string(rec, "conversation_id", line_no);
    auto tid = rec.find("turn_id");
    if (tid == rec.end()) throw ParseError(line_no, "missing field 'turn_id'");
    if (!tid->is_number_integer()) throw ParseError(line_no, "field 'turn_id' must be an integer");
    r.turn_id = tid->get<long long>();
    r.customer_text = require_string(rec, "customer_text", line_no);
    r.agent_text = require_string(rec, "agent_text", line_no);
    records.push_back(std::move(r));
  }
  return group_records(records, domain_tag);
}

std::vector<Conversation> parse_log_file(const std::string& path, std::string_view domain_tag) {
  auto in = open_input(path);
  return parse_log(in, domain_tag);
}

void write_log(std::ostream& out, std::span<const Conversation> convs) {
  for (const auto& conv : convs) {
    for (const auto& turn : conv.turns) {
      nlohmann::ordered_json rec;
      rec["conversation_id"] = conv.id;
      rec["turn_id"] = turn.turn_index;
      rec["customer_text"] = turn.customer_text;
      rec["agent_text"] = turn.agent_text;
      out << rec.dump() << '\n';
    }
  }
}

void write_log_file(const std::string& path, std::span<const Conversation> convs) {
  auto out = open_output(path);
  write_log(out, convs);
}

std::vector<Conversation> filter_short(std::span<const Conversation> convs,
                                       std::size_t min_turns) {
  if (min_turns < 1) throw ConfigError("min_turns must be >= 1");
  std::vector<Conversation> out;
  std::copy_if(convs.begin(), convs.end(), std::back_inserter(out),
               [&](const Conversation& c) { return c.size() >= min_turns; });
  return out;
}

Label aggregate_judgments(const JudgmentSet& js, std::size_t quorum) {
  if (js.judgments.empty()) throw ValidationError("judgment set for '" + js.conversation_id + "' is empty");
  if (quorum < 1 || quorum > js.judgments.size()) {
    throw ConfigError("quorum " + std::to_string(quorum) + " exceeds judge count " +
                      std::to_string(js.judgments.size()));
  }
  auto votes = static_cast<std::size_t>(std::count(js.judgments.begin(), js.judgments.end(), true));
  return votes >= quorum ? Label::Egregious : Label::NonEgregious;
}

std::vector<JudgmentSet> read_judgments(std::istream& in) {
  std::vector<JudgmentSet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::istringstream fields(line);
    JudgmentSet js;
    fields >> js.conversation_id;
    std::string flag;
    while (fields >> flag) {
      if (flag == "1") {
        js.judgments.push_back(true);
      } else if (flag == "0") {
        js.judgments.push_back(false);
      } else {
        throw ParseError(line_no, "judgment flag must be 0 or 1, got '" + flag + "'");
      }
    }
    if (js.judgments.empty()) throw ParseError(line_no, "no judgments for '" + js.conversation_id + "'");
    out.push_back(std::move(js));
  }
  return out;
}

std::vector<JudgmentSet> read_judgments_file(const std::string& path) {
  auto in = open_input(path);
  return read_judgments(in);
}

std::vector<IdLabel> read_labels(std::istream& in) {
  std::vector<IdLabel> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::istringstream fields(line);
    IdLabel rec;
    std::string label;
    if (!(fields >> rec.conversation_id >> label)) {
      throw ParseError(line_no, "expected '<conversation_id> <label>'");
    }
    try {
      rec.label = parse_label(label);
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<IdLabel> read_labels_file(const std::string& path) {
  auto in = open_input(path);
  return read_labels(in);
}

void write_labels(std::ostream& out, std::span<const IdLabel> labels) {
  for (const auto& l : labels) out << l.conversation_id << '\t' << to_string(l.label) << '\n';
}

void write_labels_file(const std::string& path, std::span<const IdLabel> labels) {
  auto out = open_output(path);
  write_labels(out, labels);
}

std::vector<LabeledConversation> attach_labels(std::span<const Conversation> convs,
                                               std::span<const IdLabel> labels) {
  std::unordered_map<std::string, Label> by_id;
  for (const auto& l : labels) by_id[l.conversation_id] = l.label;
  std::vector<LabeledConversation> out;
  out.reserve(convs.size());
  for (const auto& c : convs) {
    auto it = by_id.find(c.id);
    if (it == by_id.end()) throw ValidationError("no label for conversation '" + c.id + "'");
    out.push_back({c, it->second});
  }
  return out;
}

double cohens_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw DimensionError("cohens_kappa needs two non-empty sequences of equal length");
  }
  const auto n = static_cast<double>(a.size());
  double agree = 0, a_pos = 0, b_pos = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i] ? 1 : 0;
    a_pos += a[i] ? 1 : 0;
    b_pos += b[i] ? 1 : 0;
  }
  const double p_o = agree / n;
  const double p_e = (a_pos / n) * (b_pos / n) + (1 - a_pos / n) * (1 - b_pos / n);
  if (p_e >= 1.0) {
    if (p_o >= 1.0) return 1.0;
    throw ValidationError("degenerate marginals");
  }
  return (p_o - p_e) / (1 - p_e);
}

double mean_pairwise_kappa(std::span<const std::vector<bool>> raters) {
  if (raters.size() < 2) throw ConfigError("mean_pairwise_kappa needs at least two raters");
  double sum = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < raters.size(); ++i) {
    for (std::size_t j = i + 1; j < raters.size(); ++j) {
      sum += cohens_kappa(raters[i], raters[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

LengthHistogram length_histogram(std::span<const Conversation> convs) {
  std::map<std::size_t, std::size_t> counts;
  double total = 0;
  for (const auto& c : convs) {
    ++counts[c.size()];
    total += static_cast<double>(c.size());
  }
  LengthHistogram h;
  for (const auto& [len, freq] : counts) h.bins.push_back({len, freq});
  if (!convs.empty()) h.mean_length = total / static_cast<double>(convs.size());
  return h;
}

}  // namespace egr
