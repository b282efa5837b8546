#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dgem {

// One (user, item, timestamp) interaction record.
struct Event {
  std::string user_id;
  std::string item_id;
  std::int64_t timestamp = 0;
};

struct UserSequence {
  std::string user_id;
  std::vector<std::pair<std::string, std::int64_t>> items;  // sorted by timestamp
};

// Item universe plus per-item auxiliary attribute tokens. Items that carry
// metadata but never appear in an interaction are the solitary set (the
// cold-start population).
struct Catalog {
  std::set<std::string> items;
  std::map<std::string, std::vector<std::string>> aux_info;
  std::set<std::string> solitary;
  std::size_t duplicate_metadata_dropped = 0;
};

enum class ParsePolicy { Skip, Abort };
enum class RecordFormat { Auto, Tsv, Csv, JsonLines };

struct ParseIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct EventParseResult {
  std::vector<Event> events;
  std::vector<ParseIssue> issues;
  RecordFormat detected = RecordFormat::Auto;
};

struct MetadataRow {
  std::string item_id;
  std::vector<std::string> aux;  // category-path tokens
};

struct MetadataParseResult {
  std::vector<MetadataRow> rows;
  std::vector<ParseIssue> issues;
  RecordFormat detected = RecordFormat::Auto;
};

// Line-delimited event records: user, item, timestamp (extra fields ignored).
// Format detected from the first non-blank line unless given explicitly.
EventParseResult parse_events(std::istream& in, ParsePolicy policy = ParsePolicy::Skip,
                              RecordFormat format = RecordFormat::Auto);

// Line-delimited metadata records: item, category path joined by '/'.
MetadataParseResult parse_metadata(std::istream& in, ParsePolicy policy = ParsePolicy::Skip,
                                   RecordFormat format = RecordFormat::Auto);

// Groups events by user and orders each group by timestamp ascending,
// ties broken by original input order. Output sorted by user id.
std::vector<UserSequence> build_sequences(const std::vector<Event>& events);

Catalog build_catalog(const std::vector<Event>& events,
                      const std::vector<MetadataRow>& metadata);

struct ActivityFilterResult {
  std::vector<Event> events;
  std::size_t dropped_users = 0;
  std::size_t dropped_items = 0;
  std::size_t dropped_events = 0;
};

// Drops users with fewer than min_count events, then items with fewer than
// min_count remaining events. One pass each, in that order.
ActivityFilterResult filter_min_activity(const std::vector<Event>& events,
                                         std::size_t min_count);

void write_events(const std::vector<Event>& events, std::ostream& out);
void write_metadata(const std::vector<MetadataRow>& rows, std::ostream& out);

}  // namespace dgem
