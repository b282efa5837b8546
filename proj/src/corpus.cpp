#include "dgem/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <span>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace dgem {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool has_whitespace(std::string_view s) {
  return s.find_first_of(" \t\r\n") != std::string_view::npos;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

bool parse_int64(std::string_view s, std::int64_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

RecordFormat detect_format(std::string_view first_line) {
  const std::string_view t = trim(first_line);
  if (!t.empty() && t.front() == '{') return RecordFormat::JsonLines;
  if (t.find('\t') != std::string_view::npos) return RecordFormat::Tsv;
  if (t.find(',') != std::string_view::npos) return RecordFormat::Csv;
  return RecordFormat::Tsv;  // single-field lines fail per-record below
}

// Accepts both generic and review-dataset field names.
const char* kUserKeys[] = {"user_id", "user", "reviewerID"};
const char* kItemKeys[] = {"item_id", "item", "asin"};
const char* kTimeKeys[] = {"timestamp", "time", "unixReviewTime"};
const char* kAuxKeys[] = {"categories", "category", "aux"};

const nlohmann::json* find_key(const nlohmann::json& obj, std::span<const char* const> keys) {
  for (const char* k : keys) {
    if (auto it = obj.find(k); it != obj.end()) return &*it;
  }
  return nullptr;
}

struct LineCursor {
  std::istream& in;
  std::size_t line_no = 0;
  std::string line;

  bool next() {
    while (std::getline(in, line)) {
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  }
};

bool parse_event_line(std::string_view raw, RecordFormat fmt, Event& ev, std::string& err) {
  if (fmt == RecordFormat::JsonLines) {
    nlohmann::json obj = nlohmann::json::parse(raw, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      err = "not a JSON object";
      return false;
    }
    const auto* user = find_key(obj, kUserKeys);
    const auto* item = find_key(obj, kItemKeys);
    const auto* time = find_key(obj, kTimeKeys);
    if (!user || !item || !time) {
      err = "missing user/item/timestamp field";
      return false;
    }
    if (!user->is_string() || !item->is_string()) {
      err = "user and item must be strings";
      return false;
    }
    ev.user_id = user->get<std::string>();
    ev.item_id = item->get<std::string>();
    if (time->is_number_integer()) {
      ev.timestamp = time->get<std::int64_t>();
    } else if (time->is_string() && parse_int64(time->get<std::string>(), ev.timestamp)) {
      // ok
    } else {
      err = "timestamp is not an integer";
      return false;
    }
  } else {
    const char sep = fmt == RecordFormat::Tsv ? '\t' : ',';
    const auto fields = split(raw, sep);
    if (fields.size() < 3) {
      err = "expected at least 3 fields";
      return false;
    }
    ev.user_id = std::string(trim(fields[0]));
    ev.item_id = std::string(trim(fields[1]));
    if (!parse_int64(fields[2], ev.timestamp)) {
      err = "timestamp is not an integer";
      return false;
    }
  }
  if (ev.user_id.empty() || ev.item_id.empty()) {
    err = "empty user or item id";
    return false;
  }
  if (has_whitespace(ev.user_id) || has_whitespace(ev.item_id)) {
    err = "ids must not contain whitespace";
    return false;
  }
  if (ev.item_id.front() == '#') {
    err = "item ids must not start with '#' (reserved for comments)";
    return false;
  }
  if (ev.timestamp < 0) {
    err = "negative timestamp";
    return false;
  }
  return true;
}

bool parse_metadata_line(std::string_view raw, RecordFormat fmt, MetadataRow& row, std::string& err) {
  std::string_view path;
  std::string path_storage;
  if (fmt == RecordFormat::JsonLines) {
    nlohmann::json obj = nlohmann::json::parse(raw, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      err = "not a JSON object";
      return false;
    }
    const auto* item = find_key(obj, kItemKeys);
    const auto* aux = find_key(obj, kAuxKeys);
    if (!item || !item->is_string()) {
      err = "missing item id";
      return false;
    }
    row.item_id = item->get<std::string>();
    row.aux.clear();
    if (aux) {
      if (aux->is_string()) {
        path_storage = aux->get<std::string>();
        path = path_storage;
      } else if (aux->is_array()) {
        for (const auto& tok : *aux) {
          if (!tok.is_string()) {
            err = "category tokens must be strings";
            return false;
          }
          row.aux.push_back(tok.get<std::string>());
        }
      } else {
        err = "categories must be a string or array";
        return false;
      }
    }
  } else {
    const char sep = fmt == RecordFormat::Tsv ? '\t' : ',';
    const auto fields = split(raw, sep);
    if (fields.empty() || trim(fields[0]).empty()) {
      err = "empty item id";
      return false;
    }
    row.item_id = std::string(trim(fields[0]));
    row.aux.clear();
    if (fields.size() > 1) path = trim(fields[1]);
  }
  if (!path.empty()) {
    for (const auto part : split(path, '/')) {
      const auto tok = trim(part);
      if (!tok.empty()) row.aux.emplace_back(tok);
    }
  }
  if (row.item_id.empty()) {
    err = "empty item id";
    return false;
  }
  if (has_whitespace(row.item_id)) {
    err = "ids must not contain whitespace";
    return false;
  }
  if (row.item_id.front() == '#') {
    err = "item ids must not start with '#' (reserved for comments)";
    return false;
  }
  return true;
}

}  // namespace

EventParseResult parse_events(std::istream& in, ParsePolicy policy, RecordFormat format) {
  EventParseResult result;
  LineCursor cursor{in, 0, {}};
  bool first = true;
  while (cursor.next()) {
    if (first && format == RecordFormat::Auto) {
      format = detect_format(cursor.line);
    }
    first = false;
    Event ev;
    std::string err;
    if (parse_event_line(cursor.line, format, ev, err)) {
      result.events.push_back(std::move(ev));
    } else if (policy == ParsePolicy::Abort) {
      throw ParseError(cursor.line_no, err);
    } else {
      result.issues.push_back({cursor.line_no, err});
    }
  }
  result.detected = format;
  return result;
}

MetadataParseResult parse_metadata(std::istream& in, ParsePolicy policy, RecordFormat format) {
  MetadataParseResult result;
  LineCursor cursor{in, 0, {}};
  bool first = true;
  while (cursor.next()) {
    if (first && format == RecordFormat::Auto) {
      format = detect_format(cursor.line);
    }
    first = false;
    MetadataRow row;
    std::string err;
    if (parse_metadata_line(cursor.line, format, row, err)) {
      result.rows.push_back(std::move(row));
    } else if (policy == ParsePolicy::Abort) {
      throw ParseError(cursor.line_no, err);
    } else {
      result.issues.push_back({cursor.line_no, err});
    }
  }
  result.detected = format;
  return result;
}

std::vector<UserSequence> build_sequences(const std::vector<Event>& events) {
  std::map<std::string, std::vector<std::pair<std::string, std::int64_t>>> by_user;
  for (const Event& ev : events) {
    by_user[ev.user_id].emplace_back(ev.item_id, ev.timestamp);
  }
  std::vector<UserSequence> out;
  out.reserve(by_user.size());
  for (auto& [user, items] : by_user) {
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    out.push_back({user, std::move(items)});
  }
  return out;
}

Catalog build_catalog(const std::vector<Event>& events,
                      const std::vector<MetadataRow>& metadata) {
  Catalog catalog;
  std::unordered_set<std::string> interacted;
  for (const Event& ev : events) {
    interacted.insert(ev.item_id);
    catalog.items.insert(ev.item_id);
  }
  for (const MetadataRow& row : metadata) {
    if (catalog.aux_info.count(row.item_id)) {
      ++catalog.duplicate_metadata_dropped;  // first occurrence wins
      continue;
    }
    catalog.aux_info.emplace(row.item_id, row.aux);
    catalog.items.insert(row.item_id);
    if (!interacted.count(row.item_id)) catalog.solitary.insert(row.item_id);
  }
  return catalog;
}

ActivityFilterResult filter_min_activity(const std::vector<Event>& events,
                                         std::size_t min_count) {
  ActivityFilterResult result;
  if (min_count <= 1) {
    result.events = events;
    return result;
  }
  std::unordered_map<std::string, std::size_t> user_counts;
  for (const Event& ev : events) ++user_counts[ev.user_id];

  std::vector<const Event*> after_users;
  after_users.reserve(events.size());
  std::unordered_set<std::string> dropped_users;
  for (const Event& ev : events) {
    if (user_counts[ev.user_id] < min_count) {
      dropped_users.insert(ev.user_id);
      continue;
    }
    after_users.push_back(&ev);
  }

  std::unordered_map<std::string, std::size_t> item_counts;
  for (const Event* ev : after_users) ++item_counts[ev->item_id];

  std::unordered_set<std::string> dropped_items;
  for (const Event* ev : after_users) {
    if (item_counts[ev->item_id] < min_count) {
      dropped_items.insert(ev->item_id);
      continue;
    }
    result.events.push_back(*ev);
  }
  result.dropped_users = dropped_users.size();
  result.dropped_items = dropped_items.size();
  result.dropped_events = events.size() - result.events.size();
  return result;
}

void write_events(const std::vector<Event>& events, std::ostream& out) {
  for (const Event& ev : events) {
    out << ev.user_id << '\t' << ev.item_id << '\t' << ev.timestamp << '\n';
  }
}

void write_metadata(const std::vector<MetadataRow>& rows, std::ostream& out) {
  for (const MetadataRow& row : rows) {
    out << row.item_id << '\t';
    for (std::size_t i = 0; i < row.aux.size(); ++i) {
      if (i) out << '/';
      out << row.aux[i];
    }
    out << '\n';
  }
}

}  // namespace dgem
