#include "microevent/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "microevent/error.hpp"
#include "microevent/strings.hpp"

namespace microevent {
namespace {

using json = nlohmann::json;

bool message_before(const Message& a, const Message& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.id < b.id;
}

// Tags arrive as "<a><b>" (Stack Overflow dumps) or "|a|b|" (newer dumps).
std::vector<std::string> parse_tag_list(std::string_view raw) {
  std::vector<std::string> tags;
  std::string current;
  auto flush = [&] {
    auto t = trim(current);
    if (!t.empty()) tags.push_back(to_lower_ascii(t));
    current.clear();
  };
  for (char c : raw) {
    if (c == '<' || c == '>' || c == '|') {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return tags;
}

// Parses attributes of one <row .../> element starting after "<row".
// Returns false if the element is not terminated.
bool parse_row_attributes(std::string_view text, std::size_t& pos, std::map<std::string, std::string>& attrs) {
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) return false;
    if (text[pos] == '/' && pos + 1 < text.size() && text[pos + 1] == '>') {
      pos += 2;
      return true;
    }
    if (text[pos] == '>') {
      ++pos;
      return true;
    }
    const std::size_t name_start = pos;
    while (pos < text.size() && text[pos] != '=' && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '/' && text[pos] != '>') {
      ++pos;
    }
    const std::string name(text.substr(name_start, pos - name_start));
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size() || text[pos] != '=') return false;
    ++pos;
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size() || (text[pos] != '"' && text[pos] != '\'')) return false;
    const char quote = text[pos++];
    const std::size_t end = text.find(quote, pos);
    if (end == std::string_view::npos) return false;
    attrs[name] = decode_entities(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return false;
}

void finalize(ImportResult& result) {
  std::stable_sort(result.messages.begin(), result.messages.end(), message_before);
}

ImportResult import_so_xml(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string_view view(text);
  const auto first = view.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  if (first == std::string_view::npos ||
      !(view.substr(first, 5) == "<?xml" || view.substr(first, 6) == "<posts")) {
    throw InputError("malformed so-xml-rows header: expected <?xml or <posts>");
  }
  ImportResult result;
  std::unordered_set<std::string> seen;
  std::size_t pos = first;
  for (;;) {
    pos = view.find("<row", pos);
    if (pos == std::string_view::npos) break;
    pos += 4;
    ++result.rows;
    std::map<std::string, std::string> attrs;
    if (!parse_row_attributes(view, pos, attrs)) {
      ++result.skipped;
      result.errors.push_back("row " + std::to_string(result.rows) + ": unterminated element");
      break;
    }
    auto id = attrs.find("Id");
    auto date = attrs.find("CreationDate");
    auto body = attrs.find("Body");
    if (id == attrs.end() || date == attrs.end() || body == attrs.end()) {
      ++result.skipped;
      result.errors.push_back("row " + std::to_string(result.rows) + ": missing Id, CreationDate or Body");
      continue;
    }
    auto ts = parse_iso8601(date->second);
    if (!ts) {
      ++result.skipped;
      result.errors.push_back("row " + id->second + ": unparseable date '" + date->second + "'");
      continue;
    }
    if (!seen.insert(id->second).second) {
      ++result.skipped;
      result.errors.push_back("row " + id->second + ": duplicate id");
      continue;
    }
    Message m;
    m.id = id->second;
    m.timestamp = *ts;
    m.body_raw = body->second;
    if (auto tags = attrs.find("Tags"); tags != attrs.end()) m.tags = parse_tag_list(tags->second);
    result.messages.push_back(std::move(m));
  }
  finalize(result);
  return result;
}

ImportResult import_jsonl(std::istream& in) {
  ImportResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  bool header_checked = false;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error&) {
      if (!header_checked) throw InputError("malformed canonical-jsonl header: first line is not a JSON object");
    }
    if (!header_checked) {
      if (!row.is_object()) throw InputError("malformed canonical-jsonl header: first line is not a JSON object");
      header_checked = true;
    }
    ++result.rows;
    const std::string where = "line " + std::to_string(result.rows);
    if (!row.is_object() || !row.contains("id") || !row.contains("ts") || !row.contains("body") ||
        !row["id"].is_string() || !row["ts"].is_string() || !row["body"].is_string()) {
      ++result.skipped;
      result.errors.push_back(where + ": missing or mistyped id/ts/body");
      continue;
    }
    auto ts = parse_iso8601(row["ts"].get<std::string>());
    if (!ts) {
      ++result.skipped;
      result.errors.push_back(where + ": unparseable ts");
      continue;
    }
    Message m;
    m.id = row["id"].get<std::string>();
    if (!seen.insert(m.id).second) {
      ++result.skipped;
      result.errors.push_back(where + ": duplicate id " + m.id);
      continue;
    }
    m.timestamp = *ts;
    m.body_raw = row["body"].get<std::string>();
    if (row.contains("tags") && row["tags"].is_array()) {
      for (const auto& t : row["tags"]) {
        if (t.is_string()) m.tags.push_back(to_lower_ascii(t.get<std::string>()));
      }
    }
    if (row.contains("packages") && row["packages"].is_array()) {
      for (const auto& p : row["packages"]) {
        if (p.is_string()) m.packages.insert(p.get<std::string>());
      }
    }
    result.messages.push_back(std::move(m));
  }
  finalize(result);
  return result;
}

}  // namespace

std::string to_string(ReleaseKind kind) {
  switch (kind) {
    case ReleaseKind::major: return "major";
    case ReleaseKind::minor: return "minor";
    case ReleaseKind::patch: return "patch";
  }
  return "patch";
}

ReleaseKind parse_release_kind(std::string_view text) {
  if (text == "major") return ReleaseKind::major;
  if (text == "minor") return ReleaseKind::minor;
  if (text == "patch") return ReleaseKind::patch;
  throw InputError("unknown release kind: " + std::string(text));
}

int significance(ReleaseKind kind) {
  switch (kind) {
    case ReleaseKind::major: return 3;
    case ReleaseKind::minor: return 2;
    case ReleaseKind::patch: return 1;
  }
  return 0;
}

DumpFormat parse_dump_format(std::string_view text) {
  if (text == "so-xml-rows") return DumpFormat::so_xml_rows;
  if (text == "canonical-jsonl") return DumpFormat::canonical_jsonl;
  throw InputError("unknown dump format: " + std::string(text));
}

ImportResult import_messages(std::istream& in, DumpFormat format) {
  return format == DumpFormat::so_xml_rows ? import_so_xml(in) : import_jsonl(in);
}

void write_messages_jsonl(std::ostream& out, std::span<const Message> messages) {
  for (const auto& m : messages) {
    json row;
    row["id"] = m.id;
    row["ts"] = format_iso8601(m.timestamp);
    row["body"] = m.body_raw;
    row["tags"] = m.tags;
    if (!m.packages.empty()) row["packages"] = m.packages;
    out << row.dump() << '\n';
  }
}

bool mentions_package(const Message& message, std::string_view package) {
  for (const auto& tag : message.tags) {
    if (tag == package) return true;
  }
  const std::string body = to_lower_ascii(message.body_raw);
  std::size_t pos = 0;
  while ((pos = body.find(package, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char(body[pos - 1]);
    const std::size_t end = pos + package.size();
    const bool right_ok = end == body.size() || !is_word_char(body[end]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

std::map<std::string, std::vector<Message>> filter_by_packages(std::span<const Message> messages,
                                                               std::span<const std::string> package_names) {
  if (package_names.empty()) throw Error("filter_by_packages: empty package list");
  std::vector<std::string> packages;
  for (const auto& p : package_names) {
    if (p.empty()) throw Error("filter_by_packages: empty package name");
    packages.push_back(to_lower_ascii(p));
  }
  std::sort(packages.begin(), packages.end());
  packages.erase(std::unique(packages.begin(), packages.end()), packages.end());

  std::map<std::string, std::vector<Message>> out;
  for (const auto& p : packages) out[p];
  for (const auto& m : messages) {
    std::set<std::string> matched;
    for (const auto& p : packages) {
      if (mentions_package(m, p)) matched.insert(p);
    }
    if (matched.empty()) continue;
    Message copy = m;
    copy.packages = matched;
    for (const auto& p : matched) out[p].push_back(copy);
  }
  for (auto& [name, list] : out) std::stable_sort(list.begin(), list.end(), message_before);
  return out;
}

std::vector<Message> union_corpus(const std::map<std::string, std::vector<Message>>& by_package) {
  std::map<std::string, Message> unique;
  for (const auto& [name, list] : by_package) {
    for (const auto& m : list) {
      auto [it, inserted] = unique.emplace(m.id, m);
      if (!inserted) it->second.packages.insert(m.packages.begin(), m.packages.end());
    }
  }
  std::vector<Message> out;
  out.reserve(unique.size());
  for (auto& [id, m] : unique) out.push_back(std::move(m));
  std::stable_sort(out.begin(), out.end(), message_before);
  return out;
}

SemVer SemVer::parse(std::string_view text) {
  std::string_view t = trim(text);
  if (!t.empty() && (t.front() == 'v' || t.front() == 'V')) t.remove_prefix(1);
  const std::size_t cut = t.find_first_of("-+");
  const std::string_view core = t.substr(0, cut);
  const auto parts = split(core, '.');
  if (parts.empty() || parts.size() > 3) throw InputError("not a semantic version: " + std::string(text));
  long fields[3] = {0, 0, 0};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty() || parts[i].find_first_not_of("0123456789") != std::string::npos) {
      throw InputError("not a semantic version: " + std::string(text));
    }
    fields[i] = std::stol(parts[i]);
  }
  return SemVer{fields[0], fields[1], fields[2]};
}

ReleaseKind classify_release(std::string_view prev_version, std::string_view version) {
  const SemVer prev = SemVer::parse(prev_version);
  const SemVer next = SemVer::parse(version);
  if (next <= prev) {
    throw Error("not a forward release: " + std::string(prev_version) + " -> " + std::string(version));
  }
  if (next.major > prev.major) return ReleaseKind::major;
  if (next.major == prev.major && next.minor > prev.minor) return ReleaseKind::minor;
  return ReleaseKind::patch;
}

std::vector<ReleaseEvent> load_release_history(std::istream& csv) {
  std::string line;
  if (!std::getline(csv, line)) throw InputError("events file is empty");
  const auto header = parse_csv_line(trim(line));
  if (header.size() < 3 || header[0] != "package" || header[1] != "version" || header[2] != "ts") {
    throw InputError("events file header must be package,version,ts");
  }
  struct Raw {
    std::string package;
    std::string version;
    SemVer parsed;
    Timestamp ts;
  };
  std::map<std::string, std::vector<Raw>> by_package;
  std::size_t line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = parse_csv_line(line);
    if (fields.size() < 3) throw InputError("events line " + std::to_string(line_no) + ": expected 3 fields");
    auto ts = parse_iso8601(fields[2]);
    if (!ts) throw InputError("events line " + std::to_string(line_no) + ": bad timestamp");
    Raw r{to_lower_ascii(trim(fields[0])), std::string(trim(fields[1])), SemVer::parse(fields[1]), *ts};
    by_package[r.package].push_back(std::move(r));
  }
  std::vector<ReleaseEvent> events;
  for (auto& [package, list] : by_package) {
    std::stable_sort(list.begin(), list.end(), [](const Raw& a, const Raw& b) { return a.ts < b.ts; });
    std::vector<const Raw*> released;
    for (const auto& r : list) {
      const Raw* predecessor = nullptr;
      bool duplicate = false;
      for (const Raw* p : released) {
        if (p->parsed == r.parsed) duplicate = true;
        if (p->parsed < r.parsed && (!predecessor || predecessor->parsed < p->parsed)) predecessor = p;
      }
      if (!duplicate && predecessor) {
        events.push_back({package, r.version, r.ts, classify_release(predecessor->version, r.version)});
      }
      if (!duplicate) released.push_back(&r);
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const ReleaseEvent& a, const ReleaseEvent& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.package < b.package;
  });
  return events;
}

void write_events_csv(std::ostream& out, std::span<const ReleaseEvent> events) {
  out << "package,version,ts,kind\n";
  for (const auto& e : events) {
    out << csv_escape(e.package) << ',' << csv_escape(e.version) << ',' << format_iso8601(e.timestamp) << ','
        << to_string(e.kind) << '\n';
  }
}

std::vector<ReleaseEvent> read_events_csv(std::istream& csv) {
  std::string line;
  if (!std::getline(csv, line)) throw InputError("events file is empty");
  const auto header = parse_csv_line(trim(line));
  if (header.size() != 4 || header[3] != "kind") throw InputError("classified events header must be package,version,ts,kind");
  std::vector<ReleaseEvent> events;
  while (std::getline(csv, line)) {
    if (trim(line).empty()) continue;
    const auto f = parse_csv_line(line);
    if (f.size() != 4) throw InputError("classified events: expected 4 fields");
    auto ts = parse_iso8601(f[2]);
    if (!ts) throw InputError("classified events: bad timestamp");
    events.push_back({f[0], f[1], *ts, parse_release_kind(f[3])});
  }
  return events;
}

CorpusSplit chronological_split(std::vector<Message> messages, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error("chronological_split: fraction must be in (0, 1)");
  const std::size_t n = messages.size();
  if (n < 2) throw Error("chronological_split: need at least 2 messages");
  std::stable_sort(messages.begin(), messages.end(), message_before);
  if (messages.front().timestamp == messages.back().timestamp) throw Error("no chronological order");

  const std::size_t target = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
  std::size_t cut = std::clamp<std::size_t>(target, 1, n - 1);
  // Keep equal timestamps on one side; prefer moving the cut later.
  std::size_t forward = cut;
  while (forward < n && messages[forward].timestamp == messages[forward - 1].timestamp) ++forward;
  if (forward < n) {
    cut = forward;
  } else {
    while (cut > 0 && messages[cut].timestamp == messages[cut - 1].timestamp) --cut;
    if (cut == 0) throw Error("no chronological order");
  }
  CorpusSplit split;
  split.split_instant = messages[cut - 1].timestamp;
  split.train.assign(std::make_move_iterator(messages.begin()), std::make_move_iterator(messages.begin() + cut));
  split.test.assign(std::make_move_iterator(messages.begin() + cut), std::make_move_iterator(messages.end()));
  return split;
}

}  // namespace microevent
