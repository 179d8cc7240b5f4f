#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "microevent/timeutil.hpp"

namespace microevent {

// One forum post.
struct Message {
  std::string id;
  Timestamp timestamp{};
  std::string body_raw;
  std::vector<std::string> tags;      // lowercase
  std::set<std::string> packages;     // filled by filter_by_packages
};

enum class ReleaseKind { major, minor, patch };

std::string to_string(ReleaseKind kind);
ReleaseKind parse_release_kind(std::string_view text);

// Higher value means more significant (major > minor > patch).
int significance(ReleaseKind kind);

struct ReleaseEvent {
  std::string package;
  std::string version;
  Timestamp timestamp{};
  ReleaseKind kind = ReleaseKind::patch;
};

struct CorpusSplit {
  std::vector<Message> train;
  std::vector<Message> test;
  Timestamp split_instant{};  // last train timestamp
};

enum class DumpFormat { so_xml_rows, canonical_jsonl };

DumpFormat parse_dump_format(std::string_view text);

struct ImportResult {
  std::vector<Message> messages;  // sorted by (timestamp, id)
  std::size_t rows = 0;           // data rows seen
  std::size_t skipped = 0;        // rows rejected for any reason
  std::vector<std::string> errors;
};

// Reads a message dump. A stream whose header does not match the format
// throws InputError; bad rows are skipped and counted.
ImportResult import_messages(std::istream& in, DumpFormat format);

void write_messages_jsonl(std::ostream& out, std::span<const Message> messages);

// A message belongs to package p when p equals one of its tags, or occurs in
// the raw body as a case-insensitive match bounded by non-word characters.
// Returned messages carry every matched package in Message::packages.
std::map<std::string, std::vector<Message>> filter_by_packages(std::span<const Message> messages,
                                                               std::span<const std::string> package_names);

// Union of the per-package lists, deduplicated by id, sorted by time.
std::vector<Message> union_corpus(const std::map<std::string, std::vector<Message>>& by_package);

bool mentions_package(const Message& message, std::string_view package);

struct SemVer {
  long major = 0;
  long minor = 0;
  long patch = 0;

  // MAJOR[.MINOR[.PATCH]] with an optional leading 'v'; pre-release and build
  // suffixes are ignored.
  static SemVer parse(std::string_view text);
  auto operator<=>(const SemVer&) const = default;
};

// Kind of the release going from prev to next; throws Error("not a forward
// release") when next <= prev.
ReleaseKind classify_release(std::string_view prev_version, std::string_view version);

// Reads "package,version,ts" rows. Each release is classified against the
// greatest lower version of the same package released before it, so backport
// releases on maintenance branches classify as patches. The first release of
// each package (or any release with no lower predecessor) only establishes the
// baseline and is not returned. Output is sorted by (timestamp, package).
std::vector<ReleaseEvent> load_release_history(std::istream& csv);

void write_events_csv(std::ostream& out, std::span<const ReleaseEvent> events);

// Reads back the output of write_events_csv (package,version,ts,kind).
std::vector<ReleaseEvent> read_events_csv(std::istream& csv);

// Earliest floor(train_fraction * n) messages go to train. Messages sharing
// the boundary timestamp are kept on the same side.
CorpusSplit chronological_split(std::vector<Message> messages, double train_fraction = 0.6);

}  // namespace microevent
