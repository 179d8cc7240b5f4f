#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "microevent/corpus.hpp"
#include "microevent/timeutil.hpp"

namespace microevent {

enum class StepDesign { calendar_week, event_based };

std::string to_string(StepDesign design);  // "calendar_week" / "event_based"
StepDesign parse_step_design(std::string_view text);

// A labeled 7-day window [start_day, end_day] (inclusive, UTC).
struct TimeStep {
  std::string id;
  Day start_day{};
  Day end_day{};
  StepDesign design = StepDesign::calendar_week;
  std::vector<std::string> message_ids;      // timestamp order
  std::optional<ReleaseKind> event_kind;     // nullopt: control step
  std::optional<ReleaseEvent> anchor_event;

  bool is_event() const { return event_kind.has_value(); }
  std::string label() const { return event_kind ? to_string(*event_kind) : "control"; }
};

inline constexpr int kStepLengthDays = 7;

// One step per ISO week (Monday to Sunday) holding at least one message. A week
// with events takes the label of its most significant event; weeks without any
// event are controls; weeks labeled with a kind other than `target` are left
// out. `messages` and `events` may be in any order.
std::vector<TimeStep> build_calendar_week_steps(std::span<const Message> messages,
                                                std::span<const ReleaseEvent> events, ReleaseKind target);

// One step starting on the day of each `target` event (same-day events
// collapse). Controls are the second week of every 14-day event-free interval
// found by scanning the message date range; the scan restarts the day after
// each event of any kind.
std::vector<TimeStep> build_event_based_steps(std::span<const Message> messages,
                                              std::span<const ReleaseEvent> events, ReleaseKind target);

struct StepDataset {
  std::string name;
  StepDesign design = StepDesign::calendar_week;
  ReleaseKind target_kind = ReleaseKind::minor;
  Timestamp split_instant{};
  std::vector<TimeStep> train;
  std::vector<TimeStep> test;
  std::size_t dropped_straddling = 0;
  std::size_t dropped_empty = 0;
};

// "[package][event kind][time step design]", e.g. "selenium minor event-based"
// or "multiple patch c.w.-based".
std::string dataset_name(std::span<const std::string> packages, ReleaseKind kind, StepDesign design);

// Steps wholly before the split day go to train, wholly after it to test;
// steps touching the split day and empty steps are dropped. Throws when a
// partition has fewer than 2 steps or a single class.
StepDataset assemble_dataset(std::vector<TimeStep> steps, Timestamp split_instant, std::string name,
                             StepDesign design, ReleaseKind target_kind);

// steps.csv: step_id,design,start_day,end_day,label,n_messages, plus a sidecar
// JSON object mapping step_id to message ids. Partitions are not stored; they
// follow from the split instant via assemble_dataset.
void write_steps(std::span<const TimeStep> steps, std::ostream& csv, std::ostream& sidecar_json);
std::vector<TimeStep> read_steps(std::istream& csv, std::istream& sidecar_json);

}  // namespace microevent
