#include "microevent/timegrid.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"

#include "microevent/error.hpp"
#include "microevent/strings.hpp"

namespace microevent {
namespace {

using std::chrono::days;

std::vector<const Message*> sorted_messages(std::span<const Message> messages) {
  std::vector<const Message*> out;
  out.reserve(messages.size());
  for (const auto& m : messages) out.push_back(&m);
  std::stable_sort(out.begin(), out.end(), [](const Message* a, const Message* b) {
    if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
    return a->id < b->id;
  });
  return out;
}

std::vector<ReleaseEvent> sorted_events(std::span<const ReleaseEvent> events) {
  std::vector<ReleaseEvent> out(events.begin(), events.end());
  std::stable_sort(out.begin(), out.end(), [](const ReleaseEvent& a, const ReleaseEvent& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.package < b.package;
  });
  return out;
}

void fill_messages(TimeStep& step, const std::vector<const Message*>& sorted) {
  const Timestamp begin{std::chrono::sys_seconds{step.start_day}};
  const Timestamp end{std::chrono::sys_seconds{step.end_day + days{1}}};
  auto lo = std::lower_bound(sorted.begin(), sorted.end(), begin,
                             [](const Message* m, Timestamp t) { return m->timestamp < t; });
  for (auto it = lo; it != sorted.end() && (*it)->timestamp < end; ++it) step.message_ids.push_back((*it)->id);
}

std::string step_id(const char* prefix, Day start) { return std::string(prefix) + "-" + format_day(start); }

}  // namespace

std::string to_string(StepDesign design) {
  return design == StepDesign::calendar_week ? "calendar_week" : "event_based";
}

StepDesign parse_step_design(std::string_view text) {
  if (text == "calendar_week") return StepDesign::calendar_week;
  if (text == "event_based") return StepDesign::event_based;
  throw InputError("unknown time step design: " + std::string(text));
}

std::vector<TimeStep> build_calendar_week_steps(std::span<const Message> messages,
                                                std::span<const ReleaseEvent> events, ReleaseKind target) {
  if (messages.empty()) throw Error("build_calendar_week_steps: no messages");
  const auto sorted = sorted_messages(messages);
  const auto evs = sorted_events(events);

  std::set<Day> weeks;
  for (const Message* m : sorted) weeks.insert(iso_week_start(day_of(m->timestamp)));

  std::vector<TimeStep> steps;
  for (Day week : weeks) {
    const ReleaseEvent* top = nullptr;
    for (const auto& e : evs) {
      if (iso_week_start(day_of(e.timestamp)) != week) continue;
      if (!top || significance(e.kind) > significance(top->kind)) top = &e;
    }
    if (top && top->kind != target) continue;
    TimeStep step;
    step.id = step_id("cw", week);
    step.start_day = week;
    step.end_day = week + days{kStepLengthDays - 1};
    step.design = StepDesign::calendar_week;
    if (top) {
      step.event_kind = top->kind;
      step.anchor_event = *top;
    }
    fill_messages(step, sorted);
    steps.push_back(std::move(step));
  }
  return steps;
}

std::vector<TimeStep> build_event_based_steps(std::span<const Message> messages,
                                              std::span<const ReleaseEvent> events, ReleaseKind target) {
  if (messages.empty()) throw Error("build_event_based_steps: no messages");
  const auto sorted = sorted_messages(messages);
  const auto evs = sorted_events(events);
  const Day first_day = day_of(sorted.front()->timestamp);
  const Day last_day = day_of(sorted.back()->timestamp);

  std::vector<TimeStep> steps;
  std::set<Day> anchored;
  for (const auto& e : evs) {
    if (e.kind != target) continue;
    const Day d = day_of(e.timestamp);
    if (!anchored.insert(d).second) continue;
    TimeStep step;
    step.id = step_id("eb", d);
    step.start_day = d;
    step.end_day = d + days{kStepLengthDays - 1};
    step.design = StepDesign::event_based;
    step.event_kind = e.kind;
    step.anchor_event = e;
    fill_messages(step, sorted);
    steps.push_back(std::move(step));
  }

  std::set<Day> event_days;
  for (const auto& e : evs) event_days.insert(day_of(e.timestamp));
  auto emit_control = [&](Day interval_start) {
    TimeStep step;
    step.start_day = interval_start + days{kStepLengthDays};
    step.end_day = interval_start + days{2 * kStepLengthDays - 1};
    step.id = step_id("eb", step.start_day);
    step.design = StepDesign::event_based;
    fill_messages(step, sorted);
    steps.push_back(std::move(step));
  };
  Day cursor = first_day;
  for (Day e : event_days) {
    while (cursor + days{2 * kStepLengthDays - 1} < e && cursor + days{2 * kStepLengthDays - 1} <= last_day) {
      emit_control(cursor);
      cursor += days{2 * kStepLengthDays};
    }
    cursor = std::max(cursor, e + days{1});
  }
  while (cursor + days{2 * kStepLengthDays - 1} <= last_day) {
    emit_control(cursor);
    cursor += days{2 * kStepLengthDays};
  }

  std::stable_sort(steps.begin(), steps.end(), [](const TimeStep& a, const TimeStep& b) {
    if (a.start_day != b.start_day) return a.start_day < b.start_day;
    return a.id < b.id;
  });
  return steps;
}

std::string dataset_name(std::span<const std::string> packages, ReleaseKind kind, StepDesign design) {
  std::string pkg = packages.size() == 1 ? to_lower_ascii(packages.front()) : std::string("multiple");
  return pkg + " " + to_string(kind) + " " + (design == StepDesign::event_based ? "event-based" : "c.w.-based");
}

StepDataset assemble_dataset(std::vector<TimeStep> steps, Timestamp split_instant, std::string name,
                             StepDesign design, ReleaseKind target_kind) {
  StepDataset ds;
  ds.name = std::move(name);
  ds.design = design;
  ds.target_kind = target_kind;
  ds.split_instant = split_instant;
  const Day split_day = day_of(split_instant);
  for (auto& step : steps) {
    if (step.message_ids.empty()) {
      ++ds.dropped_empty;
    } else if (step.end_day < split_day) {
      ds.train.push_back(std::move(step));
    } else if (step.start_day > split_day) {
      ds.test.push_back(std::move(step));
    } else {
      ++ds.dropped_straddling;
    }
  }
  auto check = [](const std::vector<TimeStep>& part, const char* which) {
    if (part.size() < 2) throw Error(std::string("unusable partition: ") + which + " has fewer than 2 steps");
    const bool first = part.front().is_event();
    const bool mixed = std::any_of(part.begin(), part.end(), [&](const TimeStep& s) { return s.is_event() != first; });
    if (!mixed) throw Error(std::string("unusable partition: ") + which + " has a single class");
  };
  check(ds.train, "train");
  check(ds.test, "test");
  return ds;
}

void write_steps(std::span<const TimeStep> steps, std::ostream& csv, std::ostream& sidecar_json) {
  csv << "step_id,design,start_day,end_day,label,n_messages\n";
  nlohmann::ordered_json sidecar = nlohmann::ordered_json::object();
  for (const auto& s : steps) {
    csv << s.id << ',' << to_string(s.design) << ',' << format_day(s.start_day) << ',' << format_day(s.end_day) << ','
        << s.label() << ',' << s.message_ids.size() << '\n';
    sidecar[s.id] = s.message_ids;
  }
  sidecar_json << sidecar.dump(1) << '\n';
}

std::vector<TimeStep> read_steps(std::istream& csv, std::istream& sidecar_json) {
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(sidecar_json);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("steps sidecar: ") + e.what());
  }
  std::string line;
  if (!std::getline(csv, line) || trim(line) != "step_id,design,start_day,end_day,label,n_messages") {
    throw InputError("steps.csv: unexpected header");
  }
  std::vector<TimeStep> steps;
  while (std::getline(csv, line)) {
    if (trim(line).empty()) continue;
    const auto f = parse_csv_line(line);
    if (f.size() != 6) throw InputError("steps.csv: expected 6 fields");
    TimeStep s;
    s.id = f[0];
    s.design = parse_step_design(f[1]);
    auto start = parse_day(f[2]);
    auto end = parse_day(f[3]);
    if (!start || !end) throw InputError("steps.csv: bad day in " + s.id);
    s.start_day = *start;
    s.end_day = *end;
    if (f[4] != "control") s.event_kind = parse_release_kind(f[4]);
    if (!sidecar.contains(s.id)) throw InputError("steps sidecar: missing " + s.id);
    s.message_ids = sidecar[s.id].get<std::vector<std::string>>();
    if (s.message_ids.size() != std::stoul(f[5])) throw InputError("steps.csv: message count mismatch for " + s.id);
    steps.push_back(std::move(s));
  }
  return steps;
}

}  // namespace microevent
