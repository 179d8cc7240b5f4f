#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "microevent/corpus.hpp"
#include "microevent/timeutil.hpp"

namespace testing_helpers {

inline microevent::Timestamp ts(const std::string& iso) { return *microevent::parse_iso8601(iso); }

inline microevent::Message msg(const std::string& id, const std::string& iso, const std::string& body = "",
                               std::vector<std::string> tags = {}) {
  microevent::Message m;
  m.id = id;
  m.timestamp = ts(iso);
  m.body_raw = body;
  m.tags = std::move(tags);
  return m;
}

inline microevent::ReleaseEvent event(const std::string& package, const std::string& iso, microevent::ReleaseKind kind,
                                      const std::string& version = "1.0.0") {
  return {package, version, ts(iso), kind};
}

}  // namespace testing_helpers
