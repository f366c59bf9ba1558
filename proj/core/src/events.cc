// Copyright 2026 The MTA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mta/events.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "json_util.h"
#include "mta/error.h"

namespace mta {
namespace {

using internal::Json;

int kind_rank(EventKind kind) { return kind == EventKind::kAdQuery ? 0 : 1; }

FeatureValues parse_features(const Json& value, const std::string& context) {
  FeatureValues out;
  if (value.is_null()) return out;
  if (!value.is_object()) {
    throw DataError(context + ": features must be an object");
  }
  for (const auto& [name, level] : value.items()) {
    if (!level.is_string()) {
      throw DataError(context + ": feature '" + name +
                      "' must have a string level");
    }
    out.emplace(name, level.get<std::string>());
  }
  return out;
}

Event parse_event(const Json& value, const std::string& context) {
  Event event;
  const std::string kind = internal::require_string(value, "kind", context);
  if (kind == "ad") {
    event.kind = EventKind::kAdQuery;
  } else if (kind == "conversion") {
    event.kind = EventKind::kConversion;
  } else {
    throw DataError(context + ": unknown event kind '" + kind + "'");
  }
  event.t = internal::require_number(value, "t", context);
  if (auto it = value.find("shown"); it != value.end()) {
    if (!it->is_boolean()) {
      throw DataError(context + ": field 'shown' must be a boolean");
    }
    event.shown = it->get<bool>();
  }
  if (auto it = value.find("features"); it != value.end()) {
    event.features = parse_features(*it, context);
  }
  return event;
}

UserPath parse_path(const Json& record, const std::string& context) {
  UserPath path;
  path.user_id = internal::require_string(record, "user_id", context);
  const Json& window = internal::require(record, "window", context);
  if (!window.is_array() || window.size() != 2 || !window[0].is_number() ||
      !window[1].is_number()) {
    throw DataError(context + ": window must be [start, end]");
  }
  path.window = {window[0].get<double>(), window[1].get<double>()};
  if (auto it = record.find("user_features"); it != record.end()) {
    path.user_features = parse_features(*it, context);
  }
  if (auto it = record.find("events"); it != record.end()) {
    if (!it->is_array()) throw DataError(context + ": events must be an array");
    path.events.reserve(it->size());
    for (const Json& e : *it) path.events.push_back(parse_event(e, context));
  }
  return path;
}

Json features_json(const FeatureValues& features) {
  Json out = Json::object();
  for (const auto& [name, level] : features) out[name] = level;
  return out;
}

}  // namespace

void sort_events(std::vector<Event>& events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) {
                     if (a.t != b.t) return a.t < b.t;
                     return kind_rank(a.kind) < kind_rank(b.kind);
                   });
}

void validate_path(const UserPath& path) {
  const std::string who = "user '" + path.user_id + "'";
  if (path.user_id.empty()) throw DataError("empty user_id");
  if (!(path.window.start < path.window.end)) {
    throw DataError(who + ": window start must be before end");
  }
  auto check_features = [&](const FeatureValues& features) {
    for (const auto& [name, level] : features) {
      if (name.empty() || level.empty()) {
        throw DataError(who + ": feature names and levels must be non-empty");
      }
    }
  };
  check_features(path.user_features);
  const Event* previous = nullptr;
  for (const Event& event : path.events) {
    if (!path.window.contains(event.t)) {
      throw DataError(who + ": event outside window at t=" +
                      std::to_string(event.t));
    }
    check_features(event.features);
    if (previous != nullptr &&
        (event.t < previous->t ||
         (event.t == previous->t &&
          kind_rank(event.kind) < kind_rank(previous->kind)))) {
      throw DataError(who + ": events are not sorted");
    }
    previous = &event;
  }
}

UserPath normalize_path(UserPath path) {
  sort_events(path.events);
  validate_path(path);
  return path;
}

std::vector<UserPath> load_paths(std::istream& source,
                                 std::string_view schema) {
  if (schema != kPathsSchema) {
    throw DataError("unsupported path schema '" + std::string(schema) + "'");
  }
  std::vector<UserPath> paths;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(source, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string context = "line " + std::to_string(line_number);
    try {
      Json record = internal::parse_json(line, context);
      internal::check_schema(record, schema);
      UserPath path = normalize_path(parse_path(record, context));
      if (!seen.insert(path.user_id).second) {
        throw DataError("duplicate user_id '" + path.user_id + "'");
      }
      paths.push_back(std::move(path));
    } catch (const DataError& e) {
      const std::string message = e.what();
      if (message.rfind(context, 0) == 0) throw;
      throw DataError(context + ": " + message);
    }
  }
  return paths;
}

std::vector<UserPath> load_paths_file(const std::string& filename,
                                      std::string_view schema) {
  std::ifstream in(filename);
  if (!in) throw DataError("cannot open path file '" + filename + "'");
  return load_paths(in, schema);
}

std::string path_to_json_line(const UserPath& path) {
  Json record;
  record["user_id"] = path.user_id;
  record["window"] = Json::array({path.window.start, path.window.end});
  if (!path.user_features.empty()) {
    record["user_features"] = features_json(path.user_features);
  }
  Json events = Json::array();
  for (const Event& event : path.events) {
    Json e;
    e["t"] = event.t;
    if (event.is_conversion()) {
      e["kind"] = "conversion";
    } else {
      e["kind"] = "ad";
      e["shown"] = event.shown;
      e["features"] = features_json(event.features);
    }
    events.push_back(std::move(e));
  }
  record["events"] = std::move(events);
  return record.dump();
}

void write_paths(std::ostream& out, std::span<const UserPath> paths) {
  for (const UserPath& path : paths) out << path_to_json_line(path) << '\n';
}

std::size_t conversions_in(const UserPath& path, Time s, Time t) {
  if (s > t) throw std::invalid_argument("conversions_in: s > t");
  std::size_t count = 0;
  for (const Event& event : path.events) {
    if (event.is_conversion() && event.t > s && event.t <= t) ++count;
  }
  return count;
}

std::size_t conversion_count(const UserPath& path) {
  return static_cast<std::size_t>(
      std::count_if(path.events.begin(), path.events.end(),
                    [](const Event& e) { return e.is_conversion(); }));
}

std::vector<Time> conversion_times(const UserPath& path) {
  std::vector<Time> out;
  for (const Event& event : path.events) {
    if (event.is_conversion()) out.push_back(event.t);
  }
  return out;
}

std::vector<std::size_t> query_event_indices(const UserPath& path,
                                             bool shown_only) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < path.events.size(); ++i) {
    const Event& event = path.events[i];
    if (shown_only ? event.is_ad() : event.is_query()) out.push_back(i);
  }
  return out;
}

}  // namespace mta
