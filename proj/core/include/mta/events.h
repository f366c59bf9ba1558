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

// Path and event data model. A UserPath is one user's observation window
// together with the time-ordered ad/query and conversion events seen in it.
// Times are abstract days.

#ifndef MTA_EVENTS_H_
#define MTA_EVENTS_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mta {

using Time = double;

inline constexpr std::string_view kPathsSchema = "mta-paths/1";

struct ObservationWindow {
  Time start = 0.0;
  Time end = 0.0;

  Time length() const { return end - start; }
  bool contains(Time t) const { return t >= start && t <= end; }

  friend bool operator==(const ObservationWindow&,
                         const ObservationWindow&) = default;
};

// Categorical feature name -> level. Names and levels are non-empty.
using FeatureValues = std::map<std::string, std::string>;

enum class EventKind { kAdQuery, kConversion };

// An AdQuery event is always a query event; when `shown` is true it is also
// an ad event. `shown` and `features` are unused on conversions.
struct Event {
  EventKind kind = EventKind::kAdQuery;
  Time t = 0.0;
  bool shown = true;
  FeatureValues features;

  bool is_query() const { return kind == EventKind::kAdQuery; }
  bool is_ad() const { return kind == EventKind::kAdQuery && shown; }
  bool is_conversion() const { return kind == EventKind::kConversion; }

  friend bool operator==(const Event&, const Event&) = default;
};

struct UserPath {
  std::string user_id;
  ObservationWindow window;
  FeatureValues user_features;
  std::vector<Event> events;

  friend bool operator==(const UserPath&, const UserPath&) = default;
};

// Stable sort by time; at equal times AdQuery events precede conversions, so
// a conversion simultaneous with an ad sees that ad's effect.
void sort_events(std::vector<Event>& events);

// Throws DataError describing the first violated invariant.
void validate_path(const UserPath& path);

// Sorts events and validates. Returns the normalized path.
UserPath normalize_path(UserPath path);

// Reads line-delimited path records. Blank lines are skipped. Errors carry
// the 1-based line number.
std::vector<UserPath> load_paths(std::istream& source,
                                 std::string_view schema = kPathsSchema);
std::vector<UserPath> load_paths_file(const std::string& filename,
                                      std::string_view schema = kPathsSchema);

std::string path_to_json_line(const UserPath& path);
void write_paths(std::ostream& out, std::span<const UserPath> paths);

// Number of conversions with time in (s, t]. Requires s <= t.
std::size_t conversions_in(const UserPath& path, Time s, Time t);

std::size_t conversion_count(const UserPath& path);
std::vector<Time> conversion_times(const UserPath& path);

// Indices into path.events of the AdQuery events, in path order. When
// `shown_only` is set only ad events are returned.
std::vector<std::size_t> query_event_indices(const UserPath& path,
                                             bool shown_only);

}  // namespace mta

#endif  // MTA_EVENTS_H_
