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

// Internal JSON helpers shared by the serializers. Not installed.

#ifndef MTA_SRC_JSON_UTIL_H_
#define MTA_SRC_JSON_UTIL_H_

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace mta::internal {

using Json = nlohmann::json;

// Typed field access that throws DataError naming the field.
const Json& require(const Json& object, std::string_view field,
                    std::string_view context);
double require_number(const Json& object, std::string_view field,
                      std::string_view context);
std::string require_string(const Json& object, std::string_view field,
                           std::string_view context);

// Parses `text` or throws DataError with `context` prefixed.
Json parse_json(std::string_view text, std::string_view context);

void check_schema(const Json& document, std::string_view expected);

}  // namespace mta::internal

#endif  // MTA_SRC_JSON_UTIL_H_
