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

#include "json_util.h"

#include "mta/error.h"

namespace mta::internal {

const Json& require(const Json& object, std::string_view field,
                    std::string_view context) {
  if (!object.is_object()) {
    throw DataError(std::string(context) + ": expected a JSON object");
  }
  auto it = object.find(field);
  if (it == object.end()) {
    throw DataError(std::string(context) + ": missing field '" +
                    std::string(field) + "'");
  }
  return *it;
}

double require_number(const Json& object, std::string_view field,
                      std::string_view context) {
  const Json& value = require(object, field, context);
  if (!value.is_number()) {
    throw DataError(std::string(context) + ": field '" + std::string(field) +
                    "' must be a number");
  }
  return value.get<double>();
}

std::string require_string(const Json& object, std::string_view field,
                           std::string_view context) {
  const Json& value = require(object, field, context);
  if (!value.is_string()) {
    throw DataError(std::string(context) + ": field '" + std::string(field) +
                    "' must be a string");
  }
  return value.get<std::string>();
}

Json parse_json(std::string_view text, std::string_view context) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError(std::string(context) + ": malformed JSON (" + e.what() +
                    ")");
  }
}

void check_schema(const Json& document, std::string_view expected) {
  auto it = document.find("schema");
  if (it == document.end()) return;
  if (!it->is_string() || it->get<std::string>() != expected) {
    throw DataError("unsupported schema " + it->dump() + ", expected \"" +
                    std::string(expected) + "\"");
  }
}

}  // namespace mta::internal
