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

#ifndef MTA_ERROR_H_
#define MTA_ERROR_H_

#include <stdexcept>
#include <string>

namespace mta {

// Malformed or inconsistent input data: path files, model documents, credit
// files. The CLI maps this to exit code 4.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model structure that cannot support the requested operation, e.g.
// segmenting a path under a continuous basis.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mta

#endif  // MTA_ERROR_H_
