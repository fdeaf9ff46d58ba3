// Copyright 2026 The fksynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FKSYNTH_TESTS_SUPPORT_INTEGRITY_H_
#define FKSYNTH_TESTS_SUPPORT_INTEGRITY_H_

#include <string>
#include <vector>

#include "fksynth/datastore.h"

namespace fksynth::testing {

// Re-encodes every relation to CSV, loads the result back against the
// schema and checks references from scratch: keys unique, every foreign key
// resolves, no parent exceeds its multiplicity bound. Returns one message
// per violation.
std::vector<std::string> CheckIntegrity(const Database& db);

}  // namespace fksynth::testing

#endif  // FKSYNTH_TESTS_SUPPORT_INTEGRITY_H_
