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

#ifndef FKSYNTH_TESTS_SUPPORT_FIXTURES_H_
#define FKSYNTH_TESTS_SUPPORT_FIXTURES_H_

#include "fksynth/datastore.h"
#include "fksynth/rng.h"

namespace fksynth::testing {

// The five-row child relation with binary A1..A3 whose FK column is
// [1,1,2,2,2], under a two-row parent relation.
DatabaseSchema TwoGroupSchema();
Database TwoGroupDatabase();

// Builds a CSV table from literal rows.
CsvTable MakeCsv(std::vector<std::string> header,
                 std::vector<std::vector<std::string>> rows);

// Random instance: rows[r] tuples per relation with uniform attribute
// values and uniformly chosen references, then truncated to the bounds.
Database RandomDatabase(const DatabaseSchema& schema, const std::vector<int>& rows,
                        RngStream rng);

}  // namespace fksynth::testing

#endif  // FKSYNTH_TESTS_SUPPORT_FIXTURES_H_
