// Copyright 2026 The blockpost Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BLOCKPOST_IO_H_
#define BLOCKPOST_IO_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "blockpost/model.h"

namespace blockpost {

// Version of the spec / plan / output file schemas in docs/file-formats.md.
inline constexpr int kSchemaVersion = 1;

// Shortest decimal string that round-trips to the same double.
std::string FormatShortest(double x);
// 17 significant digits (%.17g).
std::string Format17(double x);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view content);

ModelSpec ParseSpecJson(std::string_view text);
ModelSpec LoadSpec(const std::filesystem::path& path);
std::string SpecToJson(const ModelSpec& spec);

// The "family" object of a spec on its own.
Family ParseFamilyJson(std::string_view text);
std::string FamilyJson(const Family& family);

// Labels are 1-based in the JSON form: {"z": [...], "w": [...]}.
std::string ConfigurationToJson(const Configuration& config);
Configuration ParseConfigurationJson(std::string_view text,
                                     const ModelSpec& spec);
Configuration LoadConfiguration(const std::filesystem::path& path,
                                const ModelSpec& spec);

// "# index_set=<kind>" then "i,j,value" rows, 1-based, row-major.
// Discrete families print integers; continuous ones use 17 significant
// digits.
void WriteObservationsCsv(std::ostream& out, const ObservationMatrix& x,
                          const Family& family);
std::string ObservationsToCsv(const ObservationMatrix& x, const Family& family);
// Dimensions are inferred from the largest indices. The domain must be
// exactly the declared index set.
ObservationMatrix ReadObservationsCsv(std::istream& in);
ObservationMatrix LoadObservations(const std::filesystem::path& path);

// Throws unless x matches the spec's index set and family support.
void CheckObservations(const ObservationMatrix& x, const ModelSpec& spec);

}  // namespace blockpost

#endif  // BLOCKPOST_IO_H_
