// Copyright 2026 The dressed-relax Authors
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

#pragma once

#include <string>
#include <vector>

#include "dressed/cli/config.hpp"

namespace dressed::cli {

struct RunOutput {
  std::vector<std::string> files;  // written, relative to the output directory
  double wall_seconds = 0.0;
};

/// Runs the configured scenario and writes its CSV/JSON files plus
/// manifest.txt into out_dir (created if needed). Result files depend only
/// on the config; the manifest also records versions and wall time.
/// Module errors propagate as exceptions.
RunOutput run_scenario(const RunConfig& config, const std::string& out_dir);

}  // namespace dressed::cli
