// Copyright 2026  The AFSS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace afss {

// Container layout:
//   8 bytes  magic "AFSSCKPT"
//   u32      format version
//   u64      header length in bytes
//   header   UTF-8 JSON; "tensors" lists {name, rows, cols} in storage order
//   payload  each tensor's values as little-endian float64, column-major
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json header = nlohmann::json::object();
  std::map<std::string, Eigen::MatrixXd> tensors;

  const Eigen::MatrixXd& Tensor(const std::string& name) const;
};

// Written atomically (temp file, then rename).
void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace afss
