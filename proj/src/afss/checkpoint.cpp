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

#include "afss/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "afss/error.hpp"
#include "afss/manifest.hpp"

namespace afss {
namespace {

constexpr char kMagic[8] = {'A', 'F', 'S', 'S', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes a little-endian host");

template <typename T>
void Put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T Take(const std::string& in, std::size_t& pos, const std::filesystem::path& path) {
  if (pos + sizeof(T) > in.size()) throw FormatError(path.string() + ": truncated checkpoint");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

const Eigen::MatrixXd& Checkpoint::Tensor(const std::string& name) const {
  const auto it = tensors.find(name);
  if (it == tensors.end()) throw FormatError("checkpoint has no tensor '" + name + "'");
  return it->second;
}

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json header = ckpt.header;
  header["tensors"] = nlohmann::json::array();
  for (const auto& [name, t] : ckpt.tensors) header["tensors"].push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}});
  const std::string text = header.dump();
  std::string out(kMagic, sizeof(kMagic));
  Put<std::uint32_t>(out, kCheckpointVersion);
  Put<std::uint64_t>(out, text.size());
  out += text;
  for (const auto& [name, t] : ckpt.tensors)
    out.append(reinterpret_cast<const char*>(t.data()), static_cast<std::size_t>(t.size()) * sizeof(double));
  AtomicWrite(path, out);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), {}};
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw FormatError(path.string() + ": not an AFSS checkpoint");
  std::size_t pos = sizeof(kMagic);
  const auto version = Take<std::uint32_t>(bytes, pos, path);
  if (version != kCheckpointVersion)
    throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  const auto header_len = Take<std::uint64_t>(bytes, pos, path);
  if (pos + header_len > bytes.size()) throw FormatError(path.string() + ": truncated checkpoint header");
  Checkpoint ckpt;
  try {
    ckpt.header = nlohmann::json::parse(bytes.substr(pos, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad checkpoint header: " + e.what());
  }
  pos += header_len;
  if (!ckpt.header.contains("tensors") || !ckpt.header["tensors"].is_array())
    throw FormatError(path.string() + ": checkpoint header lacks a tensor list");
  for (const auto& entry : ckpt.header["tensors"]) {
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    if (rows < 0 || cols < 0) throw FormatError(path.string() + ": negative tensor shape");
    const std::size_t n = static_cast<std::size_t>(rows * cols) * sizeof(double);
    if (pos + n > bytes.size()) throw FormatError(path.string() + ": truncated tensor payload");
    Eigen::MatrixXd t(rows, cols);
    std::memcpy(t.data(), bytes.data() + pos, n);
    pos += n;
    ckpt.tensors[entry.at("name").get<std::string>()] = std::move(t);
  }
  if (pos != bytes.size()) throw FormatError(path.string() + ": trailing bytes after checkpoint payload");
  ckpt.header.erase("tensors");
  return ckpt;
}

}  // namespace afss
