// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

// Run provenance written next to every report.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace depdse::cli {

using Json = nlohmann::ordered_json;

/// 64-bit FNV-1a. Not cryptographic; only detects accidental changes.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex_digest(std::uint64_t digest);

struct InputRecord {
  std::string path;
  std::uint64_t digest = 0;
  std::size_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::vector<InputRecord> inputs;
  Json options = Json::object();
  std::uint64_t seed = 0;
  std::string version;
  std::string timestamp;
  /// Digest of the serialized "result" object.
  std::uint64_t output_digest = 0;
};

Json to_json(const RunManifest& m);

/// UTC, ISO 8601 with seconds.
std::string utc_timestamp();

std::string_view tool_version() noexcept;

}  // namespace depdse::cli
