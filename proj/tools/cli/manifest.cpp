// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cli/manifest.hpp"

#include <chrono>
#include <ctime>

#include <fmt/format.h>

#ifndef DEPDSE_VERSION
#define DEPDSE_VERSION "unknown"
#endif

namespace depdse::cli {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex_digest(std::uint64_t digest) {
  return fmt::format("fnv1a64:{:016x}", digest);
}

Json to_json(const RunManifest& m) {
  Json inputs = Json::array();
  for (const auto& in : m.inputs) {
    inputs.push_back({{"path", in.path},
                      {"bytes", in.bytes},
                      {"digest", hex_digest(in.digest)}});
  }
  return Json{{"command", m.command},
              {"arguments", m.arguments},
              {"inputs", inputs},
              {"options", m.options},
              {"seed", m.seed},
              {"version", m.version},
              {"timestamp", m.timestamp},
              {"output_digest", hex_digest(m.output_digest)}};
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string_view tool_version() noexcept { return DEPDSE_VERSION; }

}  // namespace depdse::cli
