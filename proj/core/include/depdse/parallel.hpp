// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace depdse {

/// Environment variable holding the default thread cap.
inline constexpr const char* kThreadsEnvVar = "DEPDSE_THREADS";

/// 0 means "use DEPDSE_THREADS, else hardware concurrency". Always >= 1.
unsigned resolve_threads(unsigned requested) noexcept;

/// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks must
/// write only to their own slot of any shared output. The first exception
/// thrown by a task is rethrown after all workers have stopped.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& task);

}  // namespace depdse
