// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

// Entry point of the depdse command-line tool, kept in a library so the
// commands can be driven from tests.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace depdse::cli {

inline constexpr int kExitOk = 0;
/// The computation ran but failed: bad input data, non-convergence, too
/// many bootstrap failures, unwritable output.
inline constexpr int kExitFailure = 1;
/// Bad flags or flag values.
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace depdse::cli
