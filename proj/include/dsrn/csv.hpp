// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <charconv>
#include <string>

namespace dsrn {

// Shortest round-trip decimal form; deterministic across runs.
inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace dsrn
