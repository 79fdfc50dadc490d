// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>

#include "dsrn/dsrnet.hpp"
#include "dsrn/enhance.hpp"

namespace dsrn {

// Checkpoint layout: one JSON header line {format_version, variant, shapes,
// seed, step, arch}, then all parameters as little-endian 64-bit floats in
// the declared shape order.
void save_estimator_checkpoint(const std::string &path, const MaskEstimatorParams &p,
                               uint64_t seed, int64_t step);
MaskEstimatorParams load_estimator_checkpoint(const std::string &path, uint64_t *seed = nullptr,
                                              int64_t *step = nullptr);

void save_dsrnet_checkpoint(const std::string &path, const DsrnetParams &p, uint64_t seed,
                            int64_t step);
DsrnetParams load_dsrnet_checkpoint(const std::string &path, uint64_t *seed = nullptr,
                                    int64_t *step = nullptr);

}  // namespace dsrn
