// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#define LAYOUTKIT_VERSION_MAJOR 0
#define LAYOUTKIT_VERSION_MINOR 1
#define LAYOUTKIT_VERSION_PATCH 0
#define LAYOUTKIT_VERSION "0.1.0"

namespace layoutkit {

inline const char* version() { return LAYOUTKIT_VERSION; }

}  // namespace layoutkit
