// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string_view>

// FNV-1a 64-bit digests used for frame fingerprinting and the stub
// generator's context hashing.
namespace wmkit::digest {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = kFnvOffset) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvOffset) {
    return fnv1a64(s.data(), s.size(), h);
}

inline std::uint64_t mix_u64(std::uint64_t value, std::uint64_t h) {
    return fnv1a64(&value, sizeof(value), h);
}

/// Bit pattern of the double, so -0.0 and 0.0 digest differently and NaNs
/// are stable.
inline std::uint64_t mix_double(double value, std::uint64_t h) {
    return mix_u64(std::bit_cast<std::uint64_t>(value), h);
}

} // namespace wmkit::digest
