#pragma once

#include <string>
#include <string_view>

namespace abkit::byproduct {

// Lowercase hex HMAC-SHA256 of `message` under `key`.
std::string hmac_sha256_hex(std::string_view key, std::string_view message);

// Non-reversible worker identifier: first 16 hex chars of the keyed hash.
std::string anonymize_worker_id(std::string_view key, std::string_view raw_worker_id);

// Constant-time comparison for secrets of equal length.
bool secure_equals(std::string_view a, std::string_view b);

}  // namespace abkit::byproduct
