#pragma once

#include <string>

#include "analytika/bytes.hpp"

namespace analytika {

// GET {endpoint}?apikey={key}&sha256={sha256}; the body is returned only if
// its SHA-256 equals `sha256`. Throws FetchError{NetworkError, HashMismatch,
// HttpStatus}.
Bytes fetch_by_hash(const std::string& sha256, const std::string& endpoint, const std::string& api_key,
                    int timeout_seconds = 300);

}  // namespace analytika
