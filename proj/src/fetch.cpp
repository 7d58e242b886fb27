#include "analytika/fetch.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "analytika/apk_container.hpp"
#include "analytika/error.hpp"

namespace analytika {

Bytes fetch_by_hash(const std::string& sha256, const std::string& endpoint, const std::string& api_key,
                    int timeout_seconds) {
    // Split "scheme://host[:port]/path" into client base and request path.
    const std::size_t scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) throw FetchError(FetchErrc::NetworkError, "endpoint lacks a scheme: " + endpoint);
    const std::size_t path_start = endpoint.find('/', scheme_end + 3);
    const std::string base = endpoint.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : endpoint.substr(path_start);

    httplib::Client client(base);
    if (!client.is_valid()) throw FetchError(FetchErrc::NetworkError, "unsupported endpoint: " + endpoint);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    client.set_follow_location(true);

    const httplib::Params params{{"apikey", api_key}, {"sha256", sha256}};
    auto res = client.Get(path, params, httplib::Headers{});
    if (!res) throw FetchError(FetchErrc::NetworkError, "request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw FetchError(FetchErrc::HttpStatus, "HTTP status " + std::to_string(res->status), res->status);

    Bytes body(res->body.begin(), res->body.end());
    const std::string got = sha256_digest(body);
    if (got != sha256) throw FetchError(FetchErrc::HashMismatch, "hash mismatch: expected " + sha256 + ", got " + got);
    return body;
}

}  // namespace analytika
