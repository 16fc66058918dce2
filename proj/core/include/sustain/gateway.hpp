#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sustain/series.hpp"

namespace sustain {

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Injected behind fetch() so tests can stub the network.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse get(const std::string& url) = 0;
};

/// cpp-httplib GET with up to 3 attempts and linear backoff.
std::unique_ptr<HttpTransport> make_default_transport();

/// A statistical-agency CSV extract: where it lives, how its columns map
/// onto series, and the content hash of the pinned snapshot. Pinned
/// fixtures carry an empty url and resolve with no network.
struct SourceDescriptor {
    std::string name;
    std::string url;
    CsvSchema schema;
    std::string sha256;                // hex digest; empty = unpinned
    std::filesystem::path cache_path;  // empty: <cache_root>/<name>.csv
};

struct FetchOptions {
    bool offline = false;
    std::filesystem::path cache_root;     // empty: default_cache_root()
    HttpTransport* transport = nullptr;   // null: default transport
};

/// Resolves a source to a Dataset: embedded fixture body, warm cache, or
/// network fetch (cache written atomically). Checksums are verified on
/// every read; a mismatch is an error naming both hashes, never silent.
Dataset fetch(const SourceDescriptor& source, const FetchOptions& options = {});

std::string sha256_hex(std::string_view bytes);

/// $SUSTAIN_CACHE_DIR, else ~/.cache/sustain, else <tmp>/sustain-cache.
std::filesystem::path default_cache_root();

std::vector<std::string> fixture_names();
const SourceDescriptor* find_fixture(std::string_view name);
std::string_view fixture_body(std::string_view name);
Dataset load_fixture(std::string_view name);

/// Fixture name or CSV path; paths need a schema.
Dataset resolve_dataset(const std::string& reference,
                        const std::optional<CsvSchema>& schema, bool offline);

}  // namespace sustain
