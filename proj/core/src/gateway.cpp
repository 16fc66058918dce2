#include "sustain/gateway.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "httplib.h"

namespace sustain {

namespace {

constexpr int kMaxAttempts = 3;
constexpr std::chrono::milliseconds kBackoffStep{200};

class HttplibTransport final : public HttpTransport {
public:
    HttpResponse get(const std::string& url) override {
        auto split = split_url(url);
        httplib::Client client(split.first);
        client.set_follow_location(true);
        for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
            auto res = client.Get(split.second);
            if (res) return {res->status, res->body};
            if (attempt < kMaxAttempts) std::this_thread::sleep_for(kBackoffStep * attempt);
        }
        return {0, {}};
    }

private:
    static std::pair<std::string, std::string> split_url(const std::string& url) {
        auto scheme_end = url.find("://");
        size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        auto path_start = url.find('/', host_start);
        if (path_start == std::string::npos) return {url, "/"};
        return {url.substr(0, path_start), url.substr(path_start)};
    }
};

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot read " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Write-to-temp plus rename so concurrent readers never see a torn file.
void atomic_write(const std::filesystem::path& p, std::string_view bytes) {
    if (!p.parent_path().empty()) std::filesystem::create_directories(p.parent_path());
    std::filesystem::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    std::filesystem::rename(tmp, p);
}

void verify_checksum(const std::string& name, std::string_view body, const std::string& expected) {
    if (expected.empty()) return;
    std::string actual = sha256_hex(body);
    if (actual != expected)
        throw DataError("checksum mismatch for '" + name + "': expected " + expected + ", actual " +
                        actual);
}

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::unique_ptr<HttpTransport> make_default_transport() {
    return std::make_unique<HttplibTransport>();
}

std::filesystem::path default_cache_root() {
    if (const char* env = std::getenv("SUSTAIN_CACHE_DIR"); env && *env)
        return std::filesystem::path(env);
    if (const char* home = std::getenv("HOME"); home && *home)
        return std::filesystem::path(home) / ".cache" / "sustain";
    return std::filesystem::temp_directory_path() / "sustain-cache";
}

std::vector<std::string> fixture_names() { return detail::fixture_entry_names(); }

const SourceDescriptor* find_fixture(std::string_view name) {
    static const std::map<std::string, SourceDescriptor, std::less<>> registry = [] {
        std::map<std::string, SourceDescriptor, std::less<>> m;
        for (const auto& fixture_name : detail::fixture_entry_names()) {
            const detail::FixtureEntry* entry = detail::find_fixture_entry(fixture_name);
            SourceDescriptor d;
            d.name = entry->name;
            d.schema = CsvSchema::parse(entry->schema);
            d.sha256 = entry->sha256;
            m.emplace(d.name, std::move(d));
        }
        return m;
    }();
    auto it = registry.find(name);
    return it == registry.end() ? nullptr : &it->second;
}

std::string_view fixture_body(std::string_view name) {
    const detail::FixtureEntry* entry = detail::find_fixture_entry(name);
    if (!entry) throw DataError("unknown fixture '" + std::string(name) + "'");
    return entry->body;
}

Dataset load_fixture(std::string_view name) {
    const SourceDescriptor* d = find_fixture(name);
    if (!d) throw DataError("unknown fixture '" + std::string(name) + "'");
    return fetch(*d);
}

Dataset fetch(const SourceDescriptor& source, const FetchOptions& options) {
    // Pinned fixture: embedded body, no cache, no network.
    if (source.url.empty()) {
        std::string_view body = fixture_body(source.name);
        verify_checksum(source.name, body, source.sha256);
        Dataset ds = load_csv_text(body, source.schema, source.name);
        ds.provenance().source = source.name;
        return ds;
    }

    std::filesystem::path cache_file = source.cache_path;
    if (cache_file.empty()) {
        std::filesystem::path root =
            options.cache_root.empty() ? default_cache_root() : options.cache_root;
        cache_file = root / (source.name + ".csv");
    }
    std::filesystem::path digest_file = cache_file;
    digest_file.replace_extension(".sha256");

    if (std::filesystem::exists(cache_file)) {
        std::string body = read_file(cache_file);
        if (!source.sha256.empty()) {
            verify_checksum(source.name, body, source.sha256);
        } else if (std::filesystem::exists(digest_file)) {
            std::string recorded = read_file(digest_file);
            while (!recorded.empty() && (recorded.back() == '\n' || recorded.back() == '\r'))
                recorded.pop_back();
            verify_checksum(source.name, body, recorded);
        }
        Dataset ds = load_csv_text(body, source.schema, source.name);
        ds.provenance().source = source.name;
        return ds;
    }

    if (options.offline)
        throw DataError("offline and no cached copy of '" + source.name + "' at " +
                        cache_file.string());

    std::unique_ptr<HttpTransport> owned;
    HttpTransport* transport = options.transport;
    if (!transport) {
        owned = make_default_transport();
        transport = owned.get();
    }
    HttpResponse response = transport->get(source.url);
    if (response.status != 200)
        throw DataError("fetch of '" + source.name + "' from " + source.url + " failed (status " +
                        std::to_string(response.status) + ")");
    verify_checksum(source.name, response.body, source.sha256);
    Dataset ds = load_csv_text(response.body, source.schema, source.name);
    atomic_write(cache_file, response.body);
    atomic_write(digest_file, sha256_hex(response.body) + "\n");
    ds.provenance().source = source.name;
    ds.provenance().retrieved_at = now_iso8601();
    return ds;
}

Dataset resolve_dataset(const std::string& reference, const std::optional<CsvSchema>& schema,
                        bool offline) {
    if (const SourceDescriptor* fixture = find_fixture(reference)) {
        if (schema)
            throw DataError("fixture '" + reference + "' carries its own schema; drop the override");
        FetchOptions opts;
        opts.offline = offline;
        return fetch(*fixture, opts);
    }
    if (!schema)
        throw DataError("'" + reference + "' is not a known fixture; loading a CSV needs a schema");
    return load_csv(std::filesystem::path(reference), *schema);
}

}  // namespace sustain
