#include "quantbench/provider.hpp"

#include <cctype>
#include <chrono>
#include <fstream>
#include <thread>
#include <unistd.h>

#include "httplib.h"

namespace quantbench::data {

namespace {

std::string sanitize(const std::string& ticker) {
    std::string out;
    for (const char c : ticker) {
        const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
        out += safe ? c : '_';
    }
    return out;
}

std::string url_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (const unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

// Split "http://host:port/prefix" into the client root and the path prefix.
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme = url.find("://");
    const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

void write_atomic(const std::filesystem::path& file, const std::string& body) {
    auto tmp = file;
    tmp += ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write cache file " + tmp.string());
        out << body;
    }
    std::filesystem::rename(tmp, file);
}

} // namespace

ProviderClient::ProviderClient(ProviderConfig config) : config_(std::move(config)) {}

std::filesystem::path ProviderClient::cache_file(const std::string& ticker,
                                                 const DateRange& range) const {
    const auto name =
        sanitize(ticker) + "__" + to_string(range.start) + "__" + to_string(range.end) + ".csv";
    return config_.cache_dir / name;
}

PriceSeries ProviderClient::fetch_history(const std::string& ticker, const DateRange& range) {
    if (ticker.empty()) throw UsageError("ticker must be non-empty");
    if (range.end < range.start) {
        throw UsageError("date range start " + to_string(range.start) + " is after end " +
                         to_string(range.end));
    }

    const auto cached = cache_file(ticker, range);
    if (std::filesystem::exists(cached)) {
        return load_csv_file(cached, ticker);
    }

    if (config_.base_url.empty()) {
        throw DataError("no cached data for " + ticker + " in " + to_string(range.start) + ".." +
                        to_string(range.end) + " and no provider URL configured");
    }

    const auto [root, prefix] = split_url(config_.base_url);
    const auto path = prefix + "/history?ticker=" + url_encode(ticker) +
                      "&start=" + to_string(range.start) + "&end=" + to_string(range.end);

    std::string body;
    std::string last_failure = "no attempts made";
    bool got_body = false;
    int delay_ms = config_.retry_delay_ms;
    for (int attempt = 1; attempt <= std::max(1, config_.max_attempts); ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            delay_ms *= 2;
        }
        httplib::Client client(root);
        client.set_connection_timeout(5, 0);
        client.set_read_timeout(10, 0);
        auto res = client.Get(path);
        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == httplib::StatusCode::NotFound_404) {
            throw UnknownTicker("provider has no data for ticker " + ticker);
        }
        if (res->status != httplib::StatusCode::OK_200) {
            last_failure = "HTTP status " + std::to_string(res->status);
            continue;
        }
        body = res->body;
        got_body = true;
        break;
    }
    if (!got_body) {
        throw NetworkError("provider request for " + ticker + " failed after " +
                           std::to_string(std::max(1, config_.max_attempts)) + " attempts (" +
                           last_failure + ")");
    }

    auto series = parse_csv(body, ticker);
    std::filesystem::create_directories(config_.cache_dir);
    write_atomic(cached, body);
    return series;
}

} // namespace quantbench::data
