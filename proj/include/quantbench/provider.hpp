#pragma once

#include <filesystem>
#include <string>

#include "quantbench/market_data.hpp"

namespace quantbench::data {

struct ProviderConfig {
    std::string base_url;            // e.g. http://127.0.0.1:8080 or http://host/prefix
    std::filesystem::path cache_dir; // one CSV per (ticker, start, end)
    int max_attempts = 3;
    int retry_delay_ms = 250;        // doubled after each failed attempt
};

class ProviderClient {
public:
    explicit ProviderClient(ProviderConfig config);

    // Cache-first. On a miss issues GET <prefix>/history?ticker=..&start=..&end=..
    // and stores the raw response body, so replays parse identically.
    PriceSeries fetch_history(const std::string& ticker, const DateRange& range);

    std::filesystem::path cache_file(const std::string& ticker, const DateRange& range) const;

private:
    ProviderConfig config_;
};

} // namespace quantbench::data
