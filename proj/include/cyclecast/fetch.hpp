#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cyclecast/dataset.hpp"

namespace cyclecast {

struct ProviderConfig {
  std::string provider_id;  // "fred" or "eurostat"
  std::string base_url;
  std::optional<std::string> api_key;
  double rate_limit_per_minute = 60.0;

  void validate() const;
};

// Reads CYCLECAST_<PROVIDER>_KEY, provider id upper-cased.
std::optional<std::string> api_key_from_env(const std::string& provider_id);
std::string api_key_env_var(const std::string& provider_id);

struct HttpResponse {
  long status = 0;
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Throws NetworkError when no response could be obtained.
  virtual HttpResponse get(const std::string& url) = 0;
};

// libcurl-backed transport.
class CurlTransport final : public HttpTransport {
 public:
  explicit CurlTransport(long timeout_seconds = 30);
  HttpResponse get(const std::string& url) override;

 private:
  long timeout_seconds_;
};

class Clock {
 public:
  using time_point = std::chrono::system_clock::time_point;
  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_until(time_point t) = 0;
};

class SystemClock final : public Clock {
 public:
  time_point now() override { return std::chrono::system_clock::now(); }
  void sleep_until(time_point t) override;
};

// Test clock: sleeping just advances the current time.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(time_point start = time_point{}) : now_(start) {}
  time_point now() override { return now_; }
  void sleep_until(time_point t) override {
    if (t > now_) now_ = t;
  }
  void advance(std::chrono::milliseconds d) { now_ += d; }

 private:
  time_point now_;
};

// Sliding 60-second window limiter; thread-safe.
class RateLimiter {
 public:
  RateLimiter(double per_minute, Clock& clock);
  // Blocks (via the clock) until one more request fits in the window.
  void acquire();

 private:
  std::size_t capacity_;
  std::chrono::milliseconds window_;
  Clock& clock_;
  std::mutex mu_;
  std::deque<Clock::time_point> recent_;
};

struct DatedObservation {
  int year = 0;
  int month = 0;
  int day = 1;
  double value = 0.0;
};

// Collapses sub-monthly observations to one value per month: the last one by date.
std::map<MonthStamp, double> aggregate_monthly_last(std::span<const DatedObservation> obs);

class ProviderAdapter {
 public:
  virtual ~ProviderAdapter() = default;
  virtual std::string request_url(const ProviderConfig& cfg, const std::string& series_id) const = 0;
  // Throws AuthError, UnknownSeries, NonNumericPayload or NetworkError.
  virtual std::vector<DatedObservation> parse(const HttpResponse& response,
                                              const std::string& series_id) const = 0;
};

// FRED series/observations JSON. Missing values (".") are skipped.
class FredAdapter final : public ProviderAdapter {
 public:
  std::string request_url(const ProviderConfig& cfg, const std::string& series_id) const override;
  std::vector<DatedObservation> parse(const HttpResponse& response, const std::string& series_id) const override;
};

// Eurostat dissemination API, JSON-stat 2.0. Series ids look like
// "prc_hicp_manr?geo=EA&coicop=CP00" and must select a single time series.
class EurostatAdapter final : public ProviderAdapter {
 public:
  std::string request_url(const ProviderConfig& cfg, const std::string& series_id) const override;
  std::vector<DatedObservation> parse(const HttpResponse& response, const std::string& series_id) const override;
};

std::unique_ptr<ProviderAdapter> make_adapter(const std::string& provider_id);

struct CacheEntry {
  std::string provider_id;
  std::string series_id;
  Clock::time_point fetched_at;
  RawSeries payload;
};

// One JSON file per (provider, series) under `root`, written atomically.
class SeriesCache {
 public:
  explicit SeriesCache(std::filesystem::path root);

  std::filesystem::path entry_path(const std::string& provider_id, const std::string& series_id) const;
  std::optional<CacheEntry> get(const std::string& provider_id, const std::string& series_id) const;
  void put(const CacheEntry& entry) const;

 private:
  std::filesystem::path root_;
};

struct FetchOptions {
  bool offline = false;
  // Cached entries younger than this are served without a request; unset means always fresh.
  std::optional<std::chrono::seconds> max_age;
};

class FetchClient {
 public:
  FetchClient(ProviderConfig cfg, HttpTransport& transport, SeriesCache& cache, Clock& clock);
  FetchClient(ProviderConfig cfg, std::unique_ptr<ProviderAdapter> adapter, HttpTransport& transport,
              SeriesCache& cache, Clock& clock);

  // Cache hit when fresh; otherwise one rate-limited request. Offline mode
  // throws CacheMiss instead of touching the network.
  RawSeries fetch_series(const std::string& series_id, Region region, Category category,
                         const FetchOptions& opts = {});

  std::size_t network_calls() const noexcept { return network_calls_; }

 private:
  ProviderConfig cfg_;
  std::unique_ptr<ProviderAdapter> adapter_;
  HttpTransport& transport_;
  SeriesCache& cache_;
  Clock& clock_;
  RateLimiter limiter_;
  std::atomic<std::size_t> network_calls_{0};
};

}  // namespace cyclecast
