#include "cyclecast/fetch.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <curl/curl.h>
#include <nlohmann/json.hpp>

#include "cyclecast/error.hpp"

namespace cyclecast {

using json = nlohmann::json;

void ProviderConfig::validate() const {
  if (provider_id.empty()) throw Error(Errc::ConfigError, "provider_id is empty");
  if (!(rate_limit_per_minute > 0.0)) throw Error(Errc::ConfigError, "rate_limit must be positive");
}

std::string api_key_env_var(const std::string& provider_id) {
  std::string name = "CYCLECAST_";
  for (char c : provider_id) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name + "_KEY";
}

std::optional<std::string> api_key_from_env(const std::string& provider_id) {
  if (const char* v = std::getenv(api_key_env_var(provider_id).c_str()); v && *v) return std::string(v);
  return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t write_body(char* data, std::size_t size, std::size_t n, void* user) {
  static_cast<std::string*>(user)->append(data, size * n);
  return size * n;
}

std::once_flag curl_init_flag;

std::string url_encode(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

}  // namespace

CurlTransport::CurlTransport(long timeout_seconds) : timeout_seconds_(timeout_seconds) {
  std::call_once(curl_init_flag, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

HttpResponse CurlTransport::get(const std::string& url) {
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> handle(curl_easy_init(), &curl_easy_cleanup);
  if (!handle) throw Error(Errc::NetworkError, "curl_easy_init failed");
  HttpResponse resp;
  curl_easy_setopt(handle.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(handle.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(handle.get(), CURLOPT_TIMEOUT, timeout_seconds_);
  curl_easy_setopt(handle.get(), CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(handle.get(), CURLOPT_USERAGENT, "cyclecast/1.0");
  curl_easy_setopt(handle.get(), CURLOPT_WRITEFUNCTION, &write_body);
  curl_easy_setopt(handle.get(), CURLOPT_WRITEDATA, &resp.body);
  CURLcode rc = curl_easy_perform(handle.get());
  if (rc != CURLE_OK) throw Error(Errc::NetworkError, std::string(curl_easy_strerror(rc)) + " (" + url + ")");
  curl_easy_getinfo(handle.get(), CURLINFO_RESPONSE_CODE, &resp.status);
  // file:// mirrors have no status line; reaching here means the read succeeded.
  if (resp.status == 0 && url.rfind("file://", 0) == 0) resp.status = 200;
  return resp;
}

void SystemClock::sleep_until(time_point t) { std::this_thread::sleep_until(t); }

RateLimiter::RateLimiter(double per_minute, Clock& clock) : clock_(clock) {
  if (!(per_minute > 0.0)) throw Error(Errc::ConfigError, "rate_limit must be positive");
  if (per_minute >= 1.0) {
    capacity_ = static_cast<std::size_t>(std::floor(per_minute));
    window_ = std::chrono::milliseconds(60'000);
  } else {
    capacity_ = 1;
    window_ = std::chrono::milliseconds(static_cast<long long>(std::ceil(60'000.0 / per_minute)));
  }
}

void RateLimiter::acquire() {
  std::lock_guard lock(mu_);
  for (;;) {
    auto now = clock_.now();
    while (!recent_.empty() && recent_.front() <= now - window_) recent_.pop_front();
    if (recent_.size() < capacity_) {
      recent_.push_back(now);
      return;
    }
    clock_.sleep_until(recent_.front() + window_);
  }
}

std::map<MonthStamp, double> aggregate_monthly_last(std::span<const DatedObservation> obs) {
  std::vector<DatedObservation> sorted(obs.begin(), obs.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::tie(a.year, a.month, a.day) < std::tie(b.year, b.month, b.day);
  });
  std::map<MonthStamp, double> out;
  for (const auto& o : sorted) out.insert_or_assign(MonthStamp(o.year, o.month), o.value);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

DatedObservation parse_date(std::string_view date, double value) {
  // YYYY-MM-DD, YYYY-MM or YYYYMmm
  DatedObservation o;
  o.value = value;
  auto num = [&](std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
  };
  bool ok = false;
  if (date.size() == 10 && date[4] == '-' && date[7] == '-') {
    ok = num(date.substr(0, 4), o.year) && num(date.substr(5, 2), o.month) && num(date.substr(8, 2), o.day);
  } else if (date.size() == 7 && (date[4] == '-' || date[4] == 'M')) {
    ok = num(date.substr(0, 4), o.year) && num(date.substr(5, 2), o.month);
  }
  if (!ok || o.month < 1 || o.month > 12) {
    throw Error(Errc::NonNumericPayload, "unsupported date '" + std::string(date) + "'");
  }
  return o;
}

json parse_body(const HttpResponse& r) {
  try {
    return json::parse(r.body);
  } catch (const json::exception&) {
    throw Error(Errc::NonNumericPayload, "response is not JSON (HTTP " + std::to_string(r.status) + ")");
  }
}

}  // namespace

std::string FredAdapter::request_url(const ProviderConfig& cfg, const std::string& series_id) const {
  std::string url = cfg.base_url + "/fred/series/observations?series_id=" + url_encode(series_id) +
                    "&file_type=json";
  if (cfg.api_key) url += "&api_key=" + url_encode(*cfg.api_key);
  return url;
}

std::vector<DatedObservation> FredAdapter::parse(const HttpResponse& r, const std::string& series_id) const {
  if (r.status == 401 || r.status == 403) throw Error(Errc::AuthError, "FRED rejected the API key");
  if (r.status == 404) throw Error(Errc::UnknownSeries, series_id);
  if (r.status >= 500 || r.status == 429) {
    throw Error(Errc::NetworkError, "FRED returned HTTP " + std::to_string(r.status));
  }
  json doc = parse_body(r);
  if (r.status != 200) {
    std::string msg = doc.is_object() ? doc.value("error_message", "") : "";
    if (msg.find("api_key") != std::string::npos) throw Error(Errc::AuthError, msg);
    if (msg.find("does not exist") != std::string::npos) throw Error(Errc::UnknownSeries, series_id);
    throw Error(Errc::NetworkError, "FRED returned HTTP " + std::to_string(r.status) + ": " + msg);
  }
  if (!doc.is_object() || !doc.contains("observations") || !doc["observations"].is_array()) {
    throw Error(Errc::NonNumericPayload, "no observations array for " + series_id);
  }
  std::vector<DatedObservation> out;
  for (const auto& o : doc["observations"]) {
    const std::string date = o.value("date", "");
    const auto& v = o.at("value");
    double value = 0.0;
    if (v.is_number()) {
      value = v.get<double>();
    } else if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == ".") continue;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
      if (ec != std::errc{} || p != s.data() + s.size()) {
        throw Error(Errc::NonNumericPayload, series_id + " " + date + ": '" + s + "'");
      }
    } else {
      throw Error(Errc::NonNumericPayload, series_id + " " + date);
    }
    out.push_back(parse_date(date, value));
  }
  return out;
}

std::string EurostatAdapter::request_url(const ProviderConfig& cfg, const std::string& series_id) const {
  auto q = series_id.find('?');
  std::string dataset = series_id.substr(0, q);
  std::string query = q == std::string::npos ? std::string() : series_id.substr(q + 1);
  std::string url = cfg.base_url + "/statistics/1.0/data/" + url_encode(dataset) + "?format=JSON&lang=EN";
  if (!query.empty()) url += "&" + query;
  return url;
}

std::vector<DatedObservation> EurostatAdapter::parse(const HttpResponse& r, const std::string& series_id) const {
  if (r.status == 401 || r.status == 403) throw Error(Errc::AuthError, "Eurostat refused the request");
  if (r.status == 404 || r.status == 400) throw Error(Errc::UnknownSeries, series_id);
  if (r.status != 200) throw Error(Errc::NetworkError, "Eurostat returned HTTP " + std::to_string(r.status));
  json doc = parse_body(r);
  try {
    const auto& ids = doc.at("id");
    const auto& sizes = doc.at("size");
    std::size_t time_pos = ids.size();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == "time") time_pos = i;
    }
    if (time_pos == ids.size()) throw Error(Errc::NonNumericPayload, "no time dimension");
    std::size_t stride = 1;
    std::size_t others = 1;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (i > time_pos) stride *= sizes[i].get<std::size_t>();
      if (i != time_pos) others *= sizes[i].get<std::size_t>();
    }
    if (others != 1) {
      throw Error(Errc::UnknownSeries, series_id + " selects " + std::to_string(others) + " series, need 1");
    }
    const auto& index = doc.at("dimension").at("time").at("category").at("index");
    const auto& values = doc.at("value");
    std::vector<DatedObservation> out;
    for (const auto& [label, pos] : index.items()) {
      const std::size_t key = pos.get<std::size_t>() * stride;
      const json* v = nullptr;
      if (values.is_object()) {
        auto it = values.find(std::to_string(key));
        if (it != values.end()) v = &*it;
      } else if (key < values.size()) {
        v = &values[key];
      }
      if (!v || v->is_null()) continue;
      if (!v->is_number()) throw Error(Errc::NonNumericPayload, series_id + " " + label);
      out.push_back(parse_date(label, v->get<double>()));
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(Errc::NonNumericPayload, std::string("malformed JSON-stat: ") + e.what());
  }
}

std::unique_ptr<ProviderAdapter> make_adapter(const std::string& provider_id) {
  if (provider_id == "fred") return std::make_unique<FredAdapter>();
  if (provider_id == "eurostat") return std::make_unique<EurostatAdapter>();
  throw Error(Errc::ConfigError, "no adapter for provider '" + provider_id + "'");
}

// ---------------------------------------------------------------------------

SeriesCache::SeriesCache(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path SeriesCache::entry_path(const std::string& provider_id,
                                              const std::string& series_id) const {
  return root_ / url_encode(provider_id) / (url_encode(series_id) + ".json");
}

std::optional<CacheEntry> SeriesCache::get(const std::string& provider_id, const std::string& series_id) const {
  auto path = entry_path(provider_id, series_id);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    auto doc = json::parse(read_file(path));
    CacheEntry e;
    e.provider_id = doc.at("provider_id").get<std::string>();
    e.series_id = doc.at("series_id").get<std::string>();
    e.fetched_at = Clock::time_point(std::chrono::seconds(doc.at("fetched_at").get<long long>()));
    e.payload.id = doc.at("id").get<std::string>();
    e.payload.region = parse_region(doc.at("region").get<std::string>());
    e.payload.category = parse_category(doc.at("category").get<std::string>());
    for (const auto& row : doc.at("observations")) {
      e.payload.observations.emplace(MonthStamp(row.at(0).get<int>(), row.at(1).get<int>()),
                                     row.at(2).get<double>());
    }
    if (e.provider_id != provider_id || e.series_id != series_id) return std::nullopt;
    return e;
  } catch (const json::exception&) {
    return std::nullopt;  // unreadable entries are treated as misses and rewritten
  }
}

void SeriesCache::put(const CacheEntry& e) const {
  json doc;
  doc["provider_id"] = e.provider_id;
  doc["series_id"] = e.series_id;
  doc["fetched_at"] =
      std::chrono::duration_cast<std::chrono::seconds>(e.fetched_at.time_since_epoch()).count();
  doc["id"] = e.payload.id;
  doc["region"] = std::string(to_string(e.payload.region));
  doc["category"] = std::string(to_string(e.payload.category));
  json rows = json::array();
  for (const auto& [m, v] : e.payload.observations) rows.push_back({m.year(), m.month(), v});
  doc["observations"] = std::move(rows);
  write_file_atomic(entry_path(e.provider_id, e.series_id), doc.dump() + "\n");
}

FetchClient::FetchClient(ProviderConfig cfg, HttpTransport& transport, SeriesCache& cache, Clock& clock)
    : FetchClient(cfg, make_adapter(cfg.provider_id), transport, cache, clock) {}

FetchClient::FetchClient(ProviderConfig cfg, std::unique_ptr<ProviderAdapter> adapter,
                         HttpTransport& transport, SeriesCache& cache, Clock& clock)
    : cfg_(std::move(cfg)),
      adapter_(std::move(adapter)),
      transport_(transport),
      cache_(cache),
      clock_(clock),
      limiter_(cfg_.rate_limit_per_minute, clock) {
  cfg_.validate();
  if (!cfg_.api_key) cfg_.api_key = api_key_from_env(cfg_.provider_id);
}

RawSeries FetchClient::fetch_series(const std::string& series_id, Region region, Category category,
                                    const FetchOptions& opts) {
  if (auto hit = cache_.get(cfg_.provider_id, series_id)) {
    bool fresh = !opts.max_age || clock_.now() - hit->fetched_at <= *opts.max_age;
    if (fresh || opts.offline) {
      hit->payload.region = region;
      hit->payload.category = category;
      return hit->payload;
    }
  }
  if (opts.offline) {
    throw Error(Errc::CacheMiss, cfg_.provider_id + "/" + series_id + " is not cached (offline mode)");
  }
  limiter_.acquire();
  ++network_calls_;
  HttpResponse resp = transport_.get(adapter_->request_url(cfg_, series_id));
  auto obs = adapter_->parse(resp, series_id);

  RawSeries s;
  s.id = series_id;
  s.region = region;
  s.category = category;
  s.observations = aggregate_monthly_last(obs);
  cache_.put({cfg_.provider_id, series_id, clock_.now(), s});
  return s;
}

}  // namespace cyclecast
