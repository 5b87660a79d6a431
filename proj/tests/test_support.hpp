#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "cyclecast/dataset.hpp"
#include "cyclecast/error.hpp"
#include "cyclecast/month.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("cyclecast-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline cyclecast::LabeledDataset make_dataset(cyclecast::MonthStamp start, const std::vector<int>& codes,
                                              cyclecast::Region region = cyclecast::Region::US) {
  std::vector<cyclecast::MonthStamp> months;
  std::vector<cyclecast::PhaseLabel> labels;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    months.push_back(start.plus(static_cast<int>(i)));
    labels.push_back(cyclecast::phase_from_code(codes[i]));
  }
  return cyclecast::LabeledDataset(region, std::move(months), std::move(labels));
}

// Dataset spanning [first, last] with a repeating label pattern.
inline cyclecast::LabeledDataset make_span(cyclecast::MonthStamp first, cyclecast::MonthStamp last,
                                           cyclecast::Region region = cyclecast::Region::US) {
  std::vector<int> codes;
  for (int i = 0; i <= cyclecast::months_between(first, last); ++i) codes.push_back(1 + (i / 7) % 4);
  return make_dataset(first, codes, region);
}

template <typename F>
cyclecast::Errc error_code_of(F&& f) {
  try {
    f();
  } catch (const cyclecast::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a cyclecast::Error");
}

}  // namespace testing
