#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyclecast/month.hpp"

namespace cyclecast {

// Integer codes: 1 recovery .. 4 recession.
enum class PhaseLabel : int { Recovery = 1, Expansion = 2, Slowdown = 3, Recession = 4 };

inline constexpr std::size_t kNumPhases = 4;
inline constexpr std::array<PhaseLabel, kNumPhases> kAllPhases = {
    PhaseLabel::Recovery, PhaseLabel::Expansion, PhaseLabel::Slowdown, PhaseLabel::Recession};

inline constexpr std::size_t phase_index(PhaseLabel p) noexcept {
  return static_cast<std::size_t>(p) - 1;
}
inline constexpr PhaseLabel phase_from_index(std::size_t i) noexcept {
  return static_cast<PhaseLabel>(static_cast<int>(i) + 1);
}
PhaseLabel phase_from_code(int code);
std::string_view phase_name(PhaseLabel p) noexcept;

enum class Region { US, EZ };
enum class Category { Growth, Inflation, Commodity, StockIndex, Rates, Other };
enum class Transform { None, Diff, LogDiff };

std::string_view to_string(Region r) noexcept;
std::string_view to_string(Category c) noexcept;
std::string_view to_string(Transform t) noexcept;
Region parse_region(std::string_view text);
Category parse_category(std::string_view text);
Transform parse_transform(std::string_view text);

// One monthly series in native units.
struct RawSeries {
  std::string id;
  Region region = Region::US;
  Category category = Category::Other;
  std::map<MonthStamp, double> observations;
  Transform transform_applied = Transform::None;

  std::vector<double> values() const;
  std::vector<MonthStamp> months() const;

  friend bool operator==(const RawSeries&, const RawSeries&) = default;
};

// Inclusive month-end boundaries; train_end < validation_end < test_end.
class SplitSpec {
 public:
  SplitSpec(MonthStamp train_end, MonthStamp validation_end, MonthStamp test_end);

  MonthStamp train_end() const noexcept { return train_end_; }
  MonthStamp validation_end() const noexcept { return validation_end_; }
  MonthStamp test_end() const noexcept { return test_end_; }

  // Standard boundaries: EZ 2001-12/2011-12/2022-12, US 1999-12/2009-12/2022-12.
  static SplitSpec standard(Region region);

 private:
  MonthStamp train_end_;
  MonthStamp validation_end_;
  MonthStamp test_end_;
};

enum class SplitPart { Train, Validation, Test, Outside };

// Which part of the split a month falls in, or Outside after test_end.
SplitPart split_part(const SplitSpec& spec, MonthStamp m) noexcept;

// Contiguous monthly phase labels.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  // Throws NonContiguousMonths on gaps or disorder, LengthMismatch on size mismatch.
  LabeledDataset(Region region, std::vector<MonthStamp> months, std::vector<PhaseLabel> labels);

  Region region() const noexcept { return region_; }
  const std::vector<MonthStamp>& months() const noexcept { return months_; }
  const std::vector<PhaseLabel>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return months_.size(); }
  bool empty() const noexcept { return months_.empty(); }

  std::optional<PhaseLabel> label_at(MonthStamp m) const;
  // Sub-range restricted to [range.first, range.last] (clipped).
  LabeledDataset slice(MonthRange range) const;
  MonthRange range() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

 private:
  Region region_ = Region::US;
  std::vector<MonthStamp> months_;
  std::vector<PhaseLabel> labels_;
};

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset validation;
  LabeledDataset test;
};

DatasetSplit split_dataset(const LabeledDataset& ds, const SplitSpec& spec);

using PhaseCounts = std::array<std::size_t, kNumPhases>;
PhaseCounts phase_counts(const LabeledDataset& ds);

// Labels CSV: header `year,month,phase`, LF or CRLF accepted.
LabeledDataset read_labels(std::istream& in, Region region = Region::US);
LabeledDataset load_labels(const std::filesystem::path& path, Region region = Region::US);
void write_labels(std::ostream& out, const LabeledDataset& ds);
void save_labels(const std::filesystem::path& path, const LabeledDataset& ds);

// Series CSV: header `year,month,value`.
std::map<MonthStamp, double> read_series_observations(std::istream& in);
RawSeries load_series_csv(const std::filesystem::path& path, std::string id, Region region,
                          Category category);
void write_series_csv(std::ostream& out, const RawSeries& series);
void export_series_csv(const RawSeries& series, const std::filesystem::path& path);

// Formats a double so that reading it back yields the same bits.
std::string format_double(double v);

// Writes via a sibling temp file and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace cyclecast
