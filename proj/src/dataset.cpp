#include "cyclecast/dataset.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "cyclecast/error.hpp"

namespace cyclecast {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) + ": " + why);
}

// Calls fn(line_no, fields) for every data row after checking the header.
template <typename Fn>
void for_each_row(std::istream& in, std::string_view expected_header, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) malformed(1, "missing header");
  ++line_no;
  std::string_view header = trim(line);
  if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF) header.remove_prefix(3);
  if (header != expected_header) {
    malformed(1, "expected header '" + std::string(expected_header) + "'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    auto row = trim(line);
    if (row.empty()) continue;
    auto fields = split_commas(row);
    if (fields.size() != 3) malformed(line_no, "expected 3 fields");
    fn(line_no, fields);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, path.string());
  return in;
}

}  // namespace

PhaseLabel phase_from_code(int code) {
  if (code < 1 || code > 4) throw Error(Errc::InvalidPhaseCode, std::to_string(code));
  return static_cast<PhaseLabel>(code);
}

std::string_view phase_name(PhaseLabel p) noexcept {
  switch (p) {
    case PhaseLabel::Recovery: return "recovery";
    case PhaseLabel::Expansion: return "expansion";
    case PhaseLabel::Slowdown: return "slowdown";
    case PhaseLabel::Recession: return "recession";
  }
  return "?";
}

std::string_view to_string(Region r) noexcept { return r == Region::US ? "US" : "EZ"; }

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::Growth: return "growth";
    case Category::Inflation: return "inflation";
    case Category::Commodity: return "commodity";
    case Category::StockIndex: return "stock_index";
    case Category::Rates: return "rates";
    case Category::Other: return "other";
  }
  return "other";
}

std::string_view to_string(Transform t) noexcept {
  switch (t) {
    case Transform::None: return "none";
    case Transform::Diff: return "diff";
    case Transform::LogDiff: return "log_diff";
  }
  return "none";
}

Region parse_region(std::string_view text) {
  if (text == "US" || text == "us") return Region::US;
  if (text == "EZ" || text == "ez") return Region::EZ;
  throw Error(Errc::ConfigError, "unknown region '" + std::string(text) + "'");
}

Category parse_category(std::string_view text) {
  for (auto c : {Category::Growth, Category::Inflation, Category::Commodity, Category::StockIndex,
                 Category::Rates, Category::Other}) {
    if (to_string(c) == text) return c;
  }
  throw Error(Errc::ConfigError, "unknown category '" + std::string(text) + "'");
}

Transform parse_transform(std::string_view text) {
  for (auto t : {Transform::None, Transform::Diff, Transform::LogDiff}) {
    if (to_string(t) == text) return t;
  }
  throw Error(Errc::ConfigError, "unknown transform '" + std::string(text) + "'");
}

std::vector<double> RawSeries::values() const {
  std::vector<double> out;
  out.reserve(observations.size());
  for (const auto& [m, v] : observations) out.push_back(v);
  return out;
}

std::vector<MonthStamp> RawSeries::months() const {
  std::vector<MonthStamp> out;
  out.reserve(observations.size());
  for (const auto& [m, v] : observations) out.push_back(m);
  return out;
}

SplitSpec::SplitSpec(MonthStamp train_end, MonthStamp validation_end, MonthStamp test_end)
    : train_end_(train_end), validation_end_(validation_end), test_end_(test_end) {
  if (!(train_end < validation_end && validation_end < test_end)) {
    throw Error(Errc::InvalidSplit, "need train_end < validation_end < test_end, got " +
                                        train_end.to_string() + ", " +
                                        validation_end.to_string() + ", " + test_end.to_string());
  }
}

SplitSpec SplitSpec::standard(Region region) {
  if (region == Region::EZ) return {MonthStamp(2001, 12), MonthStamp(2011, 12), MonthStamp(2022, 12)};
  return {MonthStamp(1999, 12), MonthStamp(2009, 12), MonthStamp(2022, 12)};
}

SplitPart split_part(const SplitSpec& spec, MonthStamp m) noexcept {
  if (m <= spec.train_end()) return SplitPart::Train;
  if (m <= spec.validation_end()) return SplitPart::Validation;
  if (m <= spec.test_end()) return SplitPart::Test;
  return SplitPart::Outside;
}

LabeledDataset::LabeledDataset(Region region, std::vector<MonthStamp> months,
                               std::vector<PhaseLabel> labels)
    : region_(region), months_(std::move(months)), labels_(std::move(labels)) {
  if (months_.size() != labels_.size()) {
    throw Error(Errc::LengthMismatch, "months and labels differ in length");
  }
  for (std::size_t i = 1; i < months_.size(); ++i) {
    if (months_[i] != months_[i - 1].next()) {
      throw Error(Errc::NonContiguousMonths, "first gap at " + months_[i - 1].next().to_string());
    }
  }
}

std::optional<PhaseLabel> LabeledDataset::label_at(MonthStamp m) const {
  if (months_.empty()) return std::nullopt;
  int offset = months_between(months_.front(), m);
  if (offset < 0 || offset >= static_cast<int>(months_.size())) return std::nullopt;
  return labels_[static_cast<std::size_t>(offset)];
}

LabeledDataset LabeledDataset::slice(MonthRange range) const {
  std::vector<MonthStamp> months;
  std::vector<PhaseLabel> labels;
  for (std::size_t i = 0; i < months_.size(); ++i) {
    if (range.contains(months_[i])) {
      months.push_back(months_[i]);
      labels.push_back(labels_[i]);
    }
  }
  return LabeledDataset(region_, std::move(months), std::move(labels));
}

MonthRange LabeledDataset::range() const {
  if (months_.empty()) throw Error(Errc::Empty, "dataset has no months");
  return {months_.front(), months_.back()};
}

DatasetSplit split_dataset(const LabeledDataset& ds, const SplitSpec& spec) {
  if (ds.empty()) throw Error(Errc::BoundaryOutsideDataset, "dataset is empty");
  auto r = ds.range();
  for (auto b : {spec.train_end(), spec.validation_end(), spec.test_end()}) {
    if (!r.contains(b)) {
      throw Error(Errc::BoundaryOutsideDataset,
                  b.to_string() + " outside " + r.first.to_string() + ".." + r.last.to_string());
    }
  }
  return {ds.slice({r.first, spec.train_end()}),
          ds.slice({spec.train_end().next(), spec.validation_end()}),
          ds.slice({spec.validation_end().next(), spec.test_end()})};
}

PhaseCounts phase_counts(const LabeledDataset& ds) {
  PhaseCounts counts{};
  for (auto l : ds.labels()) ++counts[phase_index(l)];
  return counts;
}

LabeledDataset read_labels(std::istream& in, Region region) {
  std::vector<MonthStamp> months;
  std::vector<PhaseLabel> labels;
  for_each_row(in, "year,month,phase", [&](std::size_t line_no, const auto& f) {
    int year = 0, month = 0, phase = 0;
    if (!parse_number(f[0], year) || !parse_number(f[1], month) || !parse_number(f[2], phase)) {
      malformed(line_no, "non-integer field");
    }
    if (month < 1 || month > 12) malformed(line_no, "month out of range");
    months.emplace_back(year, month);
    labels.push_back(phase_from_code(phase));
  });
  return LabeledDataset(region, std::move(months), std::move(labels));
}

LabeledDataset load_labels(const std::filesystem::path& path, Region region) {
  auto in = open_input(path);
  return read_labels(in, region);
}

void write_labels(std::ostream& out, const LabeledDataset& ds) {
  out << "year,month,phase";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << '\n' << ds.months()[i].year() << ',' << ds.months()[i].month() << ','
        << static_cast<int>(ds.labels()[i]);
  }
  out << '\n';
}

void save_labels(const std::filesystem::path& path, const LabeledDataset& ds) {
  std::ostringstream os;
  write_labels(os, ds);
  write_file_atomic(path, os.str());
}

std::map<MonthStamp, double> read_series_observations(std::istream& in) {
  std::map<MonthStamp, double> obs;
  for_each_row(in, "year,month,value", [&](std::size_t line_no, const auto& f) {
    int year = 0, month = 0;
    double value = 0.0;
    if (!parse_number(f[0], year) || !parse_number(f[1], month)) malformed(line_no, "bad date");
    if (!parse_number(f[2], value)) malformed(line_no, "non-numeric value");
    if (month < 1 || month > 12) malformed(line_no, "month out of range");
    MonthStamp m(year, month);
    if (!obs.empty() && !(obs.rbegin()->first < m)) {
      malformed(line_no, "months must be strictly increasing");
    }
    obs.emplace(m, value);
  });
  return obs;
}

RawSeries load_series_csv(const std::filesystem::path& path, std::string id, Region region,
                          Category category) {
  auto in = open_input(path);
  RawSeries s;
  s.id = std::move(id);
  s.region = region;
  s.category = category;
  s.observations = read_series_observations(in);
  return s;
}

void write_series_csv(std::ostream& out, const RawSeries& series) {
  out << "year,month,value\n";
  for (const auto& [m, v] : series.observations) {
    out << m.year() << ',' << m.month() << ',' << format_double(v) << '\n';
  }
}

void export_series_csv(const RawSeries& series, const std::filesystem::path& path) {
  std::ostringstream os;
  write_series_csv(os, series);
  write_file_atomic(path, os.str());
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(Errc::IoError, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "rename to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace cyclecast
