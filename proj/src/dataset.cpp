#include "ccdos/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "ccdos/error.hpp"
#include "ccdos/robust.hpp"

namespace ccdos {

PointSet::PointSet(std::size_t n, std::size_t d, std::vector<double> coords,
                   std::optional<std::vector<Label>> labels,
                   std::vector<std::string> feature_names)
    : n_(n),
      d_(d),
      coords_(std::move(coords)),
      labels_(std::move(labels)),
      feature_names_(std::move(feature_names)) {
  if (n_ < 1 || d_ < 1) throw DataError("point set needs n >= 1 and d >= 1");
  if (coords_.size() != n_ * d_)
    throw DataError("coordinate buffer does not match n x d");
  for (std::size_t k = 0; k < coords_.size(); ++k) {
    if (!std::isfinite(coords_[k]))
      throw DataError(fmt::format("non-finite coordinate at point {}, feature {}",
                                  k / d_, k % d_));
  }
  if (labels_ && labels_->size() != n_)
    throw DataError("label vector length differs from point count");
  if (feature_names_.empty())
    for (std::size_t j = 0; j < d_; ++j) feature_names_.push_back(fmt::format("x{}", j));
  if (feature_names_.size() != d_)
    throw DataError("feature name count differs from dimension");
}

std::size_t PointSet::outlier_count() const {
  if (!labels_) return 0;
  return static_cast<std::size_t>(
      std::count(labels_->begin(), labels_->end(), Label::outlier));
}

PointSet PointSet::with_labels(std::vector<Label> labels) const {
  return PointSet(n_, d_, coords_, std::move(labels), feature_names_);
}

PointSet PointSet::scaled(double factor) const {
  std::vector<double> c = coords_;
  for (double& x : c) x *= factor;
  return PointSet(n_, d_, std::move(c), labels_, feature_names_);
}

PointSet PointSet::permuted(std::span<const std::size_t> perm) const {
  std::vector<double> c(coords_.size());
  std::optional<std::vector<Label>> lab;
  if (labels_) lab.emplace(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    std::copy_n(coords_.begin() + static_cast<std::ptrdiff_t>(perm[i] * d_), d_,
                c.begin() + static_cast<std::ptrdiff_t>(i * d_));
    if (lab) (*lab)[i] = (*labels_)[perm[i]];
  }
  return PointSet(n_, d_, std::move(c), std::move(lab), feature_names_);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

PointSet parse_csv(const std::string& text, const CsvOptions& opts) {
  std::vector<std::string_view> lines;
  {
    std::string_view all(text);
    std::size_t start = 0;
    while (start <= all.size()) {
      auto pos = all.find('\n', start);
      if (pos == std::string_view::npos) pos = all.size();
      lines.push_back(all.substr(start, pos - start));
      start = pos + 1;
    }
  }

  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::optional<std::size_t> label_col;
  std::size_t width = 0;
  std::vector<double> coords;
  std::vector<Label> labels;
  std::size_t rows = 0;

  for (auto raw : lines) {
    ++line_no;
    if (trim(raw).empty()) continue;
    auto cells = split_row(raw);
    if (opts.has_header && header.empty()) {
      for (auto c : cells) header.emplace_back(c);
      width = header.size();
      if (opts.label_column) {
        auto it = std::find(header.begin(), header.end(), *opts.label_column);
        if (it == header.end())
          throw LabelError("label column '" + *opts.label_column + "' not in header");
        label_col = static_cast<std::size_t>(it - header.begin());
      }
      continue;
    }
    if (width == 0) {
      width = cells.size();
      if (opts.label_column && !opts.has_header)
        throw LabelError("label column '" + *opts.label_column +
                         "' requested but the file has no header");
    }
    if (cells.size() != width)
      throw ParseError(line_no, std::min(cells.size(), width) + 1,
                       fmt::format("expected {} cells, found {}", width, cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (label_col && c == *label_col) {
        auto it = opts.label_vocabulary.find(std::string(cells[c]));
        if (it == opts.label_vocabulary.end())
          throw LabelError(fmt::format("row {}: label '{}' outside the label vocabulary",
                                       line_no, cells[c]));
        labels.push_back(it->second);
        continue;
      }
      double v = 0.0;
      if (!parse_double(cells[c], v))
        throw ParseError(line_no, c + 1, fmt::format("'{}' is not a finite number", cells[c]));
      coords.push_back(v);
    }
    ++rows;
  }

  if (rows == 0) throw DataError("CSV contains no data rows");
  const std::size_t d = width - (label_col ? 1 : 0);
  if (d == 0) throw DataError("CSV contains no feature columns");
  std::vector<std::string> names;
  if (opts.has_header) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (!label_col || c != *label_col) names.push_back(header[c]);
  }
  std::optional<std::vector<Label>> lab;
  if (label_col) lab = std::move(labels);
  return PointSet(rows, d, std::move(coords), std::move(lab), std::move(names));
}

PointSet load_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), opts);
}

std::string to_csv(const PointSet& ps) {
  std::string out;
  for (std::size_t j = 0; j < ps.dim(); ++j) {
    if (j) out += ',';
    out += ps.feature_names()[j];
  }
  if (ps.has_labels()) out += ",label";
  out += '\n';
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = 0; j < ps.dim(); ++j) {
      if (j) out += ',';
      out += fmt::format("{}", ps.at(i, j));  // shortest round-trip form
    }
    if (ps.has_labels()) out += ps.labels()[i] == Label::outlier ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

void write_csv(const std::string& path, const PointSet& ps) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << to_csv(ps);
}

// ---------------------------------------------------------------------------
// Normalization

nlohmann::json NormalizationReport::to_json() const {
  nlohmann::json j;
  j["features"] = nlohmann::json::array();
  for (const auto& f : features)
    j["features"].push_back(
        {{"median", f.median}, {"madn", f.madn}, {"center_only", f.center_only}});
  j["warnings"] = warnings;
  return j;
}

NormalizedPointSet robust_normalize(const PointSet& ps) {
  const std::size_t n = ps.size();
  const std::size_t d = ps.dim();
  if (n < 2) throw DegenerateData("robust normalization needs at least two points");

  NormalizationReport report;
  std::vector<double> out = ps.coords();
  std::vector<double> column(n);
  bool any_scaled = false;
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = ps.at(i, j);
    FeatureScaling f;
    f.median = median(column);
    f.madn = mad(column, f.median) / kMadnConstant;
    f.center_only = !(f.madn > 0.0);
    const double scale = f.center_only ? 1.0 : f.madn;
    for (std::size_t i = 0; i < n; ++i) out[i * d + j] = (column[i] - f.median) / scale;
    if (f.center_only) {
      report.warnings.push_back("feature '" + ps.feature_names()[j] +
                                "' has MADN = 0; centered by its median only");
    } else {
      any_scaled = true;
    }
    report.features.push_back(f);
  }

  if (!any_scaled) {
    bool all_identical = true;
    for (std::size_t i = 1; i < n && all_identical; ++i)
      all_identical = std::equal(ps.point(i).begin(), ps.point(i).end(), ps.point(0).begin());
    if (all_identical) throw DegenerateData("all rows are identical; nothing to normalize");
  }

  std::optional<std::vector<Label>> labels;
  if (ps.has_labels()) labels = ps.labels();
  return {PointSet(n, d, std::move(out), std::move(labels), ps.feature_names()),
          std::move(report)};
}

}  // namespace ccdos
