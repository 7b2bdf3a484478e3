#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ccdos {

enum class Label : std::uint8_t { inlier = 0, outlier = 1 };

// n x d matrix of finite reals stored row-major, with optional labels.
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::size_t n, std::size_t d, std::vector<double> coords,
           std::optional<std::vector<Label>> labels = std::nullopt,
           std::vector<std::string> feature_names = {});

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * d_, d_};
  }
  double at(std::size_t i, std::size_t j) const { return coords_[i * d_ + j]; }
  const std::vector<double>& coords() const { return coords_; }

  bool has_labels() const { return labels_.has_value(); }
  const std::vector<Label>& labels() const { return *labels_; }
  std::size_t outlier_count() const;

  // x0, x1, ... unless names were given.
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  PointSet with_labels(std::vector<Label> labels) const;
  PointSet scaled(double factor) const;
  // Row i of the result is row perm[i] of this set.
  PointSet permuted(std::span<const std::size_t> perm) const;

  bool operator==(const PointSet&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> coords_;
  std::optional<std::vector<Label>> labels_;
  std::vector<std::string> feature_names_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

struct CsvOptions {
  bool has_header = true;
  std::optional<std::string> label_column;
  // Raw label cell -> label. Cells outside the map raise LabelError.
  std::map<std::string, Label> label_vocabulary{{"0", Label::inlier},
                                                {"1", Label::outlier}};
};

PointSet load_csv(const std::string& path, const CsvOptions& opts = {});
PointSet parse_csv(const std::string& text, const CsvOptions& opts = {});

// Writes features (and a trailing "label" column when labels are present)
// with round-trip precision. Output is readable by load_csv.
std::string to_csv(const PointSet& ps);
void write_csv(const std::string& path, const PointSet& ps);

struct FeatureScaling {
  double median = 0.0;
  double madn = 0.0;
  bool center_only = false;  // MADN was zero; column centered but not scaled
};

struct NormalizationReport {
  std::vector<FeatureScaling> features;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

struct NormalizedPointSet {
  PointSet points;
  NormalizationReport report;
};

// Per column: (x - Med) / MADN, falling back to centering when MADN == 0.
NormalizedPointSet robust_normalize(const PointSet& ps);

}  // namespace ccdos
