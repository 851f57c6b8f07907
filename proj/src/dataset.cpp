#include "kmfl/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "kmfl/csv.hpp"
#include "kmfl/error.hpp"
#include "kmfl/noise.hpp"

namespace kmfl {

void Dataset::validate() const {
  if (labels.rows() != features.rows()) {
    throw Error(ErrorKind::kDimensionMismatch, "feature and label row counts differ");
  }
  if (features.size() > 0 && (features.minCoeff() < 0.0 || features.maxCoeff() > 1.0)) {
    throw Error(ErrorKind::kInvalidParameter, "feature outside [0,1]");
  }
  for (Index k = 0; k < labels.rows(); ++k) {
    const auto row = labels.row(k);
    const auto ones = (row.array() == 1.0).count();
    const auto zeros = (row.array() == 0.0).count();
    if (ones != 1 || ones + zeros != row.size()) {
      throw Error(ErrorKind::kInvalidParameter, "label row " + std::to_string(k) + " is not one-hot");
    }
  }
}

Dataset filter_binary_classes(const IdxImages& images, const std::vector<std::uint8_t>& labels,
                              int class_a, int class_b, std::size_t max_k, std::uint64_t seed) {
  if (labels.size() != images.count) {
    throw Error(ErrorKind::kSizeMismatch, std::to_string(images.count) + " images but " +
                                              std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == class_a || labels[k] == class_b) keep.push_back(k);
  }
  if (keep.size() > max_k) {
    // Partial Fisher-Yates; the chosen rows are then restored to file order.
    const NoiseStream rng(seed);
    for (std::size_t j = 0; j < max_k; ++j) {
      const std::size_t pick = j + rng.uniform_index(j, 0, 0, keep.size() - j);
      std::swap(keep[j], keep[pick]);
    }
    keep.resize(max_k);
    std::sort(keep.begin(), keep.end());
  }

  const Index d_in = static_cast<Index>(images.rows) * images.cols;
  Dataset out;
  out.features.resize(static_cast<Index>(keep.size()), d_in);
  out.labels = Matrix::Zero(static_cast<Index>(keep.size()), 2);
  out.class_names = {std::to_string(class_a), std::to_string(class_b)};
  for (std::size_t row = 0; row < keep.size(); ++row) {
    const auto pixels = images.image(keep[row]);
    for (Index p = 0; p < d_in; ++p) {
      out.features(static_cast<Index>(row), p) = static_cast<double>(pixels[p]) / 255.0;
    }
    out.labels(static_cast<Index>(row), labels[keep[row]] == class_a ? 0 : 1) = 1.0;
  }
  return out;
}

Dataset synthetic_dataset(std::size_t k, std::size_t d_in, std::uint64_t seed) {
  const NoiseStream rng(seed);
  const NoiseStream weight_rng = rng.derive(0);
  const NoiseStream feature_rng = rng.derive(1);

  Vector w(static_cast<Index>(d_in));
  for (std::size_t j = 0; j < d_in; ++j) w(static_cast<Index>(j)) = weight_rng.normal(0, 0, j);
  const double offset = 0.5 * w.sum();

  Dataset out;
  out.features.resize(static_cast<Index>(k), static_cast<Index>(d_in));
  out.labels = Matrix::Zero(static_cast<Index>(k), 2);
  out.class_names = {"positive", "negative"};
  for (std::size_t row = 0; row < k; ++row) {
    for (std::size_t j = 0; j < d_in; ++j) {
      out.features(static_cast<Index>(row), static_cast<Index>(j)) =
          feature_rng.uniform(row, static_cast<std::uint32_t>(j), 0);
    }
    const double score = out.features.row(static_cast<Index>(row)).dot(w) - offset;
    out.labels(static_cast<Index>(row), score > 0.0 ? 0 : 1) = 1.0;
  }
  return out;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  CsvTable table;
  for (Index j = 0; j < data.input_dim(); ++j) table.header.push_back("feature_" + std::to_string(j));
  for (Index j = 0; j < data.output_dim(); ++j) table.header.push_back("label_" + std::to_string(j));
  table.rows.reserve(static_cast<std::size_t>(data.size()));
  for (Index k = 0; k < data.size(); ++k) {
    std::vector<double> row(data.features.row(k).begin(), data.features.row(k).end());
    row.insert(row.end(), data.labels.row(k).begin(), data.labels.row(k).end());
    table.rows.push_back(std::move(row));
  }
  write_csv(table, path);
}

}  // namespace kmfl
