#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kmfl/idx.hpp"
#include "kmfl/types.hpp"

namespace kmfl {

/// Supervised dataset: K feature rows in [0,1]^d_in with one-hot label rows.
struct Dataset {
  Matrix features;  ///< K x d_in
  Matrix labels;    ///< K x d_out
  std::vector<std::string> class_names;

  Index size() const { return features.rows(); }
  Index input_dim() const { return features.cols(); }
  Index output_dim() const { return labels.cols(); }

  /// Throws InvalidParameter if a feature leaves [0,1] or a label row is not one-hot.
  void validate() const;
};

/// Keeps images labelled `class_a` or `class_b`, scales pixels by 1/255 and
/// flattens them. Labels become (1,0) for class_a and (0,1) for class_b. When
/// more than `max_k` rows survive, `max_k` of them are drawn uniformly without
/// replacement (seeded) and kept in their original order.
Dataset filter_binary_classes(const IdxImages& images, const std::vector<std::uint8_t>& labels,
                              int class_a, int class_b, std::size_t max_k, std::uint64_t seed);

/// Features uniform on [0,1]^d_in. Two classes split by the hyperplane
/// w.z = w.1/2 with w ~ N(0, I) drawn from `seed`; the rule is symmetric under
/// z -> 1 - z, so the classes are balanced in expectation.
Dataset synthetic_dataset(std::size_t k, std::size_t d_in, std::uint64_t seed);

/// CSV export with header feature_0,...,feature_{d_in-1},label_0,...
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace kmfl
