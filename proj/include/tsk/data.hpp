#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tsk/error.hpp"
#include "tsk/model.hpp"

namespace tsk {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Rng = std::mt19937_64;

struct Dataset {
  RowMatrix X;
  Eigen::VectorXd y;
  std::vector<std::string> feature_names;

  std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t num_features() const { return static_cast<std::size_t>(X.cols()); }
  std::span<const double> row(std::size_t n) const {
    return {X.data() + n * num_features(), num_features()};
  }

  /// Rows `indices` in the given order. Feature names are kept.
  Dataset subset(std::span<const std::size_t> indices) const;

  /// Per-feature min, max and sample standard deviation (N-1 denominator).
  std::vector<FeatureStats> feature_stats() const;
};

/// Target column selector: by header name or by zero-based index.
using TargetColumn = std::variant<std::string, std::size_t>;

/// Reads a comma separated file with a header row. Columns that contain a
/// non-numeric cell in the first data row are dropped as categorical (with a
/// warning on stderr); a non-numeric cell in a numeric column is a ParseError.
Dataset load_csv(const std::filesystem::path& path, const TargetColumn& target);

/// Wrapper marking a dataset as the training portion of a split. Only this
/// type can be used to fit a Preprocessor.
class TrainSplit {
 public:
  explicit TrainSplit(Dataset data) : data_(std::move(data)) {}
  const Dataset& data() const { return data_; }

 private:
  Dataset data_;
};

struct Split {
  TrainSplit train;
  Dataset test;
};

/// Random permutation; the first round(ratio * N) rows go to train.
Split split(const Dataset& data, Rng& rng, double ratio = 0.7);

/// Fitted normalization, output centering and optional PCA.
struct Preprocessor {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;
  double output_mean = 0.0;
  Eigen::MatrixXd projection;       // [M_raw x M_out], identity when no PCA
  Eigen::VectorXd explained;        // retained eigenvalues, descending (empty without PCA)
  bool pca_applied = false;
  std::vector<std::string> output_names;

  std::size_t input_dims() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t output_dims() const { return static_cast<std::size_t>(projection.cols()); }
};

inline constexpr std::size_t kMaxInputDims = 5;

Preprocessor fit_preprocessor(const TrainSplit& train, std::size_t max_dims = kMaxInputDims);
Dataset apply_preprocessor(const Preprocessor& p, const Dataset& data);

/// min(batch_size, N) distinct indices drawn uniformly.
std::vector<std::size_t> sample_batch(std::size_t n, std::size_t batch_size, Rng& rng);

/// y = sin(x1) * x2 + 0.1 * noise with three nuisance features, x ~ U[-pi, pi].
Dataset make_synthetic(std::size_t n = 1500, std::uint64_t seed = 20191029);

void write_csv(const Dataset& data, const std::filesystem::path& path,
               const std::string& target_name = "y");

}  // namespace tsk
