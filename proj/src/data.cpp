#include "tsk/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <sstream>

namespace tsk {

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(indices.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto src = static_cast<Eigen::Index>(indices[k]);
    const auto dst = static_cast<Eigen::Index>(k);
    out.X.row(dst) = X.row(src);
    out.y[dst] = y[src];
  }
  out.feature_names = feature_names;
  return out;
}

std::vector<FeatureStats> Dataset::feature_stats() const {
  std::vector<FeatureStats> stats(num_features());
  const double n = static_cast<double>(size());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const auto col = X.col(j);
    FeatureStats& s = stats[static_cast<std::size_t>(j)];
    s.min = col.minCoeff();
    s.max = col.maxCoeff();
    const double mean = col.mean();
    s.std = size() > 1 ? std::sqrt((col.array() - mean).square().sum() / (n - 1.0)) : 0.0;
  }
  return stats;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string_view rest(line);
  while (true) {
    const auto comma = rest.find(',');
    fields.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return fields;
}

bool parse_number(const std::string& s, double& value) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(value);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const TargetColumn& target) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, path.string() + ": no header row");
  const std::vector<std::string> header = split_fields(line);

  std::size_t target_col = 0;
  if (const auto* name = std::get_if<std::string>(&target)) {
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) throw Error(ErrorKind::MissingTarget, "no column named '" + *name + "'");
    target_col = static_cast<std::size_t>(it - header.begin());
  } else {
    target_col = std::get<std::size_t>(target);
    if (target_col >= header.size())
      throw Error(ErrorKind::MissingTarget, "target index " + std::to_string(target_col) +
                                                " out of range for " +
                                                std::to_string(header.size()) + " columns");
  }

  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  std::vector<std::size_t> linenos;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(lineno) + ": " +
                                             std::to_string(fields.size()) + " fields, header has " +
                                             std::to_string(header.size()));
    rows.push_back(std::move(fields));
    linenos.push_back(lineno);
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyDataset, path.string() + " has no data rows");

  // A column whose first value is not a number is treated as categorical.
  std::vector<std::size_t> feature_cols;
  double probe = 0.0;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const bool numeric = parse_number(rows.front()[j], probe);
    if (j == target_col) {
      if (!numeric)
        throw Error(ErrorKind::NonNumericTarget,
                    "target column '" + header[j] + "' is not numeric");
      continue;
    }
    if (numeric) {
      feature_cols.push_back(j);
    } else {
      std::cerr << "warning: dropping non-numeric column '" << header[j] << "'\n";
    }
  }

  Dataset data;
  data.X.resize(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(feature_cols.size()));
  data.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j : feature_cols) data.feature_names.push_back(header[j]);

  auto cell = [&](std::size_t n, std::size_t j) {
    double v = 0.0;
    if (!parse_number(rows[n][j], v))
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(linenos[n]) +
                                             ": column '" + header[j] + "': '" + rows[n][j] +
                                             "' is not a finite number");
    return v;
  };
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const auto r = static_cast<Eigen::Index>(n);
    for (std::size_t k = 0; k < feature_cols.size(); ++k)
      data.X(r, static_cast<Eigen::Index>(k)) = cell(n, feature_cols[k]);
    data.y[r] = cell(n, target_col);
  }
  return data;
}

Split split(const Dataset& data, Rng& rng, double ratio) {
  const std::size_t n = data.size();
  if (n < 2) throw Error(ErrorKind::TooSmall, "need at least 2 examples to split");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw Error(ErrorKind::InvalidArgument, "split ratio must be in (0, 1)");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  const std::span<const std::size_t> all(perm);
  return {TrainSplit(data.subset(all.first(n_train))), data.subset(all.subspan(n_train))};
}

Preprocessor fit_preprocessor(const TrainSplit& train, std::size_t max_dims) {
  const Dataset& d = train.data();
  const std::size_t n = d.size();
  const std::size_t dims = d.num_features();
  if (n < 2) throw Error(ErrorKind::TooSmall, "need at least 2 training examples");
  if (dims == 0) throw Error(ErrorKind::InvalidArgument, "dataset has no features");
  if (max_dims == 0) throw Error(ErrorKind::InvalidArgument, "max_dims must be >= 1");

  Preprocessor p;
  p.mean = d.X.colwise().mean();
  const RowMatrix centered = d.X.rowwise() - p.mean;
  p.scale = (centered.colwise().squaredNorm() / static_cast<double>(n - 1)).cwiseSqrt();
  for (std::size_t j = 0; j < dims; ++j)
    if (!(p.scale[static_cast<Eigen::Index>(j)] > 0.0))
      throw Error(ErrorKind::ConstantFeature,
                  "feature '" + (j < d.feature_names.size() ? d.feature_names[j] : std::to_string(j)) +
                      "' is constant on the training split");
  p.output_mean = d.y.mean();

  if (dims <= max_dims) {
    p.projection = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dims),
                                             static_cast<Eigen::Index>(dims));
    p.output_names = d.feature_names;
    return p;
  }

  const RowMatrix z = centered.array().rowwise() / p.scale.array();
  const Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorKind::SingularSystem, "covariance eigendecomposition failed");

  std::vector<Eigen::Index> order(dims);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::VectorXd& values = eig.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });

  const auto out_dims = static_cast<Eigen::Index>(max_dims);
  p.projection.resize(static_cast<Eigen::Index>(dims), out_dims);
  p.explained.resize(out_dims);
  for (Eigen::Index k = 0; k < out_dims; ++k) {
    Eigen::VectorXd v = eig.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    p.projection.col(k) = v;
    p.explained[k] = values[order[static_cast<std::size_t>(k)]];
    p.output_names.push_back("pc" + std::to_string(k + 1));
  }
  p.pca_applied = true;
  return p;
}

Dataset apply_preprocessor(const Preprocessor& p, const Dataset& data) {
  if (data.num_features() != p.input_dims())
    throw Error(ErrorKind::SchemaMismatch, "dataset has " + std::to_string(data.num_features()) +
                                               " features, preprocessor was fitted on " +
                                               std::to_string(p.input_dims()));
  Dataset out;
  const RowMatrix z = (data.X.rowwise() - p.mean).array().rowwise() / p.scale.array();
  out.X = p.pca_applied ? RowMatrix(z * p.projection) : z;
  out.y = data.y.array() - p.output_mean;
  out.feature_names = p.output_names;
  return out;
}

std::vector<std::size_t> sample_batch(std::size_t n, std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (batch_size >= n) return all;
  std::vector<std::size_t> picked;
  picked.reserve(batch_size);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), batch_size, rng);
  return picked;
}

Dataset make_synthetic(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(-std::numbers::pi, std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(n), 5);
  d.y.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) d.X(i, j) = uniform(rng);
    d.y[i] = std::sin(d.X(i, 0)) * d.X(i, 1) + 0.1 * noise(rng);
  }
  d.feature_names = {"x1", "x2", "x3", "x4", "x5"};
  return d;
}

void write_csv(const Dataset& data, const std::filesystem::path& path,
               const std::string& target_name) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  for (std::size_t j = 0; j < data.num_features(); ++j)
    out << (j < data.feature_names.size() ? data.feature_names[j] : "x" + std::to_string(j + 1))
        << ',';
  out << target_name << '\n';
  char buf[32];
  auto put = [&](double v) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, end - buf);
  };
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) {
      put(data.X(i, j));
      out.put(',');
    }
    put(data.y[i]);
    out.put('\n');
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace tsk
