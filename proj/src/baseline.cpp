#include "tsk/baseline.hpp"

#include <string>

namespace tsk {

LinearModel ridge_fit(const RowMatrix& X, const Eigen::VectorXd& y, double lambda) {
  if (X.rows() == 0) throw Error(ErrorKind::EmptyDataset, "ridge regression needs data");
  if (X.rows() != y.size())
    throw Error(ErrorKind::DimensionMismatch, "X has " + std::to_string(X.rows()) +
                                                  " rows, y has " + std::to_string(y.size()));
  if (!(lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be >= 0");

  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::MatrixXd A = Xc.transpose() * Xc;
  A.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = Xc.transpose() * yc;

  LinearModel model;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  // LDLT succeeds on semidefinite input too, so check the pivots ourselves.
  const double scale = std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success ||
      (ldlt.vectorD().array().abs() <= 1e-12 * scale).any())
    throw Error(ErrorKind::SingularSystem, "normal equations are singular; use lambda > 0");
  model.weights = ldlt.solve(rhs);
  model.bias = y_mean - x_mean.dot(model.weights);
  return model;
}

Eigen::VectorXd ridge_predict(const LinearModel& model, const RowMatrix& X) {
  if (X.cols() != model.weights.size())
    throw Error(ErrorKind::DimensionMismatch, "X has " + std::to_string(X.cols()) +
                                                  " columns, model has " +
                                                  std::to_string(model.weights.size()) + " weights");
  return (X * model.weights).array() + model.bias;
}

}  // namespace tsk
