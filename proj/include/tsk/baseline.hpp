#pragma once

#include <Eigen/Dense>

#include "tsk/data.hpp"

namespace tsk {

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
};

/// Closed-form ridge regression with an unpenalized intercept: solves
/// (Xc^T Xc + lambda I) w = Xc^T yc on column-centered data and sets
/// b0 = mean(y) - mean(X) w. Throws SingularSystem (possible only when
/// lambda == 0 and X is rank deficient).
LinearModel ridge_fit(const RowMatrix& X, const Eigen::VectorXd& y, double lambda);

/// b0 + X w. Throws DimensionMismatch.
Eigen::VectorXd ridge_predict(const LinearModel& model, const RowMatrix& X);

}  // namespace tsk
