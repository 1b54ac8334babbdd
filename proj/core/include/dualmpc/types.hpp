#pragma once

#include <Eigen/Core>

namespace dualmpc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace dualmpc
