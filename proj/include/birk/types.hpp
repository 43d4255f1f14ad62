#pragma once

#include <Eigen/Core>

namespace birk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace birk
