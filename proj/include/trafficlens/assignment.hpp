#pragma once

#include <vector>

#include <Eigen/Core>

namespace trafficlens {

/// Minimum-cost assignment (Hungarian method with potentials, O(n^2 m)) on a
/// rectangular cost matrix. Returns, for each row, the assigned column or -1.
/// Every row is assigned when rows <= cols, and every column otherwise.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace trafficlens
