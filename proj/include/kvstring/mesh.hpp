#pragma once

#include <cstddef>
#include <vector>

namespace kvstring {

// Partition of [-1,1] with x=0 as an exact node, so every element lies
// entirely inside the damped or the undamped half.
struct Mesh {
  std::vector<double> nodes;
  double grading = 1.0;

  std::size_t n_elements() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  std::size_t n_interior() const { return nodes.size() >= 2 ? nodes.size() - 2 : 0; }
};

// n_elements/2 elements on each half. The left half is uniform; for
// grading > 1 the right-half nodes are x_j = (j/(n/2))^grading, shrinking the
// elements toward the degeneracy at x=0.
Mesh build_mesh(int n_elements, double grading = 1.0);

}  // namespace kvstring
