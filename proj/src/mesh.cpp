#include "kvstring/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace kvstring {

Mesh build_mesh(int n_elements, double grading) {
  if (n_elements < 2) throw std::invalid_argument("build_mesh: n_elements must be at least 2");
  if (n_elements % 2 != 0) throw std::invalid_argument("build_mesh: n_elements must be even");
  if (!(grading >= 1.0)) throw std::invalid_argument("build_mesh: grading must be >= 1");

  const int half = n_elements / 2;
  Mesh mesh;
  mesh.grading = grading;
  mesh.nodes.reserve(static_cast<std::size_t>(n_elements) + 1);
  for (int j = 0; j < half; ++j)
    mesh.nodes.push_back(-1.0 + static_cast<double>(j) / static_cast<double>(half));
  mesh.nodes.push_back(0.0);
  for (int j = 1; j <= half; ++j) {
    const double s = static_cast<double>(j) / static_cast<double>(half);
    mesh.nodes.push_back(grading == 1.0 ? s : std::pow(s, grading));
  }
  mesh.nodes.back() = 1.0;
  return mesh;
}

}  // namespace kvstring
