#include "oracles.hpp"

#include <fstream>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace bcpp::testing {

Eigen::MatrixXd walk_generator(const TorusGeometry& geom, double lambda) {
  const auto n = static_cast<Eigen::Index>(geom.n_sites());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (int k = 0; k < geom.degree(); ++k) {
      q(x, static_cast<Eigen::Index>(geom.neighbor(static_cast<std::size_t>(x), k))) += lambda;
    }
    q(x, x) -= lambda * geom.degree();
  }
  return q;
}

Eigen::MatrixXd dense_expm(const Eigen::MatrixXd& a, double t) { return (a * t).exp(); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("bcpp-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace bcpp::testing
