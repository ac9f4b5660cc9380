#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bcpp/lattice.hpp"

namespace bcpp::testing {

// Q-matrix of the walk jumping at rate lambda along every edge of the torus.
Eigen::MatrixXd walk_generator(const TorusGeometry& geom, double lambda);

// Dense e^{tA} through Eigen's Pade scaling-and-squaring.
Eigen::MatrixXd dense_expm(const Eigen::MatrixXd& a, double t);

std::string read_file(const std::filesystem::path& path);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace bcpp::testing
