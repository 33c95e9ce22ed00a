#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>

namespace trmfem {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Units: N, mm, MPa throughout. Self-weight densities enter in kN/m^3 and are
// converted to N/mm^3 internally (factor 1e-6). Forces are reported in kN at
// the post-processing boundary only.
constexpr double kSelfWeightToForceDensity = 1.0e-6;  // kN/m^3 -> N/mm^3

// Voigt order [xx, yy, zz, xy, yz, zx]; strains carry engineering shear.

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class MeshInversionError : public Error {
 public:
  MeshInversionError(int element_id, double det)
      : Error("non-positive Jacobian (det=" + std::to_string(det) +
              ") in element " + std::to_string(element_id)),
        element_id(element_id) {}
  int element_id;
};

class MaterialFailureError : public Error {
 public:
  MaterialFailureError(int element_id, int point, const std::string& detail)
      : Error("material update failed in element " + std::to_string(element_id) +
              ", point " + std::to_string(point) + ": " + detail),
        element_id(element_id),
        point(point) {}
  int element_id;
  int point;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& field_path, const std::string& message)
      : Error(field_path + ": " + message), field_path(field_path) {}
  std::string field_path;
};

inline Mat3 voigt_to_mat(const Vec6& s) {
  Mat3 m;
  m << s[0], s[3], s[5],
       s[3], s[1], s[4],
       s[5], s[4], s[2];
  return m;
}

inline Vec6 mat_to_stress_voigt(const Mat3& m) {
  Vec6 s;
  s << m(0, 0), m(1, 1), m(2, 2), m(0, 1), m(1, 2), m(0, 2);
  return s;
}

inline Vec6 mat_to_strain_voigt(const Mat3& m) {
  Vec6 s;
  s << m(0, 0), m(1, 1), m(2, 2), 2.0 * m(0, 1), 2.0 * m(1, 2), 2.0 * m(0, 2);
  return s;
}

// Isotropic elasticity, strain Voigt in / stress Voigt out.
inline Mat6 isotropic_elasticity(double E, double nu) {
  const double lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double mu = E / (2.0 * (1.0 + nu));
  Mat6 D = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) D(i, j) = lam;
    D(i, i) = lam + 2.0 * mu;
    D(3 + i, 3 + i) = mu;
  }
  return D;
}

}  // namespace trmfem
