#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <stdexcept>
#include <string>

namespace spinorlab {

using cd = std::complex<double>;

using Mat4C = Eigen::Matrix4cd;
using Mat4R = Eigen::Matrix4d;
using Mat2C = Eigen::Matrix2cd;
using Vec4C = Eigen::Vector4cd;
using RowVec4C = Eigen::Matrix<cd, 1, 4>;
using MatXC = Eigen::MatrixXcd;
using VecXC = Eigen::VectorXcd;

constexpr double kEtaDiag[4] = {1.0, -1.0, -1.0, -1.0};

inline double eta(int a, int b) { return a == b ? kEtaDiag[a] : 0.0; }

inline Mat4R eta_matrix() {
  Mat4R m = Mat4R::Zero();
  for (int a = 0; a < 4; ++a) m(a, a) = kEtaDiag[a];
  return m;
}

// ---- error types ------------------------------------------------------

struct SpinorlabError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoIntertwiner : SpinorlabError {
  using SpinorlabError::SpinorlabError;
};
struct AmbiguousIntertwiner : SpinorlabError {
  using SpinorlabError::SpinorlabError;
};
struct SingularElement : SpinorlabError {
  using SpinorlabError::SpinorlabError;
};
struct DegenerateMetric : SpinorlabError {
  using SpinorlabError::SpinorlabError;
};
struct CflViolation : SpinorlabError {
  using SpinorlabError::SpinorlabError;
};
struct SingularGammaT : SpinorlabError {
  using SpinorlabError::SpinorlabError;
};
struct SupportTouchesBoundary : SpinorlabError {
  using SpinorlabError::SpinorlabError;
};
struct BandTooNarrow : SpinorlabError {
  using SpinorlabError::SpinorlabError;
};
struct RankTooLarge : SpinorlabError {
  using SpinorlabError::SpinorlabError;
};
struct GramNotPsd : SpinorlabError {
  using SpinorlabError::SpinorlabError;
};
struct NotStatic : SpinorlabError {
  using SpinorlabError::SpinorlabError;
};
struct LevelOverflow : SpinorlabError {
  using SpinorlabError::SpinorlabError;
};
struct ConfigError : SpinorlabError {
  using SpinorlabError::SpinorlabError;
};

}  // namespace spinorlab
