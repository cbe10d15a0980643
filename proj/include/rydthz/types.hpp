#ifndef RYDTHZ_TYPES_HPP
#define RYDTHZ_TYPES_HPP

#include <complex>

#include <Eigen/Dense>

namespace rydthz {

using Complex = std::complex<double>;

using Mat2c = Eigen::Matrix2cd;
using Vec2c = Eigen::Vector2cd;
using Mat6c = Eigen::Matrix<Complex, 6, 6>;
using Vec3d = Eigen::Vector3d;
using MatXc = Eigen::MatrixXcd;
using VecXc = Eigen::VectorXcd;

inline constexpr int kNumLevels = 6;
inline constexpr int kLiouvilleDim = kNumLevels * kNumLevels;

/// Index of rho_{ij} in the row-vectorized density matrix.
inline constexpr int vec_index(int i, int j) { return kNumLevels * i + j; }

namespace constants {
inline constexpr double kSpeedOfLight = 299792458.0;        // m/s
inline constexpr double kPlanck = 6.62607015e-34;           // J s
inline constexpr double kHbar = 1.054571817e-34;            // J s
inline constexpr double kBoltzmann = 1.380649e-23;          // J/K
inline constexpr double kEpsilon0 = 8.8541878128e-12;       // F/m
inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
}  // namespace constants

}  // namespace rydthz

#endif  // RYDTHZ_TYPES_HPP
