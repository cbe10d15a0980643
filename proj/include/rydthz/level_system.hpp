#ifndef RYDTHZ_LEVEL_SYSTEM_HPP
#define RYDTHZ_LEVEL_SYSTEM_HPP

#include <array>
#include <vector>

#include "rydthz/errors.hpp"
#include "rydthz/types.hpp"

namespace rydthz {

enum class LevelRole { kGround, kIntermediate, kRydberg };

/// Field labels in loop order: the ladder 0->1->2->3->4 is driven by
/// A1, A2, A3 and the THz field; A4 stimulates 4->5 emission and the
/// signal closes 5->0.
enum class FieldLabel { kA1, kA2, kA3, kT, kA4, kS };

inline constexpr int field_index(FieldLabel label) {
  return static_cast<int>(label);
}
const char* field_name(FieldLabel label);

/// One leg of the six-level loop. sign = +1 when a photon is absorbed
/// traversing the loop in its stated order, -1 when one is emitted.
struct LoopTransition {
  int lower = 0;
  int upper = 0;
  int sign = +1;
  double frequency = 0.0;  // transition angular frequency, rad/s
  double dipole = 0.0;     // reduced dipole moment, C m
};

struct DecayChannel {
  int from = 0;
  int to = 0;
  double rate = 0.0;  // population decay rate, rad/s
};

struct LevelScheme {
  std::array<LevelRole, kNumLevels> roles{};
  // loop[i] is the transition driven by the field with field_index i.
  std::array<LoopTransition, kNumLevels> loop{};
  std::vector<DecayChannel> decays;
  Eigen::Matrix<double, kNumLevels, kNumLevels> dephasing =
      Eigen::Matrix<double, kNumLevels, kNumLevels>::Zero();  // rad/s

  /// Signed sum of the transition angular frequencies around the loop.
  double loop_frequency_residual() const;
  /// Checks loop topology, energy closure (within 2*pi*1 rad/s), rate and
  /// dipole signs. Throws ConfigError.
  void validate() const;
};

struct DriveField {
  FieldLabel label = FieldLabel::kA1;
  Complex rabi{0.0, 0.0};        // rad/s
  double detuning = 0.0;         // rad/s from the assigned transition
  Vec3d direction{0.0, 0.0, 1.0};
  double wavevector = 0.0;       // |k| = 2 pi nu / c, rad/m
  double frequency = 0.0;        // field frequency nu, Hz
  int loop_sign = +1;

  void validate() const;
};

/// Builds a field with |k| derived from the frequency and the loop sign
/// taken from the label's place in the loop.
DriveField make_drive_field(FieldLabel label, Complex rabi, double detuning,
                            double frequency_hz,
                            const Vec3d& direction = Vec3d(0, 0, 1));

struct DensityMatrix {
  Mat6c rho = Mat6c::Zero();
  double velocity = 0.0;

  struct Diagnostics {
    double hermiticity_residual;  // max |rho_ij - conj(rho_ji)|
    double trace_error;           // |tr(rho) - 1|
    double min_eigenvalue;
  };
  Diagnostics diagnostics() const;
};

/// Rotating-frame Hamiltonian at axial velocity v. Off-diagonals carry
/// Omega/2 on each loop transition; the diagonal of each level is minus the
/// cumulative signed detuning along the loop path from the ground state,
/// with every leg's detuning Doppler-shifted by its axial k v. The signal
/// leg's detuning is fixed by loop closure and does not enter the diagonal.
Mat6c build_hamiltonian(const LevelScheme& scheme,
                        const std::vector<DriveField>& fields,
                        double velocity);

/// Vectorized Lindblad generator L with d vec(rho)/dt = L vec(rho),
/// row-major vectorization (index 6 i + j).
MatXc build_liouvillian(const Mat6c& hamiltonian, const LevelScheme& scheme);

struct SteadyStateOptions {
  // rcond below this triggers the singular-value degeneracy test.
  double rcond_screen = 1e-10;
  double residual_tolerance = 1e-10;  // |L rho| <= tol * |L|_F
};

/// Trace-normalized kernel element of the generator, found by replacing the
/// d rho_00/dt row with the trace constraint (deterministic direct solve).
DensityMatrix steady_state(const MatXc& liouvillian, double velocity = 0.0,
                           const SteadyStateOptions& options = {});

Complex coherence(const DensityMatrix& state, int i, int j);

}  // namespace rydthz

#endif  // RYDTHZ_LEVEL_SYSTEM_HPP
