#include "rydthz/level_system.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace rydthz {

namespace {
constexpr double kLoopClosureTolerance = constants::kTwoPi * 1.0;  // 1 Hz
}

const char* field_name(FieldLabel label) {
  switch (label) {
    case FieldLabel::kA1: return "A1";
    case FieldLabel::kA2: return "A2";
    case FieldLabel::kA3: return "A3";
    case FieldLabel::kT: return "T";
    case FieldLabel::kA4: return "A4";
    case FieldLabel::kS: return "S";
  }
  return "?";
}

double LevelScheme::loop_frequency_residual() const {
  double sum = 0.0;
  for (const auto& t : loop) sum += t.sign * t.frequency;
  return sum;
}

void LevelScheme::validate() const {
  std::array<bool, kNumLevels> visited{};
  int level = 0;  // loop starts and ends at the ground level
  visited[0] = true;
  for (int i = 0; i < kNumLevels; ++i) {
    const auto& t = loop[i];
    if (t.lower < 0 || t.lower >= kNumLevels || t.upper < 0 ||
        t.upper >= kNumLevels || t.lower == t.upper) {
      throw ConfigError("level scheme: transition " + std::to_string(i) +
                        " has invalid level indices");
    }
    if (t.sign != 1 && t.sign != -1) {
      throw ConfigError("level scheme: transition sign must be +1 or -1");
    }
    if (!(t.dipole > 0.0)) {
      throw ConfigError("level scheme: dipole moments must be > 0");
    }
    const int from = t.sign > 0 ? t.lower : t.upper;
    const int to = t.sign > 0 ? t.upper : t.lower;
    if (from != level) {
      throw ConfigError("level scheme: transitions do not form an ordered "
                        "loop at leg " + std::to_string(i));
    }
    if (i < kNumLevels - 1) {
      if (visited[to]) {
        throw ConfigError("level scheme: loop revisits level " +
                          std::to_string(to));
      }
      visited[to] = true;
    } else if (to != 0) {
      throw ConfigError("level scheme: loop does not return to ground");
    }
    level = to;
  }
  if (roles[0] != LevelRole::kGround) {
    throw ConfigError("level scheme: level 0 must be the ground state");
  }
  if (std::abs(loop_frequency_residual()) > kLoopClosureTolerance) {
    throw ConfigError("level scheme: signed transition frequencies around "
                      "the loop do not close within 1 Hz");
  }
  for (const auto& d : decays) {
    if (d.from < 0 || d.from >= kNumLevels || d.to < 0 ||
        d.to >= kNumLevels || d.from == d.to) {
      throw ConfigError("level scheme: decay channel has invalid indices");
    }
    if (d.rate < 0.0) {
      throw ConfigError("level scheme: decay rates must be >= 0");
    }
  }
  for (int i = 0; i < kNumLevels; ++i) {
    for (int j = 0; j < kNumLevels; ++j) {
      if (dephasing(i, j) < 0.0) {
        throw ConfigError("level scheme: dephasing rates must be >= 0");
      }
      if (std::abs(dephasing(i, j) - dephasing(j, i)) >
          1e-12 * std::max(1.0, dephasing(i, j))) {
        throw ConfigError("level scheme: dephasing matrix must be symmetric");
      }
    }
  }
}

void DriveField::validate() const {
  if (!std::isfinite(rabi.real()) || !std::isfinite(rabi.imag())) {
    throw ConfigError(std::string("field ") + field_name(label) +
                      ": Rabi frequency must be finite");
  }
  if (!(frequency > 0.0)) {
    throw ConfigError(std::string("field ") + field_name(label) +
                      ": frequency must be > 0");
  }
  const double expected_k = constants::kTwoPi * frequency /
                            constants::kSpeedOfLight;
  if (std::abs(wavevector - expected_k) > 1e-9 * expected_k) {
    throw ConfigError(std::string("field ") + field_name(label) +
                      ": |k| inconsistent with 2 pi nu / c");
  }
  if (std::abs(direction.norm() - 1.0) > 1e-9) {
    throw ConfigError(std::string("field ") + field_name(label) +
                      ": direction must be a unit vector");
  }
  if (loop_sign != 1 && loop_sign != -1) {
    throw ConfigError(std::string("field ") + field_name(label) +
                      ": loop sign must be +1 or -1");
  }
}

DriveField make_drive_field(FieldLabel label, Complex rabi, double detuning,
                            double frequency_hz, const Vec3d& direction) {
  DriveField f;
  f.label = label;
  f.rabi = rabi;
  f.detuning = detuning;
  f.frequency = frequency_hz;
  f.direction = direction.normalized();
  f.wavevector = constants::kTwoPi * frequency_hz / constants::kSpeedOfLight;
  // Loop order: A1, A2, A3, T absorbed; A4 and S emitted.
  f.loop_sign = (label == FieldLabel::kA4 || label == FieldLabel::kS) ? -1 : 1;
  return f;
}

DensityMatrix::Diagnostics DensityMatrix::diagnostics() const {
  Diagnostics d{};
  d.hermiticity_residual = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  d.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
  const Mat6c symmetrized = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat6c> eigensolver(symmetrized);
  d.min_eigenvalue = eigensolver.eigenvalues().minCoeff();
  return d;
}

Mat6c build_hamiltonian(const LevelScheme& scheme,
                        const std::vector<DriveField>& fields,
                        double velocity) {
  scheme.validate();
  std::array<const DriveField*, kNumLevels> by_index{};
  for (const auto& f : fields) {
    f.validate();
    const int idx = field_index(f.label);
    if (by_index[idx] != nullptr) {
      throw ConfigError(std::string("duplicate drive field ") +
                        field_name(f.label));
    }
    by_index[idx] = &f;
  }
  for (int i = 0; i < kNumLevels; ++i) {
    if (by_index[i] == nullptr) {
      throw ConfigError(std::string("loop transition without a field: ") +
                        field_name(static_cast<FieldLabel>(i)));
    }
  }

  Mat6c h = Mat6c::Zero();
  for (int i = 0; i < kNumLevels; ++i) {
    const auto& t = scheme.loop[i];
    const Complex half_rabi = 0.5 * by_index[i]->rabi;
    h(t.upper, t.lower) += half_rabi;
    h(t.lower, t.upper) += std::conj(half_rabi);
  }

  // Cumulative signed, Doppler-shifted detunings along the ladder legs; the
  // signal leg is fixed by closure and contributes no detuning of its own.
  double cumulative = 0.0;
  for (int i = 0; i < kNumLevels - 1; ++i) {
    const auto& t = scheme.loop[i];
    const DriveField& f = *by_index[i];
    const double axial_k = f.wavevector * f.direction.z();
    cumulative += t.sign * (f.detuning - axial_k * velocity);
    const int reached = t.sign > 0 ? t.upper : t.lower;
    h(reached, reached) = Complex(-cumulative, 0.0);
  }
  return h;
}

MatXc build_liouvillian(const Mat6c& hamiltonian, const LevelScheme& scheme) {
  const double h_scale = hamiltonian.cwiseAbs().maxCoeff();
  if ((hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, h_scale)) {
    throw ConfigError("build_liouvillian: Hamiltonian is not Hermitian");
  }
  for (const auto& d : scheme.decays) {
    if (d.rate < 0.0) {
      throw ConfigError("build_liouvillian: negative decay rate");
    }
  }

  const Complex im(0.0, 1.0);
  MatXc gen = MatXc::Zero(kLiouvilleDim, kLiouvilleDim);

  // -i [H, rho]
  for (int i = 0; i < kNumLevels; ++i) {
    for (int j = 0; j < kNumLevels; ++j) {
      for (int k = 0; k < kNumLevels; ++k) {
        gen(vec_index(i, k), vec_index(j, k)) -= im * hamiltonian(i, j);
        gen(vec_index(k, i), vec_index(k, j)) += im * hamiltonian(j, i);
      }
    }
  }

  // Population decay: jump operators sqrt(G) |to><from|.
  for (const auto& d : scheme.decays) {
    gen(vec_index(d.to, d.to), vec_index(d.from, d.from)) += d.rate;
    for (int a = 0; a < kNumLevels; ++a) {
      gen(vec_index(a, d.from), vec_index(a, d.from)) -= 0.5 * d.rate;
      gen(vec_index(d.from, a), vec_index(d.from, a)) -= 0.5 * d.rate;
    }
  }

  // Pairwise pure dephasing of the (i, j) coherences.
  for (int i = 0; i < kNumLevels; ++i) {
    for (int j = 0; j < kNumLevels; ++j) {
      if (i != j && scheme.dephasing(i, j) > 0.0) {
        gen(vec_index(i, j), vec_index(i, j)) -= scheme.dephasing(i, j);
      }
    }
  }
  return gen;
}

DensityMatrix steady_state(const MatXc& liouvillian, double velocity,
                           const SteadyStateOptions& options) {
  if (liouvillian.rows() != kLiouvilleDim ||
      liouvillian.cols() != kLiouvilleDim) {
    throw ConfigError("steady_state: generator must be 36x36");
  }

  // The trace row is scaled to the generator's magnitude; otherwise the
  // constrained system is artificially ill-conditioned by row imbalance.
  const double row_scale =
      std::max(liouvillian.norm() / kNumLevels, 1.0);
  MatXc constrained = liouvillian;
  constrained.row(0).setZero();
  for (int k = 0; k < kNumLevels; ++k) {
    constrained(0, vec_index(k, k)) = Complex(row_scale, 0.0);
  }
  VecXc rhs = VecXc::Zero(kLiouvilleDim);
  rhs(0) = Complex(row_scale, 0.0);

  Eigen::PartialPivLU<MatXc> lu(constrained);
  if (lu.rcond() < options.rcond_screen) {
    // The kernel direction itself is always numerically null; degeneracy
    // means a second singular value collapses toward it.
    Eigen::JacobiSVD<MatXc> svd(liouvillian);
    const auto& sv = svd.singularValues();
    const double smallest = sv(kLiouvilleDim - 1);
    const double second = sv(kLiouvilleDim - 2);
    if (second < 1e6 * smallest) {
      throw PhysicsError("steady_state: degenerate steady state (second "
                         "singular value " + std::to_string(second) +
                         " vs smallest " + std::to_string(smallest) + ")");
    }
    throw PhysicsError("steady_state: constrained solve is ill-conditioned");
  }

  VecXc x = lu.solve(rhs);
  x += lu.solve(rhs - constrained * x);  // two refinement passes
  x += lu.solve(rhs - constrained * x);

  const double scale = liouvillian.norm();
  const double residual = (liouvillian * x).norm();
  if (residual > options.residual_tolerance * scale) {
    x += lu.solve(rhs - constrained * x);
    if ((liouvillian * x).norm() > options.residual_tolerance * scale) {
      throw PhysicsError("steady_state: solver did not converge (residual " +
                         std::to_string(residual / scale) + ")");
    }
  }

  DensityMatrix state;
  state.velocity = velocity;
  for (int i = 0; i < kNumLevels; ++i) {
    for (int j = 0; j < kNumLevels; ++j) {
      state.rho(i, j) = x(vec_index(i, j));
    }
  }
  return state;
}

Complex coherence(const DensityMatrix& state, int i, int j) {
  if (i < 0 || i >= kNumLevels || j < 0 || j >= kNumLevels) {
    throw std::out_of_range("coherence: level index out of range");
  }
  return state.rho(i, j);
}

}  // namespace rydthz
