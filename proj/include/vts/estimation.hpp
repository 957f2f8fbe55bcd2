#pragma once

#include "vts/common.hpp"
#include "vts/constellation.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace vts::estimation {

using DesignMatrix = Eigen::Matrix<double, Eigen::Dynamic, 4>;

/// URE and range-rate noise of the synthesized observations.
struct MeasurementNoiseModel {
  double sigma_pseudorange_m = 0.0;
  double sigma_doppler_mps = 0.0;
  std::uint64_t seed = 0;
};

struct ReceiverTruth {
  Vec3 position_m = Vec3::Zero();
  Vec3 velocity_mps = Vec3::Zero();
  double clock_bias_s = 0.0;
  double clock_drift_s_per_s = 0.0;
};

struct SatelliteInput {
  std::string sat_id;
  constellation::EcefState state;
  constellation::SatelliteClock clock;
};

struct Observation {
  std::string sat_id;
  double pseudorange_m = 0.0;
  double range_rate_mps = 0.0;
  constellation::EcefState sat;
  double sat_clock_offset_s = 0.0;
};

using PseudorangeSet = std::vector<Observation>;

struct DopValues {
  double gdop = 0.0;
  double pdop = 0.0;
  double tdop = 0.0;
  double hdop = 0.0;
  double vdop = 0.0;
};

struct PvtSolution {
  Vec3 position_m = Vec3::Zero();
  double clock_bias_s = 0.0;
  Vec3 velocity_mps = Vec3::Zero();
  double clock_drift_s_per_s = 0.0;
  DopValues dop;
  bool valid = false;
  int nsat = 0;
  int iterations = 0;
  double residual_rms_m = 0.0;
};

struct SolverOptions {
  int max_iter = 20;
  double tol_m = 1e-4;
  double gdop_threshold = 6.0;
  Vec3 initial_position_m = Vec3::Zero();
  double initial_clock_bias_s = 0.0;
};

/// pseudorange = |sat - rx| + c * (rx bias - sat offset) + N(0, sigma_P);
/// the range rate follows from the relative velocity and the rx clock drift.
/// Deterministic in noise.seed.
PseudorangeSet simulate_pseudoranges(const ReceiverTruth& truth,
                                     std::span<const SatelliteInput> sats,
                                     const MeasurementNoiseModel& noise);

/// Rows are (-LOS unit vector from rx to sat, 1) in ECEF.
DesignMatrix design_matrix(std::span<const Vec3> sat_positions, const Vec3& rx_pos);

/// Same geometry with line-of-sight components rotated into ENU at rx_pos.
DesignMatrix design_matrix_enu(std::span<const Vec3> sat_positions, const Vec3& rx_pos);

/// DOP factors from Q = (H^T H)^-1; H is taken to be expressed in ENU.
DopValues dop(const DesignMatrix& h);

/// Gauss-Newton on (position, c * bias). Throws kInsufficientSatellites,
/// kGeometrySingular or kNonConvergence.
PvtSolution solve_pvt(const PseudorangeSet& meas, const SolverOptions& options = {});

struct VelocityDrift {
  Vec3 velocity_mps = Vec3::Zero();
  double clock_drift_s_per_s = 0.0;
};

/// One linear solve with the pseudorange design matrix at the PVT position.
VelocityDrift solve_velocity_drift(const PseudorangeSet& meas, const PvtSolution& pvt);

struct TimingUncertainty {
  double gdop_bound_s = 0.0;  // sigma_P * GDOP / c, as quoted for clock solutions
  double tdop_bound_s = 0.0;  // sigma_P * TDOP / c
};

TimingUncertainty timing_uncertainty(double sigma_p_m, const DopValues& dop);

struct StaticTimeSolution {
  double clock_bias_s = 0.0;
  double sigma_estimate_s = 0.0;
};

/// Clock bias from one or more satellites at a known receiver position.
/// `sigma_p_m` is only used to report the uncertainty of a single-satellite fix.
StaticTimeSolution static_time_solve(const PseudorangeSet& meas, const Vec3& known_rx_pos,
                                     double sigma_p_m = 0.0);

}  // namespace vts::estimation
