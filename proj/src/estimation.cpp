#include "vts/estimation.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace vts::estimation {
namespace {

constexpr double kSingularRatio = 1e-12;

Eigen::Matrix4d normal_inverse(const DesignMatrix& h) {
  const Eigen::Matrix4d n = h.transpose() * h;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(n);
  const auto& ev = eig.eigenvalues();
  if (!(ev(0) > kSingularRatio * ev(3))) {
    throw Error(ErrorCode::kGeometrySingular, "H^T H is singular for this satellite geometry");
  }
  return n.inverse();
}

std::vector<Vec3> positions_of(const PseudorangeSet& meas) {
  std::vector<Vec3> out;
  out.reserve(meas.size());
  for (const auto& m : meas) out.push_back(m.sat.position_m);
  return out;
}

}  // namespace

PseudorangeSet simulate_pseudoranges(const ReceiverTruth& truth,
                                     std::span<const SatelliteInput> sats,
                                     const MeasurementNoiseModel& noise) {
  NormalStream rng(noise.seed);
  PseudorangeSet out;
  out.reserve(sats.size());
  for (const auto& s : sats) {
    const Vec3 d = s.state.position_m - truth.position_m;
    const double range = d.norm();
    const Vec3 los = d / range;
    Observation o;
    o.sat_id = s.sat_id;
    o.sat = s.state;
    o.sat_clock_offset_s = s.clock.offset_s;
    o.pseudorange_m = range + kSpeedOfLight * (truth.clock_bias_s - s.clock.offset_s) +
                      rng.next(noise.sigma_pseudorange_m);
    o.range_rate_mps = los.dot(s.state.velocity_m_per_s - truth.velocity_mps) +
                       kSpeedOfLight * truth.clock_drift_s_per_s +
                       rng.next(noise.sigma_doppler_mps);
    out.push_back(std::move(o));
  }
  return out;
}

DesignMatrix design_matrix(std::span<const Vec3> sat_positions, const Vec3& rx_pos) {
  DesignMatrix h(static_cast<Eigen::Index>(sat_positions.size()), 4);
  for (std::size_t i = 0; i < sat_positions.size(); ++i) {
    const Vec3 d = sat_positions[i] - rx_pos;
    const double r = d.norm();
    if (r == 0.0) {
      throw Error(ErrorCode::kDegenerateGeometry, "satellite coincides with receiver estimate");
    }
    const auto row = static_cast<Eigen::Index>(i);
    h.block<1, 3>(row, 0) = (-d / r).transpose();
    h(row, 3) = 1.0;
  }
  return h;
}

DesignMatrix design_matrix_enu(std::span<const Vec3> sat_positions, const Vec3& rx_pos) {
  DesignMatrix h = design_matrix(sat_positions, rx_pos);
  const Eigen::Matrix3d rot = ecef_to_enu_rotation(rx_pos);
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    const Vec3 los = h.block<1, 3>(i, 0).transpose();
    h.block<1, 3>(i, 0) = (rot * los).transpose();
  }
  return h;
}

DopValues dop(const DesignMatrix& h) {
  if (h.rows() < 4) {
    throw Error(ErrorCode::kGeometrySingular, "DOP needs at least 4 satellites");
  }
  const Eigen::Matrix4d q = normal_inverse(h);
  DopValues d;
  d.gdop = std::sqrt(q.trace());
  d.pdop = std::sqrt(q(0, 0) + q(1, 1) + q(2, 2));
  d.tdop = std::sqrt(q(3, 3));
  d.hdop = std::sqrt(q(0, 0) + q(1, 1));
  d.vdop = std::sqrt(q(2, 2));
  return d;
}

PvtSolution solve_pvt(const PseudorangeSet& meas, const SolverOptions& options) {
  const auto n = static_cast<Eigen::Index>(meas.size());
  if (n < 4) {
    throw Error(ErrorCode::kInsufficientSatellites,
                "dynamic PVT needs at least 4 satellites, got " + std::to_string(n));
  }
  const std::vector<Vec3> sats = positions_of(meas);

  Vec3 pos = options.initial_position_m;
  double bias_m = kSpeedOfLight * options.initial_clock_bias_s;
  Eigen::VectorXd resid(n);
  int iter = 0;
  bool converged = false;
  while (iter < options.max_iter) {
    ++iter;
    const DesignMatrix h = design_matrix(sats, pos);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& m = meas[static_cast<std::size_t>(i)];
      const double predicted = (sats[static_cast<std::size_t>(i)] - pos).norm() + bias_m -
                               kSpeedOfLight * m.sat_clock_offset_s;
      resid(i) = m.pseudorange_m - predicted;
    }
    const Eigen::Matrix4d q = normal_inverse(h);
    const Eigen::Vector4d dx = q * (h.transpose() * resid);
    pos += dx.head<3>();
    bias_m += dx(3);
    if (dx.head<3>().norm() < options.tol_m) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::kNonConvergence,
                "PVT did not converge in " + std::to_string(options.max_iter) + " iterations");
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& m = meas[static_cast<std::size_t>(i)];
    resid(i) = m.pseudorange_m - ((sats[static_cast<std::size_t>(i)] - pos).norm() + bias_m -
                                  kSpeedOfLight * m.sat_clock_offset_s);
  }

  PvtSolution sol;
  sol.position_m = pos;
  sol.clock_bias_s = bias_m / kSpeedOfLight;
  sol.nsat = static_cast<int>(n);
  sol.iterations = iter;
  sol.residual_rms_m = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
  sol.dop = dop(design_matrix_enu(sats, pos));
  sol.valid = sol.nsat >= 4 && sol.dop.gdop <= options.gdop_threshold;
  return sol;
}

VelocityDrift solve_velocity_drift(const PseudorangeSet& meas, const PvtSolution& pvt) {
  const auto n = static_cast<Eigen::Index>(meas.size());
  if (n < 4) {
    throw Error(ErrorCode::kInsufficientSatellites,
                "velocity solution needs at least 4 satellites, got " + std::to_string(n));
  }
  const std::vector<Vec3> sats = positions_of(meas);
  const DesignMatrix h = design_matrix(sats, pvt.position_m);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& m = meas[static_cast<std::size_t>(i)];
    const Vec3 los = -h.block<1, 3>(i, 0).transpose();
    y(i) = m.range_rate_mps - los.dot(m.sat.velocity_m_per_s);
  }
  const Eigen::Vector4d x = normal_inverse(h) * (h.transpose() * y);
  return {x.head<3>(), x(3) / kSpeedOfLight};
}

TimingUncertainty timing_uncertainty(double sigma_p_m, const DopValues& d) {
  if (sigma_p_m < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "sigma_P must be non-negative");
  }
  return {sigma_p_m * d.gdop / kSpeedOfLight, sigma_p_m * d.tdop / kSpeedOfLight};
}

StaticTimeSolution static_time_solve(const PseudorangeSet& meas, const Vec3& known_rx_pos,
                                     double sigma_p_m) {
  if (meas.empty()) {
    throw Error(ErrorCode::kInsufficientSatellites, "static timing needs at least 1 satellite");
  }
  std::vector<double> biases;
  biases.reserve(meas.size());
  for (const auto& m : meas) {
    const double range = (m.sat.position_m - known_rx_pos).norm();
    biases.push_back((m.pseudorange_m - range) / kSpeedOfLight + m.sat_clock_offset_s);
  }
  double mean = 0.0;
  for (double b : biases) mean += b;
  mean /= static_cast<double>(biases.size());

  StaticTimeSolution out;
  out.clock_bias_s = mean;
  if (biases.size() == 1) {
    out.sigma_estimate_s = sigma_p_m / kSpeedOfLight;
  } else {
    double ss = 0.0;
    for (double b : biases) ss += (b - mean) * (b - mean);
    const double n = static_cast<double>(biases.size());
    out.sigma_estimate_s = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

}  // namespace vts::estimation
