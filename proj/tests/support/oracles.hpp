#pragma once

// Reference computations used to freeze expected values. Written without
// Eigen and without the library so they can disagree with it.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace oracle {

using Mat4 = std::array<std::array<double, 4>, 4>;

inline double det3(double a, double b, double c, double d, double e, double f, double g, double h, double i) {
  return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

// Inverse through the adjugate: inv = adj(M) / det(M).
inline Mat4 cofactor_inverse(const Mat4& m) {
  Mat4 cof{};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      double sub[9];
      int k = 0;
      for (int i = 0; i < 4; ++i) {
        if (i == r) continue;
        for (int j = 0; j < 4; ++j) {
          if (j == c) continue;
          sub[k++] = m[i][j];
        }
      }
      const double minor = det3(sub[0], sub[1], sub[2], sub[3], sub[4], sub[5], sub[6], sub[7], sub[8]);
      cof[r][c] = ((r + c) % 2 == 0 ? 1.0 : -1.0) * minor;
    }
  }
  double det = 0.0;
  for (int c = 0; c < 4; ++c) det += m[0][c] * cof[0][c];
  Mat4 inv{};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) inv[r][c] = cof[c][r] / det;
  }
  return inv;
}

// rows: (ux, uy, uz, 1) line-of-sight rows in any frame.
inline Mat4 normal_matrix(const std::vector<std::array<double, 4>>& rows) {
  Mat4 n{};
  for (const auto& row : rows) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) n[i][j] += row[i] * row[j];
    }
  }
  return n;
}

inline double gdop(const std::vector<std::array<double, 4>>& rows) {
  const Mat4 q = cofactor_inverse(normal_matrix(rows));
  return std::sqrt(q[0][0] + q[1][1] + q[2][2] + q[3][3]);
}

inline double tdop(const std::vector<std::array<double, 4>>& rows) {
  const Mat4 q = cofactor_inverse(normal_matrix(rows));
  return std::sqrt(q[3][3]);
}

struct KsResult {
  double d = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic distribution
// (Stephens' small-sample correction on the statistic).
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  return {d, std::clamp(p, 0.0, 1.0)};
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double population_std(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

inline double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace oracle
