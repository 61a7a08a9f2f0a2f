#pragma once

// Closed-form optimal relay amplification: the point-to-point optimum and the
// one-parameter family D(theta) that contains every boundary-optimal gain of
// the two-user relay MAC.

#include <afrelay/channel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace afrelay {

/// A feasible member of the MAC family together with its angle and the
/// normalizer gamma (gain = gamma * unnormalized direction).
struct ThetaGain {
  double theta = 0.0;
  RelayGain gain;
  double gamma = 0.0;
};

/// Channel-coupling sums A_uv = sum g^2 f_u f_v / (1 + P1 f1^2 + P2 f2^2 + P_R g^2).
struct CouplingSums {
  double a11 = 0.0;
  double a22 = 0.0;
  double a12 = 0.0;
};

namespace detail {

inline double mac_denominator(const MacChannel& net, std::size_t i) {
  return 1.0 + net.p1 * sq(net.f1[i]) + net.p2 * sq(net.f2[i]) + net.p_relay * sq(net.g[i]);
}

// Map an angle onto [-pi/2, pi/2]; D(theta) and D(theta + pi) differ only in sign.
inline double canonical_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  while (theta > pi / 2) theta -= pi;
  while (theta < -pi / 2) theta += pi;
  return theta;
}

}  // namespace detail

inline CouplingSums coupling_sums(const MacChannel& net) {
  validate(net);
  CouplingSums a;
  for (std::size_t i = 0; i < net.relays(); ++i) {
    const double w = detail::sq(net.g[i]) / detail::mac_denominator(net, i);
    a.a11 += w * detail::sq(net.f1[i]);
    a.a22 += w * detail::sq(net.f2[i]);
    a.a12 += w * net.f1[i] * net.f2[i];
  }
  return a;
}

// ---------------------------------------------------------------------------
// Point to point
// ---------------------------------------------------------------------------

/// gamma of the PTP optimum: sqrt(P_R / sum (f g / M)^2 (1 + P f^2)).
inline double ptp_optimal_gamma(const PtpChannel& net) {
  validate(net);
  double acc = 0.0;
  for (std::size_t i = 0; i < net.relays(); ++i) {
    const double m = 1.0 + net.p_source * detail::sq(net.f[i]) + net.p_relay * detail::sq(net.g[i]);
    acc += detail::sq(net.f[i] * net.g[i] / m) * (1.0 + net.p_source * detail::sq(net.f[i]));
  }
  if (acc == 0.0) throw DisconnectedNetworkError("ptp: every f_i g_i is zero");
  return std::sqrt(net.p_relay / acc);
}

/// d_i = gamma f_i g_i / (1 + P f_i^2 + P_R g_i^2).
inline RelayGain ptp_optimal_gain(const PtpChannel& net) {
  const double gamma = ptp_optimal_gamma(net);
  std::vector<double> d(net.relays());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double m = 1.0 + net.p_source * detail::sq(net.f[i]) + net.p_relay * detail::sq(net.g[i]);
    d[i] = gamma * net.f[i] * net.g[i] / m;
  }
  return RelayGain(std::move(d));
}

// ---------------------------------------------------------------------------
// MAC family D(theta)
// ---------------------------------------------------------------------------

/// Unnormalized family member g (P1 f1 sin(theta) + P2 f2 cos(theta)) / M.
inline RelayGain mac_family_direction(const MacChannel& net, double theta) {
  validate(net);
  const double s = std::sin(theta), c = std::cos(theta);
  std::vector<double> d(net.relays());
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = net.g[i] * (net.p1 * net.f1[i] * s + net.p2 * net.f2[i] * c) /
           detail::mac_denominator(net, i);
  return RelayGain(std::move(d));
}

/// Feasible D(theta). gamma comes from the explicit radical; the gain equals
/// feasible_gain(direction) up to rounding.
inline ThetaGain mac_gain_theta(const MacChannel& net, double theta) {
  RelayGain dir = mac_family_direction(net, theta);
  double acc = 0.0;
  for (std::size_t i = 0; i < dir.size(); ++i)
    acc += detail::sq(dir[i]) *
           (1.0 + net.p1 * detail::sq(net.f1[i]) + net.p2 * detail::sq(net.f2[i]));
  if (acc == 0.0 || dir.all_zero())
    throw DegenerateGainError("mac_gain_theta: family direction vanishes at theta = " +
                              std::to_string(theta));
  const double gamma = std::sqrt(net.p_relay / acc);
  return {theta, dir.scaled(gamma), gamma};
}

// ---------------------------------------------------------------------------
// Sum-rate quadratic
// ---------------------------------------------------------------------------

/// Roots of (x)^2 - (P1 A11 + P2 A22) x + P1 P2 (A11 A22 - A12^2) with x = SNR / P_R,
/// plus the sum-rate angle. Shared by relay-optim and the capacity solver.
struct SumRateQuadratic {
  CouplingSums a;
  double discriminant = 0.0;  // (P1A11 - P2A22)^2 + 4 P1 P2 A12^2
  double snr_star = 0.0;      // P_R * larger root
  double snr_min = 0.0;       // P_R * smaller root (objective minimum)
  double gap1 = 0.0;          // SNR* - P_R P1 A11 >= 0
  double gap2 = 0.0;          // SNR* - P_R P2 A22 >= 0
  double theta11 = 0.0;
  bool theta11_degenerate = false;
};

inline SumRateQuadratic sum_rate_quadratic(const MacChannel& net) {
  SumRateQuadratic q;
  q.a = coupling_sums(net);
  const double x1 = net.p1 * q.a.a11;
  const double x2 = net.p2 * q.a.a22;
  const double cross = 4.0 * net.p1 * net.p2 * q.a.a12 * q.a.a12;
  const double delta = x2 - x1;
  q.discriminant = delta * delta + cross;
  const double root = std::sqrt(q.discriminant);
  const double lam = 0.5 * (x1 + x2 + root);
  // lam - x1 = (delta + root)/2 and lam - x2 = (root - delta)/2, rearranged
  // so that neither difference cancels.
  const double g1 = delta >= 0.0 ? 0.5 * (delta + root) : (root - delta > 0.0 ? 0.5 * cross / (root - delta) : 0.0);
  const double g2 = delta <= 0.0 ? 0.5 * (root - delta) : (root + delta > 0.0 ? 0.5 * cross / (root + delta) : 0.0);
  q.snr_star = net.p_relay * lam;
  const double prod = net.p1 * net.p2 * (q.a.a11 * q.a.a22 - q.a.a12 * q.a.a12);
  q.snr_min = lam > 0.0 ? net.p_relay * std::max(0.0, prod) / lam : 0.0;
  q.gap1 = net.p_relay * g1;
  q.gap2 = net.p_relay * g2;

  if (q.snr_star <= 0.0) return q;

  constexpr double half_pi = std::numbers::pi / 2;
  const double num = net.p_relay * net.p2 * q.a.a12;
  if (net.p2 == 0.0) {
    q.theta11 = half_pi;
  } else if (net.p1 == 0.0) {
    q.theta11 = 0.0;
  } else if (num != 0.0 || q.gap1 != 0.0) {
    q.theta11 = detail::canonical_angle(std::atan2(num, q.gap1));
  } else {
    // First eigenvector row is 0/0; use the second row of the same system.
    const double num2 = q.gap2;
    const double den2 = net.p_relay * net.p1 * q.a.a12;
    if (num2 != 0.0 || den2 != 0.0) {
      q.theta11 = detail::canonical_angle(std::atan2(num2, den2));
    } else {
      q.theta11 = 0.0;
      q.theta11_degenerate = true;
    }
  }
  return q;
}

/// Sum-rate-optimal angle theta11 in [-pi/2, pi/2].
inline double theta_sum_rate(const MacChannel& net) {
  const SumRateQuadratic q = sum_rate_quadratic(net);
  if (q.snr_star <= 0.0) throw DisconnectedNetworkError("theta_sum_rate: SNR* = 0");
  return q.theta11;
}

// ---------------------------------------------------------------------------
// Inverse parametrization
// ---------------------------------------------------------------------------

struct FamilyFit {
  double theta = 0.0;
  double residual = 0.0;  // ||d - fit|| / ||d||; +inf when d drives a relay with g_i = 0
};

/// Least-squares fit d ~ c1 u + c2 v with u = g P1 f1 / M, v = g P2 f2 / M.
/// (c1, c2) is canonicalized to c2 >= 0 (c1 >= 0 on ties), theta = atan2(c1, c2).
inline FamilyFit project_onto_family(const MacChannel& net, const RelayGain& d) {
  validate(net);
  detail::require_nonzero_gain(net, d);
  double uu = 0.0, vv = 0.0, uv = 0.0, ud = 0.0, vd = 0.0;
  std::vector<double> u(d.size()), v(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (net.g[i] == 0.0 && d[i] != 0.0)
      return {0.0, std::numeric_limits<double>::infinity()};
    const double m = detail::mac_denominator(net, i);
    u[i] = net.g[i] * net.p1 * net.f1[i] / m;
    v[i] = net.g[i] * net.p2 * net.f2[i] / m;
    uu += u[i] * u[i];
    vv += v[i] * v[i];
    uv += u[i] * v[i];
    ud += u[i] * d[i];
    vd += v[i] * d[i];
  }
  double c1 = 0.0, c2 = 0.0;
  const double det = uu * vv - uv * uv;
  if (det > 1e-14 * std::max(uu * vv, std::numeric_limits<double>::min())) {
    c1 = (vv * ud - uv * vd) / det;
    c2 = (uu * vd - uv * ud) / det;
  } else if (uu + vv > 0.0) {
    // u and v collinear. With w the larger of the two, u = a w and v = b w;
    // take the minimum-norm (c1, c2) solving a c1 + b c2 = <w, d> / <w, w>.
    const bool use_u = uu >= vv;
    const double ww = use_u ? uu : vv;
    const double k = (use_u ? ud : vd) / ww;
    const double a = use_u ? 1.0 : uv / vv;
    const double b = use_u ? uv / uu : 1.0;
    const double ab = a * a + b * b;
    c1 = k * a / ab;
    c2 = k * b / ab;
  }
  double misfit = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) misfit += detail::sq(d[i] - c1 * u[i] - c2 * v[i]);
  // D(theta) and -D(theta) are the same gain up to sign.
  if (c2 < 0.0 || (c2 == 0.0 && c1 < 0.0)) {
    c1 = -c1;
    c2 = -c2;
  }
  return {std::atan2(c1, c2), std::sqrt(misfit) / d.norm()};
}

}  // namespace afrelay
