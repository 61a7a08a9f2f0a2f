#pragma once

// Closed-form capacities of the relay PTP channel and MAC, the weighted-sum
// solvers, and the MAC capacity-region boundary tracer.

#include <afrelay/channel.hpp>
#include <afrelay/parallel.hpp>
#include <afrelay/relay_optim.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace afrelay {

/// A rate pair in nats. `theta` is set for points produced by a D(theta) gain.
struct RatePoint {
  double r1 = 0.0;
  double r2 = 0.0;
  std::optional<double> theta;
  std::string label;
};

struct SumRateSolution {
  double capacity = 0.0;  // log(1 + SNR*)
  double snr_star = 0.0;
  double a11 = 0.0, a22 = 0.0, a12 = 0.0;
  double theta11 = 0.0;
  bool theta11_degenerate = false;
  double beta = 0.0;              // fraction of SNR* carried by user 1
  RatePoint corner_2_then_1;      // user 2 decoded first, user 1 clean
  RatePoint corner_1_then_2;      // user 1 decoded first, user 2 clean
};

struct CornerRates {
  double favored = 0.0;
  double other = 0.0;
};

struct Pentagon {
  double r1_max = 0.0;
  double r2_max = 0.0;
  double sum_max = 0.0;
};

/// Region segment tags, in traversal order. The straight C-D segment is the
/// step from the last B-C row to the first D-E row.
inline constexpr std::array<const char*, 4> kSegmentLabels = {"A-B", "B-C", "D-E", "E-F"};

struct RegionBoundary {
  std::vector<RatePoint> points;  // from (0, C2^01) to (C1^10, 0)
  CornerRates user1;              // (C1^10, C2^10)
  CornerRates user2;              // (C2^01, C1^01)
  SumRateSolution sum_rate;
};

// ---------------------------------------------------------------------------
// Point to point
// ---------------------------------------------------------------------------

/// log(1 + P P_R sum f^2 g^2 / (1 + P f^2 + P_R g^2)); 0 for a disconnected net.
inline double ptp_capacity(const PtpChannel& net) {
  validate(net);
  double acc = 0.0;
  for (std::size_t i = 0; i < net.relays(); ++i) {
    const double m = 1.0 + net.p_source * detail::sq(net.f[i]) + net.p_relay * detail::sq(net.g[i]);
    acc += detail::sq(net.f[i] * net.g[i]) / m;
  }
  return rate_from_snr(net.p_source * net.p_relay * acc);
}

// ---------------------------------------------------------------------------
// MAC closed forms
// ---------------------------------------------------------------------------

namespace detail {

inline CornerRates corner_rates_user1(const MacChannel& net, const CouplingSums& a) {
  const double snr1 = net.p1 * net.p_relay * a.a11;
  if (snr1 <= 0.0) return {0.0, std::numeric_limits<double>::quiet_NaN()};
  const double snr2 = net.p2 * net.p_relay * a.a12 * a.a12 / (a.a11 + net.p1 * net.p_relay * a.a11 * a.a11);
  return {rate_from_snr(snr1), rate_from_snr(snr2)};
}

}  // namespace detail

/// Maximum rate of `favored_user` and the other user's best rate at the same
/// gain (D(pi/2) for user 1, D(0) for user 2). A favored user without any
/// effective channel gets 0 and the other user keeps its own maximum.
inline CornerRates mac_corner_rates(const MacChannel& net, int favored_user) {
  if (favored_user != 1 && favored_user != 2)
    throw InvalidArgumentError("mac_corner_rates: favored_user must be 1 or 2");
  const MacChannel oriented = favored_user == 1 ? net : swap_users(net);
  const MacChannel flipped = swap_users(oriented);
  CornerRates c = detail::corner_rates_user1(oriented, coupling_sums(oriented));
  if (std::isnan(c.other)) {
    const CornerRates alt = detail::corner_rates_user1(flipped, coupling_sums(flipped));
    c = {0.0, std::isnan(alt.other) ? 0.0 : alt.favored};
  }
  return c;
}

/// Sum capacity, sum-rate angle and the two sum-rate-optimal corners.
inline SumRateSolution mac_sum_capacity(const MacChannel& net) {
  const SumRateQuadratic q = sum_rate_quadratic(net);
  SumRateSolution s;
  s.a11 = q.a.a11;
  s.a22 = q.a.a22;
  s.a12 = q.a.a12;
  s.snr_star = q.snr_star;
  s.capacity = rate_from_snr(q.snr_star);
  s.theta11 = q.theta11;
  s.theta11_degenerate = q.theta11_degenerate;
  if (q.snr_star <= 0.0) {
    s.corner_2_then_1 = {0.0, 0.0, 0.0, "D"};
    s.corner_1_then_2 = {0.0, 0.0, 0.0, "C"};
    return s;
  }
  // beta = (SNR* - P2 P_R A22) / (2 SNR* - P_R (P1 A11 + P2 A22)); the
  // denominator is P_R * sqrt(discriminant).
  const double den = net.p_relay * std::sqrt(q.discriminant);
  if (den > 1e-15 * q.snr_star) {
    s.beta = std::clamp(q.gap2 / den, 0.0, 1.0);
  } else {
    const SnrPair at = mac_snrs(net, mac_gain_theta(net, q.theta11).gain);
    s.beta = at.sum() > 0.0 ? at.snr1 / at.sum() : 0.0;
  }
  const double x1 = s.beta * q.snr_star;
  const double x2 = (1.0 - s.beta) * q.snr_star;
  s.corner_2_then_1 = {rate_from_snr(x1), rate_from_snr(x2 / (1.0 + x1)), q.theta11, "D"};
  s.corner_1_then_2 = {rate_from_snr(x1 / (1.0 + x2)), rate_from_snr(x2), q.theta11, "C"};
  return s;
}

/// Pentagon of the scalar Gaussian MAC produced by a fixed gain.
inline Pentagon mac_pentagon(const MacChannel& net, const RelayGain& d) {
  const SnrPair s = mac_snrs(net, d);
  return {rate_from_snr(s.snr1), rate_from_snr(s.snr2), rate_from_snr(s.snr1 + s.snr2)};
}

// ---------------------------------------------------------------------------
// Weighted sum rate
// ---------------------------------------------------------------------------

/// Successive-decoding corner that maximizes mu1 R1 + mu2 R2 for fixed SNRs:
/// the user with the larger weight is decoded last (interference free).
inline std::pair<double, double> weighted_corner(const SnrPair& s, double mu1, double mu2) {
  if (mu1 >= mu2) return {rate_from_snr(s.snr1), rate_from_snr(s.snr2 / (1.0 + s.snr1))};
  return {rate_from_snr(s.snr1 / (1.0 + s.snr2)), rate_from_snr(s.snr2)};
}

struct WeightedOptimum {
  RatePoint point;              // governing (theta-scan) result
  double objective = 0.0;       // mu1 r1 + mu2 r2 at `point`
  double theta = 0.0;
  double plateau_width = 0.0;   // span of coarse angles within 1e-12 of the max

  // Stationarity-equation path.
  bool equation_converged = false;
  double equation_snr1 = 0.0;
  double equation_snr2 = 0.0;
  double equation_objective = std::numeric_limits<double>::quiet_NaN();
  bool solver_disagreement = false;
  std::string diagnostic;
};

namespace detail {

inline constexpr std::size_t kCoarseScanPoints = 1024;
inline constexpr double kThetaTolerance = 1e-10;
inline constexpr double kSolverAgreement = 1e-7;

// Objective along the family; -inf where the direction vanishes.
inline double family_objective(const MacChannel& net, double theta, double mu1, double mu2) {
  const RelayGain dir = mac_family_direction(net, theta);
  if (dir.all_zero()) return -std::numeric_limits<double>::infinity();
  const auto [r1, r2] = weighted_corner(mac_snrs(net, dir), mu1, mu2);
  return mu1 * r1 + mu2 * r2;
}

struct ScanResult {
  double theta = 0.0;
  double value = -std::numeric_limits<double>::infinity();
  double plateau_width = 0.0;
};

// Coarse scan of the pi-periodic objective on [-pi/2, pi/2), then golden
// section on the bracket around the best sample.
inline ScanResult theta_scan(const MacChannel& net, double mu1, double mu2) {
  constexpr double pi = std::numbers::pi;
  const std::size_t n = kCoarseScanPoints;
  const double h = pi / static_cast<double>(n);
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k)
    values[k] = family_objective(net, -pi / 2 + h * static_cast<double>(k), mu1, mu2);

  const auto best_it = std::max_element(values.begin(), values.end());
  const double best = *best_it;
  const auto kbest = static_cast<std::size_t>(best_it - values.begin());
  if (!std::isfinite(best)) return {};

  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  std::vector<double> plateau;
  for (std::size_t k = 0; k < n; ++k)
    if (values[k] >= best - tol) plateau.push_back(-pi / 2 + h * static_cast<double>(k));

  ScanResult out;
  if (plateau.size() > 1) {
    out.plateau_width = plateau.back() - plateau.front();
    double pick = plateau.front();
    for (double t : plateau)
      if (std::abs(t) < std::abs(pick) || (std::abs(t) == std::abs(pick) && t > pick)) pick = t;
    out.theta = pick;
    out.value = family_objective(net, pick, mu1, mu2);
    return out;
  }

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -pi / 2 + h * (static_cast<double>(kbest) - 1.0);
  double hi = lo + 2.0 * h;
  auto f = [&](double t) { return family_objective(net, t, mu1, mu2); };
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > kThetaTolerance) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
    }
  }
  double theta = 0.5 * (lo + hi);
  double value = f(theta);
  const double coarse_theta = -pi / 2 + h * static_cast<double>(kbest);
  if (value < best) {
    theta = coarse_theta;
    value = best;
  }
  theta = canonical_angle(theta);
  if (theta == -pi / 2) theta = pi / 2;
  out.theta = theta;
  out.value = value;
  return out;
}

struct EquationSolution {
  bool converged = false;
  double snr1 = 0.0;
  double snr2 = 0.0;
};

// Projected stationarity equations for mu1 >= mu2 (callers swap users
// otherwise). With L = mu2 (1+S1)(S1+S2) + mu1' (1+S1+S2) S1,
// K = mu1' (1+S1+S2) + mu2 (1+S1), mu1' = mu1 - mu2 and alpha = s1/s2:
//   L = K P_R P1 A11 + mu2 (1+S1) P_R P2 A12 / alpha
//   L = K P_R P1 A12 alpha + mu2 (1+S1) P_R P2 A22
// where alpha^2 = P2 S1 / (P1 S2).
inline EquationSolution solve_stationarity(const MacChannel& net, double mu1, double mu2) {
  const CouplingSums a = coupling_sums(net);
  const double pr = net.p_relay, p1 = net.p1, p2 = net.p2;
  const double mu1p = mu1 - mu2;
  const double snr1_max = pr * p1 * a.a11;
  const double snr2_max = pr * p2 * a.a22;

  if (snr1_max <= 0.0 && snr2_max <= 0.0) return {true, 0.0, 0.0};
  if (snr2_max <= 0.0) return {true, snr1_max, 0.0};
  if (mu2 == 0.0 || snr1_max <= 0.0) {
    if (mu2 == 0.0 && snr1_max > 0.0)
      return {true, snr1_max, pr * p2 * a.a12 * a.a12 / a.a11};
    return {true, 0.0, snr2_max};
  }

  auto residual = [&](double s1, double s2, double sign, double out[2]) {
    const double alpha = sign * std::sqrt(p2 * s1 / (p1 * s2));
    const double L = mu2 * (1 + s1) * (s1 + s2) + mu1p * (1 + s1 + s2) * s1;
    const double K = mu1p * (1 + s1 + s2) + mu2 * (1 + s1);
    const double scale = 1.0 + std::abs(L);
    out[0] = (K * pr * p1 * a.a11 + mu2 * (1 + s1) * pr * p2 * a.a12 / alpha - L) / scale;
    out[1] = (K * pr * p1 * a.a12 * alpha + mu2 * (1 + s1) * pr * p2 * a.a22 - L) / scale;
  };

  EquationSolution best;
  double best_obj = -std::numeric_limits<double>::infinity();
  constexpr std::array<double, 5> fractions = {0.1, 0.3, 0.5, 0.7, 0.9};
  for (double sign : {1.0, -1.0}) {
    for (double fa : fractions) {
      for (double fb : fractions) {
        double x = std::log(fa * snr1_max), y = std::log(fb * snr2_max);
        double r[2];
        residual(std::exp(x), std::exp(y), sign, r);
        double norm = std::hypot(r[0], r[1]);
        for (int it = 0; it < 100 && norm > 1e-15; ++it) {
          const double step = 1e-7;
          double rxp[2], rxm[2], ryp[2], rym[2];
          residual(std::exp(x + step), std::exp(y), sign, rxp);
          residual(std::exp(x - step), std::exp(y), sign, rxm);
          residual(std::exp(x), std::exp(y + step), sign, ryp);
          residual(std::exp(x), std::exp(y - step), sign, rym);
          const double j00 = (rxp[0] - rxm[0]) / (2 * step), j01 = (ryp[0] - rym[0]) / (2 * step);
          const double j10 = (rxp[1] - rxm[1]) / (2 * step), j11 = (ryp[1] - rym[1]) / (2 * step);
          const double det = j00 * j11 - j01 * j10;
          if (!std::isfinite(det) || det == 0.0) break;
          const double dx = -(j11 * r[0] - j01 * r[1]) / det;
          const double dy = -(-j10 * r[0] + j00 * r[1]) / det;
          double t = 1.0;
          bool improved = false;
          for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
            const double nx = x + t * std::clamp(dx, -5.0, 5.0);
            const double ny = y + t * std::clamp(dy, -5.0, 5.0);
            double nr[2];
            residual(std::exp(nx), std::exp(ny), sign, nr);
            const double nn = std::hypot(nr[0], nr[1]);
            if (std::isfinite(nn) && nn < norm) {
              x = nx;
              y = ny;
              r[0] = nr[0];
              r[1] = nr[1];
              norm = nn;
              improved = true;
              break;
            }
          }
          if (!improved) break;
        }
        if (!(norm < 1e-11)) continue;
        const double s1 = std::exp(x), s2 = std::exp(y);
        // Realize the gain implied by the solution and require that it
        // reproduces the SNRs; this rejects spurious roots.
        const double alpha = sign * std::sqrt(p2 * s1 / (p1 * s2));
        const double K = mu1p * (1 + s1 + s2) + mu2 * (1 + s1);
        const double theta = std::atan2(K * alpha, mu2 * (1 + s1));
        const RelayGain dir = mac_family_direction(net, theta);
        if (dir.all_zero()) continue;
        const SnrPair real = mac_snrs(net, dir);
        if (std::abs(real.snr1 - s1) > 1e-7 * (1 + s1) || std::abs(real.snr2 - s2) > 1e-7 * (1 + s2))
          continue;
        const double obj = mu1 * rate_from_snr(s1) + mu2 * rate_from_snr(s2 / (1 + s1));
        if (obj > best_obj) {
          best_obj = obj;
          best = {true, s1, s2};
        }
      }
    }
  }
  return best;
}

}  // namespace detail

/// Rate pair maximizing mu1 R1 + mu2 R2. The theta-scan over D(theta) governs;
/// the stationarity equations are solved independently and compared.
inline WeightedOptimum mac_weighted_optimum(const MacChannel& net, double mu1, double mu2) {
  validate(net);
  if (!(mu1 >= 0.0) || !(mu2 >= 0.0) || !std::isfinite(mu1) || !std::isfinite(mu2) || mu1 + mu2 <= 0.0)
    throw InvalidArgumentError("mac_weighted_optimum: weights must be >= 0 with a positive sum");

  WeightedOptimum out;
  const detail::ScanResult scan = detail::theta_scan(net, mu1, mu2);
  if (std::isfinite(scan.value)) {
    const auto [r1, r2] = weighted_corner(mac_snrs(net, mac_family_direction(net, scan.theta)), mu1, mu2);
    out.point = {r1, r2, scan.theta, "weighted"};
    out.objective = mu1 * r1 + mu2 * r2;
    out.theta = scan.theta;
    out.plateau_width = scan.plateau_width;
  } else {
    out.point = {0.0, 0.0, std::nullopt, "weighted"};
  }

  // Equation path, oriented so the larger weight sits on user 1.
  const bool swapped = mu2 > mu1;
  const MacChannel oriented = swapped ? swap_users(net) : net;
  const double w1 = swapped ? mu2 : mu1, w2 = swapped ? mu1 : mu2;
  const detail::EquationSolution eq = detail::solve_stationarity(oriented, w1, w2);
  out.equation_converged = eq.converged;
  if (eq.converged) {
    out.equation_snr1 = swapped ? eq.snr2 : eq.snr1;
    out.equation_snr2 = swapped ? eq.snr1 : eq.snr2;
    out.equation_objective = w1 * rate_from_snr(eq.snr1) + w2 * rate_from_snr(eq.snr2 / (1 + eq.snr1));
    const double diff = std::abs(out.equation_objective - out.objective);
    if (diff > detail::kSolverAgreement) {
      out.solver_disagreement = true;
      out.diagnostic = "theta-scan and stationarity equations differ by " + std::to_string(diff);
    }
  } else {
    out.solver_disagreement = true;
    out.diagnostic = "stationarity equations did not converge";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Region boundary
// ---------------------------------------------------------------------------

namespace detail {

// SNRs of D(theta). A vanishing direction is replaced by its limit from
// `toward` (the interior side of the segment).
inline SnrPair family_snrs(const MacChannel& net, double theta, double toward) {
  RelayGain dir = mac_family_direction(net, theta);
  if (dir.all_zero() && toward != theta) {
    const double nudge = theta + 1e-9 * (toward > theta ? 1.0 : -1.0);
    dir = mac_family_direction(net, nudge);
  }
  return mac_snrs(net, dir);
}

}  // namespace detail

/// Boundary of the optimized MAC capacity region from A = (0, C2^01) to
/// F = (C1^10, 0). Each curved segment carries n_curve_points samples uniform
/// in theta; A-B and E-F carry their two endpoints (2n + 4 rows). The curve
/// rows at theta11 hold the closed-form corners C and D.
inline RegionBoundary mac_region(const MacChannel& net, std::size_t n_curve_points,
                                 unsigned threads = default_thread_count()) {
  validate(net);
  if (n_curve_points < 2) throw InvalidArgumentError("mac_region: n_curve_points must be >= 2");
  constexpr double half_pi = std::numbers::pi / 2;

  RegionBoundary region;
  region.user1 = mac_corner_rates(net, 1);
  region.user2 = mac_corner_rates(net, 2);
  region.sum_rate = mac_sum_capacity(net);
  const double theta11 = region.sum_rate.theta11;
  const double end_angle = theta11 < 0.0 ? -half_pi : half_pi;

  const std::size_t n = n_curve_points;
  std::vector<RatePoint> bc(n), de(n);
  parallel_for(
      2 * n,
      [&](std::size_t idx) {
        const bool first = idx < n;
        const std::size_t k = first ? idx : idx - n;
        const double t = static_cast<double>(k) / static_cast<double>(n - 1);
        if (first) {
          const double theta = theta11 * t;
          const SnrPair s = detail::family_snrs(net, theta, theta11 == 0.0 ? end_angle : theta11);
          bc[k] = {rate_from_snr(s.snr1 / (1.0 + s.snr2)), rate_from_snr(s.snr2), theta, kSegmentLabels[1]};
        } else {
          const double theta = theta11 + (end_angle - theta11) * t;
          const SnrPair s = detail::family_snrs(net, theta, theta11);
          de[k] = {rate_from_snr(s.snr1), rate_from_snr(s.snr2 / (1.0 + s.snr1)), theta, kSegmentLabels[2]};
        }
      },
      threads);

  const auto& s = region.sum_rate;
  bc[n - 1].r1 = s.corner_1_then_2.r1;
  bc[n - 1].r2 = s.corner_1_then_2.r2;
  de[0].r1 = s.corner_2_then_1.r1;
  de[0].r2 = s.corner_2_then_1.r2;

  auto& pts = region.points;
  pts.reserve(2 * n + 4);
  pts.push_back({0.0, region.user2.favored, std::nullopt, kSegmentLabels[0]});
  pts.push_back({region.user2.other, region.user2.favored, std::nullopt, kSegmentLabels[0]});
  pts.insert(pts.end(), bc.begin(), bc.end());
  pts.insert(pts.end(), de.begin(), de.end());
  pts.push_back({region.user1.favored, region.user1.other, std::nullopt, kSegmentLabels[3]});
  pts.push_back({region.user1.favored, 0.0, std::nullopt, kSegmentLabels[3]});
  return region;
}

}  // namespace afrelay
