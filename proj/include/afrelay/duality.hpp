#pragma once

// Reciprocity of relay networks: PTP and MAC-to-BC dual constructions, the
// BC power split that reproduces a MAC corner, and the BC capacity region as a
// union of dual MAC regions.

#include <afrelay/capacity.hpp>
#include <afrelay/channel.hpp>
#include <afrelay/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

namespace afrelay {

enum class GainCheck {
  strict,     // the gain must spend the relay budget (relative 1e-9)
  any_scale,  // any nonzero multiple of a feasible gain is accepted
};

/// Original network, its dual, and the rescaling kappa that makes kappa*d
/// feasible on the dual.
template <class Original, class Dual>
struct DualPair {
  Original original;
  Dual dual;
  RelayGain gain;       // d as given
  RelayGain dual_gain;  // kappa * d
  double kappa = 1.0;
};

namespace detail {

inline constexpr double kFeasibilityTolerance = 1e-9;

template <class Net>
void require_feasible(const Net& net, const RelayGain& d, GainCheck check) {
  require_nonzero_gain(net, d);
  if (check == GainCheck::any_scale) return;
  const double used = relay_output_power(net, d);
  if (std::abs(used - net.p_relay) > kFeasibilityTolerance * net.p_relay)
    throw FeasibilityError("gain uses relay power " + std::to_string(used) + ", budget is " +
                           std::to_string(net.p_relay));
}

}  // namespace detail

/// PTP(F, P, G, D, P_R) -> PTP(G, P_R, F, kappa D, P).
inline DualPair<PtpChannel, PtpChannel> dual_ptp(const PtpChannel& net, const RelayGain& d,
                                                 GainCheck check = GainCheck::strict) {
  validate(net);
  detail::require_feasible(net, d, check);
  PtpChannel dual{net.g, net.f, net.p_relay, net.p_source};
  if (!(dual.p_relay > 0.0)) throw InvalidArgumentError("dual_ptp: source power must be > 0");
  const double kappa = std::sqrt(dual.p_relay / relay_output_power(dual, d));
  return {net, dual, d, d.scaled(kappa), kappa};
}

/// MAC(F1, P1, F2, P2, G, D, P_R) -> BC(G, P_R, F1, F2, kappa D, P1 + P2).
inline DualPair<MacChannel, BcChannel> dual_bc_of_mac(const MacChannel& net, const RelayGain& d,
                                                      GainCheck check = GainCheck::strict) {
  validate(net);
  detail::require_feasible(net, d, check);
  BcChannel dual{net.g, net.f1, net.f2, net.p_relay, net.p_total()};
  const double kappa = std::sqrt(dual.p_relay / relay_output_power(dual, d));
  return {net, dual, d, d.scaled(kappa), kappa};
}

namespace detail {

struct SplitTerms {
  double t_mac = 0.0;  // sum d^2 (1 + P1 f1^2 + P2 f2^2 + P_R g^2)
  double t1 = 0.0;     // sum d^2 (1 + P f1^2 + P_R g^2)
  double t2 = 0.0;     // sum d^2 (1 + P f2^2 + P_R g^2)
  double s1 = 0.0;     // sum f1 d g
  double s2 = 0.0;     // sum f2 d g
};

inline SplitTerms split_terms(const MacChannel& net, const RelayGain& d) {
  SplitTerms t;
  const double p = net.p_total();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double d2 = sq(d[i]);
    const double g2 = net.p_relay * sq(net.g[i]);
    t.t_mac += d2 * (1.0 + net.p1 * sq(net.f1[i]) + net.p2 * sq(net.f2[i]) + g2);
    t.t1 += d2 * (1.0 + p * sq(net.f1[i]) + g2);
    t.t2 += d2 * (1.0 + p * sq(net.f2[i]) + g2);
    t.s1 += net.f1[i] * d[i] * net.g[i];
    t.s2 += net.f2[i] * d[i] * net.g[i];
  }
  return t;
}

}  // namespace detail

/// BC power share of user `user` (the stronger BC user) that reproduces the
/// MAC corner where that user is decoded first. This is the R1-matching form:
///   alpha = P1 T1 / (P T_mac + P P2 P_R s2^2)   (user 1).
inline double alpha_from_power_split(const MacChannel& net, const RelayGain& d, int user = 1) {
  validate(net);
  detail::require_nonzero_gain(net, d);
  const auto t = detail::split_terms(net, d);
  const double p = net.p_total();
  const double alpha = user == 1 ? net.p1 * t.t1 / (p * t.t_mac + p * net.p2 * net.p_relay * t.s2 * t.s2)
                                 : net.p2 * t.t2 / (p * t.t_mac + p * net.p1 * net.p_relay * t.s1 * t.s1);
  return std::clamp(alpha, 0.0, 1.0);
}

/// The R2-matching form of the same share:
///   alpha = (P T_mac - P2 T2) / (P T_mac + P P2 P_R s2^2)   (user 1).
inline double alpha_from_power_split_r2(const MacChannel& net, const RelayGain& d, int user = 1) {
  validate(net);
  detail::require_nonzero_gain(net, d);
  const auto t = detail::split_terms(net, d);
  const double p = net.p_total();
  return user == 1 ? (p * t.t_mac - net.p2 * t.t2) / (p * t.t_mac + p * net.p2 * net.p_relay * t.s2 * t.s2)
                   : (p * t.t_mac - net.p1 * t.t1) / (p * t.t_mac + p * net.p1 * net.p_relay * t.s1 * t.s1);
}

/// 1 or 2; ties go to user 1.
inline int stronger_user(const BcChannel& net, const RelayGain& d) {
  const SnrPair s = bc_snrs(net, d);
  return s.snr1 >= s.snr2 ? 1 : 2;
}

/// Rates of a degraded scalar BC with full-power SNRs s and power share alpha
/// on the stronger user (who cancels the weaker user's signal).
inline RatePoint degraded_bc_rates(const SnrPair& s, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgumentError("degraded BC: alpha must lie in [0, 1]");
  if (s.snr1 >= s.snr2)
    return {rate_from_snr(alpha * s.snr1), rate_from_snr((1.0 - alpha) * s.snr2 / (1.0 + alpha * s.snr2)),
            std::nullopt, "bc"};
  return {rate_from_snr((1.0 - alpha) * s.snr1 / (1.0 + alpha * s.snr1)), rate_from_snr(alpha * s.snr2),
          std::nullopt, "bc"};
}

/// Boundary point of the BC produced by gain d for power share alpha.
inline RatePoint bc_boundary_fixed_gain(const BcChannel& net, const RelayGain& d, double alpha) {
  validate(net);
  return degraded_bc_rates(bc_snrs(net, d), alpha);
}

namespace detail {

// Largest r2 of the fixed-gain BC region at abscissa r1, or -1 when r1 lies
// beyond the region.
inline double bc_r2_at(const SnrPair& s, double r1) {
  const double x = std::expm1(r1);
  if (s.snr1 >= s.snr2) {
    if (x > s.snr1 * (1.0 + 1e-12) + 1e-15) return -1.0;
    const double alpha = s.snr1 > 0.0 ? std::clamp(x / s.snr1, 0.0, 1.0) : 0.0;
    return rate_from_snr((1.0 - alpha) * s.snr2 / (1.0 + alpha * s.snr2));
  }
  if (x > s.snr1 * (1.0 + 1e-12) + 1e-15) return -1.0;
  const double alpha = s.snr1 > 0.0 ? std::clamp((s.snr1 - x) / (s.snr1 * (1.0 + x)), 0.0, 1.0) : 1.0;
  return rate_from_snr(alpha * s.snr2);
}

}  // namespace detail

struct DualityReport {
  int stronger_user = 1;
  double kappa = 1.0;
  double alpha = 0.0;               // R1-matching form
  double alpha_r2 = 0.0;            // R2-matching form
  double alpha_residual = 0.0;
  RatePoint mac_corner;             // stronger BC user decoded first on the MAC
  RatePoint bc_point;
  double corner_residual = 0.0;     // max coordinate mismatch
  std::size_t alpha_samples = 0;
  std::size_t containment_violations = 0;
  double worst_containment_excess = 0.0;
  bool passed = false;
};

inline constexpr double kCornerMatchTolerance = 1e-10;
inline constexpr double kAlphaAgreementTolerance = 1e-12;

/// Point-by-point MAC -> BC duality check for one feasible gain.
inline DualityReport verify_mac_bc_duality(const MacChannel& net, const RelayGain& d,
                                           std::size_t alpha_samples = 1000) {
  const auto pair = dual_bc_of_mac(net, d);
  DualityReport rep;
  rep.kappa = pair.kappa;
  rep.stronger_user = stronger_user(pair.dual, pair.dual_gain);
  rep.alpha = alpha_from_power_split(net, d, rep.stronger_user);
  rep.alpha_r2 = alpha_from_power_split_r2(net, d, rep.stronger_user);
  rep.alpha_residual = std::abs(rep.alpha - rep.alpha_r2);

  const SnrPair m = mac_snrs(net, d);
  if (rep.stronger_user == 1)
    rep.mac_corner = {rate_from_snr(m.snr1 / (1.0 + m.snr2)), rate_from_snr(m.snr2), std::nullopt, "mac"};
  else
    rep.mac_corner = {rate_from_snr(m.snr1), rate_from_snr(m.snr2 / (1.0 + m.snr1)), std::nullopt, "mac"};
  rep.bc_point = bc_boundary_fixed_gain(pair.dual, pair.dual_gain, rep.alpha);
  rep.corner_residual = std::max(std::abs(rep.mac_corner.r1 - rep.bc_point.r1),
                                 std::abs(rep.mac_corner.r2 - rep.bc_point.r2));

  // Containment: the pentagon's upper boundary must stay under the BC boundary
  // at every sampled BC point, and every pentagon vertex must be inside.
  const Pentagon pent = mac_pentagon(net, d);
  const SnrPair b = bc_snrs(pair.dual, pair.dual_gain);
  auto mac_r2_at = [&](double r1) { return std::min(pent.r2_max, pent.sum_max - r1); };
  auto note = [&](double excess) {
    const double tol = kCornerMatchTolerance;
    if (excess > tol) {
      ++rep.containment_violations;
      rep.worst_containment_excess = std::max(rep.worst_containment_excess, excess);
    }
  };
  rep.alpha_samples = alpha_samples;
  for (std::size_t k = 0; k < alpha_samples; ++k) {
    const double a = alpha_samples > 1 ? static_cast<double>(k) / static_cast<double>(alpha_samples - 1) : 1.0;
    const RatePoint bp = bc_boundary_fixed_gain(pair.dual, pair.dual_gain, a);
    if (bp.r1 <= pent.r1_max) note(mac_r2_at(bp.r1) - bp.r2);
  }
  const std::array<std::pair<double, double>, 4> vertices = {{{0.0, pent.r2_max},
                                                              {pent.sum_max - pent.r2_max, pent.r2_max},
                                                              {pent.r1_max, pent.sum_max - pent.r1_max},
                                                              {pent.r1_max, 0.0}}};
  for (const auto& [v1, v2] : vertices) {
    const double cap = detail::bc_r2_at(b, v1);
    note(cap < 0.0 ? v1 - rate_from_snr(std::max(b.snr1, 0.0)) + kCornerMatchTolerance * 2 : v2 - cap);
  }

  rep.passed = rep.corner_residual <= kCornerMatchTolerance && rep.containment_violations == 0 &&
               rep.alpha_residual <= kAlphaAgreementTolerance;
  return rep;
}

// ---------------------------------------------------------------------------
// Pareto frontier and BC region
// ---------------------------------------------------------------------------

namespace detail {

inline bool rate_point_less(const RatePoint& a, const RatePoint& b) {
  return std::tie(a.r1, a.r2, a.label) < std::tie(b.r1, b.r2, b.label) ||
         (a.r1 == b.r1 && a.r2 == b.r2 && a.label == b.label && a.theta < b.theta);
}

}  // namespace detail

/// Points closer than this to being dominated count as dominated.
inline constexpr double kFrontierTolerance = 1e-12;

/// Non-dominated subset, sorted by r1 ascending. Points within
/// kFrontierTolerance of another frontier point collapse onto the one with
/// the larger r1 (ties broken by r2, label, theta), so the result does not
/// depend on input order.
inline std::vector<RatePoint> pareto_frontier(std::vector<RatePoint> points) {
  for (const auto& p : points)
    if (!std::isfinite(p.r1) || !std::isfinite(p.r2)) throw InvalidArgumentError("pareto_frontier: non-finite point");
  std::sort(points.begin(), points.end(), [](const RatePoint& a, const RatePoint& b) {
    if (a.r1 != b.r1) return a.r1 > b.r1;
    if (a.r2 != b.r2) return a.r2 > b.r2;
    return detail::rate_point_less(a, b);
  });
  std::vector<RatePoint> out;
  for (auto& p : points)
    if (out.empty() || p.r2 > out.back().r2 + kFrontierTolerance) out.push_back(std::move(p));
  std::reverse(out.begin(), out.end());
  return out;
}

/// Upper concave envelope (time-sharing hull) of points sorted by r1.
inline std::vector<RatePoint> upper_concave_envelope(const std::vector<RatePoint>& sorted) {
  std::vector<RatePoint> hull;
  for (const auto& p : sorted) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      const double cross = (b.r1 - a.r1) * (p.r2 - a.r2) - (b.r2 - a.r2) * (p.r1 - a.r1);
      if (cross >= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(p);
  }
  return hull;
}

/// Largest vertical gap between the envelope and the frontier.
inline double envelope_gap(const std::vector<RatePoint>& frontier, const std::vector<RatePoint>& hull) {
  double gap = 0.0;
  std::size_t j = 0;
  for (const auto& p : frontier) {
    while (j + 1 < hull.size() && hull[j + 1].r1 < p.r1) ++j;
    if (j + 1 >= hull.size()) break;
    const auto& a = hull[j];
    const auto& b = hull[j + 1];
    if (b.r1 == a.r1) continue;
    const double t = (p.r1 - a.r1) / (b.r1 - a.r1);
    gap = std::max(gap, a.r2 + t * (b.r2 - a.r2) - p.r2);
  }
  return gap;
}

struct BcRegion {
  struct Split {
    double p1 = 0.0;
    double p2 = 0.0;
    RegionBoundary boundary;
  };
  std::vector<Split> per_split;
  std::vector<RatePoint> frontier;
};

/// The dual MAC of a BC for one power split: the MAC relay budget is the BC
/// source power and the MAC users share the BC relay power.
inline MacChannel dual_mac_of_bc(const BcChannel& net, double p1) {
  return {net.f1, net.f2, net.g, p1, net.p_relay - p1, net.p_source};
}

/// BC capacity region as the union of dual MAC regions over a uniform grid of
/// power splits p1 = P k / (n_splits - 1).
inline BcRegion bc_region(const BcChannel& net, std::size_t n_splits, std::size_t n_curve_points,
                          unsigned threads = default_thread_count()) {
  validate(net);
  if (n_splits < 2) throw InvalidArgumentError("bc_region: n_splits must be >= 2");
  if (!(net.p_source > 0.0)) throw InvalidArgumentError("bc_region: p_source must be > 0");
  BcRegion region;
  region.per_split.resize(n_splits);
  const double total = net.p_relay;
  parallel_for(
      n_splits,
      [&](std::size_t k) {
        double p1 = total * static_cast<double>(k) / static_cast<double>(n_splits - 1);
        if (k == n_splits - 1) p1 = total;
        MacChannel mac = dual_mac_of_bc(net, p1);
        if (k == n_splits - 1) mac.p2 = 0.0;
        region.per_split[k] = {mac.p1, mac.p2, mac_region(mac, n_curve_points, 1)};
      },
      threads);
  std::vector<RatePoint> all;
  for (const auto& s : region.per_split) all.insert(all.end(), s.boundary.points.begin(), s.boundary.points.end());
  region.frontier = pareto_frontier(std::move(all));
  return region;
}

}  // namespace afrelay
