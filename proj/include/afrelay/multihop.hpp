#pragma once

// Three-hop network: two sources, a first relay stage with gain A, an
// inter-stage channel H, a second relay stage with gain B, one destination.
// Relays may carry several antennas, so A and B are block diagonal.

#include <afrelay/channel.hpp>
#include <afrelay/duality.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace afrelay {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Block-diagonal amplification, one square block per relay.
class BlockGain {
public:
  BlockGain() = default;
  explicit BlockGain(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {
    for (const auto& b : blocks_) {
      if (b.rows() != b.cols() || b.rows() == 0) throw DimensionError("BlockGain: blocks must be square and non-empty");
      if (!b.allFinite()) throw InvalidArgumentError("BlockGain: non-finite entry");
    }
  }

  static BlockGain identity(const std::vector<int>& sizes) {
    std::vector<Matrix> blocks;
    for (int s : sizes) blocks.push_back(Matrix::Identity(s, s));
    return BlockGain(std::move(blocks));
  }

  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }
  std::vector<int> sizes() const {
    std::vector<int> out;
    for (const auto& b : blocks_) out.push_back(static_cast<int>(b.rows()));
    return out;
  }
  Eigen::Index dim() const {
    Eigen::Index n = 0;
    for (const auto& b : blocks_) n += b.rows();
    return n;
  }

  Matrix dense() const {
    Matrix m = Matrix::Zero(dim(), dim());
    Eigen::Index at = 0;
    for (const auto& b : blocks_) {
      m.block(at, at, b.rows(), b.cols()) = b;
      at += b.rows();
    }
    return m;
  }

  BlockGain transposed() const {
    std::vector<Matrix> out;
    for (const auto& b : blocks_) out.push_back(b.transpose());
    return BlockGain(std::move(out));
  }

  BlockGain scaled(double c) const {
    std::vector<Matrix> out;
    for (const auto& b : blocks_) out.push_back(c * b);
    return BlockGain(std::move(out));
  }

  bool all_zero() const {
    for (const auto& b : blocks_)
      if (!b.isZero(0.0)) return false;
    return true;
  }

private:
  std::vector<Matrix> blocks_;
};

struct ThreeHopNetwork {
  Vector f1_bar;          // sources -> first stage (N1)
  Vector f2_bar;
  Vector g_bar;           // second stage -> destination (N2)
  Matrix h;               // first stage -> second stage (N2 x N1)
  std::vector<int> blocks_a;  // antennas per first-stage relay
  std::vector<int> blocks_b;  // antennas per second-stage relay
  double p1 = 0.0;
  double p2 = 0.0;
  double p_r1 = 1.0;
  double p_r2 = 1.0;

  Eigen::Index n1() const { return f1_bar.size(); }
  Eigen::Index n2() const { return g_bar.size(); }
  double p_total() const { return p1 + p2; }
};

/// Normalized-noise denominators of the MAC and of the dual BC built from the
/// transposed gains.
struct DeltaReport {
  double delta_m = 0.0;
  double delta_b1 = 0.0;
  double delta_b2 = 0.0;
  double identity_residual = 0.0;  // |P delta_m - P1 delta_b1 - P2 delta_b2| / (P delta_m)
};

namespace detail {

inline void require_blocks(const std::vector<int>& sizes, Eigen::Index total, const char* what) {
  long sum = 0;
  for (int s : sizes) {
    if (s <= 0) throw DimensionError(std::string(what) + ": block sizes must be positive");
    sum += s;
  }
  if (sum != total)
    throw DimensionError(std::string(what) + ": block sizes sum to " + std::to_string(sum) + ", expected " +
                         std::to_string(total));
}

}  // namespace detail

inline void validate(const ThreeHopNetwork& net) {
  if (net.n1() == 0 || net.n2() == 0) throw DimensionError("three-hop: empty channel vector");
  if (net.f2_bar.size() != net.n1())
    throw DimensionError("three-hop: f1_bar and f2_bar differ in length");
  if (net.h.rows() != net.n2() || net.h.cols() != net.n1())
    throw DimensionError("three-hop: h must be " + std::to_string(net.n2()) + "x" + std::to_string(net.n1()));
  if (!net.f1_bar.allFinite() || !net.f2_bar.allFinite() || !net.g_bar.allFinite() || !net.h.allFinite())
    throw InvalidArgumentError("three-hop: non-finite channel coefficient");
  detail::require_blocks(net.blocks_a, net.n1(), "blocks_a");
  detail::require_blocks(net.blocks_b, net.n2(), "blocks_b");
  detail::require_power(net.p1, "p1", false);
  detail::require_power(net.p2, "p2", false);
  detail::require_power(net.p_r1, "p_r1", true);
  detail::require_power(net.p_r2, "p_r2", true);
  if (!(net.p_total() > 0.0)) throw InvalidArgumentError("three-hop: p1 + p2 must be > 0");
}

namespace detail {

inline void require_stage_gains(const ThreeHopNetwork& net, const BlockGain& a, const BlockGain& b) {
  validate(net);
  if (a.sizes() != net.blocks_a) throw DimensionError("three-hop: first-stage gain blocks do not match blocks_a");
  if (b.sizes() != net.blocks_b) throw DimensionError("three-hop: second-stage gain blocks do not match blocks_b");
}

// Delta_m assembled term by term for MAC gains (A, B).
inline double assemble_delta_m(const ThreeHopNetwork& net, const Matrix& A, const Matrix& B) {
  const Matrix bha = B * net.h * A;
  const double bhaf1 = (bha * net.f1_bar).squaredNorm();
  const double bhaf2 = (bha * net.f2_bar).squaredNorm();
  const double gbha = (net.g_bar.transpose() * bha).squaredNorm();
  const double gb = (net.g_bar.transpose() * B).squaredNorm();
  const double af1 = (A * net.f1_bar).squaredNorm();
  const double af2 = (A * net.f2_bar).squaredNorm();
  const double aa = A.squaredNorm(), bb = B.squaredNorm(), bha2 = bha.squaredNorm();
  const double p1 = net.p1, p2 = net.p2, r1 = net.p_r1, r2 = net.p_r2;
  return p1 * r1 * bhaf1 + p2 * r1 * bhaf2 + r2 * r1 * gbha + r1 * bha2 +
         p1 * r2 * gb * af1 + p2 * r2 * gb * af2 + r2 * gb * aa +
         p1 * bb * af1 + p2 * bb * af2 + bb * aa;
}

// Delta_b^[j] for BC gains (A_b, B_b) and receiver channel fj.
inline double assemble_delta_b(const ThreeHopNetwork& net, const Matrix& Ab, const Matrix& Bb, const Vector& fj) {
  const Matrix ahb = Ab * net.h.transpose() * Bb;
  const double ahbg = (ahb * net.g_bar).squaredNorm();
  const double fahb = (fj.transpose() * ahb).squaredNorm();
  const double fa = (fj.transpose() * Ab).squaredNorm();
  const double bg = (Bb * net.g_bar).squaredNorm();
  const double aa = Ab.squaredNorm(), bb = Bb.squaredNorm(), ahb2 = ahb.squaredNorm();
  const double p = net.p_total(), r1 = net.p_r1, r2 = net.p_r2;
  return r1 * r2 * ahbg + r1 * ahb2 + p * r1 * fahb + p * r2 * fa * bg + p * fa * bb + r2 * aa * bg + aa * bb;
}

inline DeltaReport deltas_for_mac_gains(const ThreeHopNetwork& net, const Matrix& A, const Matrix& B) {
  DeltaReport r;
  r.delta_m = assemble_delta_m(net, A, B);
  const Matrix At = A.transpose(), Bt = B.transpose();
  r.delta_b1 = assemble_delta_b(net, At, Bt, net.f1_bar);
  r.delta_b2 = assemble_delta_b(net, At, Bt, net.f2_bar);
  const double lhs = net.p_total() * r.delta_m;
  r.identity_residual = lhs > 0.0 ? std::abs(lhs - net.p1 * r.delta_b1 - net.p2 * r.delta_b2) / lhs : 0.0;
  return r;
}

}  // namespace detail

struct ThreeHopSnrs {
  SnrPair snrs;
  DeltaReport deltas;
};

/// snr_u = P_u P_R1 P_R2 (g' B H A f_u)^2 / Delta_m. The report also carries
/// the dual-BC denominators for the transposed gains.
inline ThreeHopSnrs three_hop_mac_snrs(const ThreeHopNetwork& net, const BlockGain& a, const BlockGain& b) {
  detail::require_stage_gains(net, a, b);
  const Matrix A = a.dense(), B = b.dense();
  ThreeHopSnrs out{{}, detail::deltas_for_mac_gains(net, A, B)};
  if (!(out.deltas.delta_m > 0.0)) throw DegenerateGainError("three-hop MAC: both stage gains are zero");
  const Eigen::RowVectorXd path = net.g_bar.transpose() * B * net.h * A;
  const double scale = net.p_r1 * net.p_r2 / out.deltas.delta_m;
  out.snrs = {net.p1 * scale * detail::sq(path.dot(net.f1_bar)), net.p2 * scale * detail::sq(path.dot(net.f2_bar))};
  return out;
}

/// snr_j = P P_R1 P_R2 (f_j' A_b H' B_b g)^2 / Delta_b^[j] with P = p1 + p2.
/// The BC source transmits P_R2, the B_b stage P_R1 and the A_b stage P.
inline ThreeHopSnrs three_hop_bc_snrs(const ThreeHopNetwork& net, const BlockGain& a_b, const BlockGain& b_b) {
  detail::require_stage_gains(net, a_b, b_b);
  const Matrix Ab = a_b.dense(), Bb = b_b.dense();
  ThreeHopSnrs out{{}, detail::deltas_for_mac_gains(net, Ab.transpose(), Bb.transpose())};
  if (!(out.deltas.delta_b1 > 0.0) || !(out.deltas.delta_b2 > 0.0))
    throw DegenerateGainError("three-hop BC: both stage gains are zero");
  const Vector path = Ab * net.h.transpose() * Bb * net.g_bar;
  const double num = net.p_total() * net.p_r1 * net.p_r2;
  out.snrs = {num * detail::sq(net.f1_bar.dot(path)) / out.deltas.delta_b1,
              num * detail::sq(net.f2_bar.dot(path)) / out.deltas.delta_b2};
  return out;
}

struct StagePowers {
  double stage1 = 0.0;
  double stage2 = 0.0;
};

/// Transmit power used by each MAC relay stage for gains (a, b) as given.
inline StagePowers three_hop_relay_powers(const ThreeHopNetwork& net, const BlockGain& a, const BlockGain& b) {
  detail::require_stage_gains(net, a, b);
  if (a.all_zero() && b.all_zero()) throw DegenerateGainError("three-hop: zero gains");
  const Matrix A = a.dense(), B = b.dense();
  const Matrix bha = B * net.h * A;
  return {net.p1 * (A * net.f1_bar).squaredNorm() + net.p2 * (A * net.f2_bar).squaredNorm() + A.squaredNorm(),
          net.p1 * (bha * net.f1_bar).squaredNorm() + net.p2 * (bha * net.f2_bar).squaredNorm() +
              bha.squaredNorm() + B.squaredNorm()};
}

/// Transmit power used by each stage of the dual BC: the B_b stage hears the
/// source, the A_b stage hears the B_b stage.
inline StagePowers three_hop_bc_relay_powers(const ThreeHopNetwork& net, const BlockGain& a_b, const BlockGain& b_b) {
  detail::require_stage_gains(net, a_b, b_b);
  if (a_b.all_zero() && b_b.all_zero()) throw DegenerateGainError("three-hop: zero gains");
  const Matrix Ab = a_b.dense(), Bb = b_b.dense();
  const Matrix ahb = Ab * net.h.transpose() * Bb;
  return {net.p_r2 * (Bb * net.g_bar).squaredNorm() + Bb.squaredNorm(),
          net.p_r2 * (ahb * net.g_bar).squaredNorm() + ahb.squaredNorm() + Ab.squaredNorm()};
}

struct StageGains {
  BlockGain a;
  BlockGain b;
};

/// Rescales a to spend P_R1, then b (given the scaled a) to spend P_R2.
inline StageGains three_hop_feasible_gains(const ThreeHopNetwork& net, const BlockGain& a, const BlockGain& b) {
  if (a.all_zero() || b.all_zero()) throw DegenerateGainError("three-hop: feasibility scaling needs nonzero gains");
  const double used1 = three_hop_relay_powers(net, a, b).stage1;
  const BlockGain a_s = a.scaled(std::sqrt(net.p_r1 / used1));
  const double used2 = three_hop_relay_powers(net, a_s, b).stage2;
  return {a_s, b.scaled(std::sqrt(net.p_r2 / used2))};
}

struct ThreeHopDualityReport {
  DeltaReport deltas;
  SnrPair mac;
  SnrPair bc;
  int stronger_user = 1;
  double alpha = 0.0;     // from Delta_b of the stronger user
  double alpha_r2 = 0.0;  // from P Delta_m minus the weaker user's Delta_b
  RatePoint mac_corner;
  RatePoint bc_point;
  double corner_residual = 0.0;
  double kappa1 = 1.0;  // rescales B' to spend P_R1 on the dual
  double kappa2 = 1.0;  // then A' to spend P
  bool passed = false;
};

inline constexpr double kIdentityTolerance = 1e-12;

/// Builds the dual BC with A_b = A', B_b = B' and checks the denominator
/// identity and the corner-to-boundary mapping.
inline ThreeHopDualityReport three_hop_duality_check(const ThreeHopNetwork& net, const BlockGain& a,
                                                     const BlockGain& b) {
  const BlockGain at = a.transposed(), bt = b.transposed();
  const ThreeHopSnrs mac = three_hop_mac_snrs(net, a, b);
  const ThreeHopSnrs bc = three_hop_bc_snrs(net, at, bt);

  ThreeHopDualityReport rep;
  rep.deltas = mac.deltas;
  rep.mac = mac.snrs;
  rep.bc = bc.snrs;
  rep.stronger_user = bc.snrs.snr1 >= bc.snrs.snr2 ? 1 : 2;

  const Eigen::RowVectorXd path = net.g_bar.transpose() * b.dense() * net.h * a.dense();
  const double s1 = detail::sq(path.dot(net.f1_bar)), s2 = detail::sq(path.dot(net.f2_bar));
  const double p = net.p_total(), rr = net.p_r1 * net.p_r2;
  const auto& d = rep.deltas;
  if (rep.stronger_user == 1) {
    const double den = p * d.delta_m + p * net.p2 * rr * s2;
    rep.alpha = d.delta_b1 * net.p1 / den;
    rep.alpha_r2 = (p * d.delta_m - net.p2 * d.delta_b2) / den;
    rep.mac_corner = {rate_from_snr(mac.snrs.snr1 / (1.0 + mac.snrs.snr2)), rate_from_snr(mac.snrs.snr2),
                      std::nullopt, "mac"};
  } else {
    const double den = p * d.delta_m + p * net.p1 * rr * s1;
    rep.alpha = d.delta_b2 * net.p2 / den;
    rep.alpha_r2 = (p * d.delta_m - net.p1 * d.delta_b1) / den;
    rep.mac_corner = {rate_from_snr(mac.snrs.snr1), rate_from_snr(mac.snrs.snr2 / (1.0 + mac.snrs.snr1)),
                      std::nullopt, "mac"};
  }
  rep.bc_point = degraded_bc_rates(bc.snrs, std::clamp(rep.alpha, 0.0, 1.0));
  rep.corner_residual = std::max(std::abs(rep.mac_corner.r1 - rep.bc_point.r1),
                                 std::abs(rep.mac_corner.r2 - rep.bc_point.r2));

  const StagePowers used = three_hop_bc_relay_powers(net, at, bt);
  rep.kappa1 = std::sqrt(net.p_r1 / used.stage1);
  const StagePowers used2 = three_hop_bc_relay_powers(net, at, bt.scaled(rep.kappa1));
  rep.kappa2 = std::sqrt(p / used2.stage2);

  rep.passed = d.identity_residual <= kIdentityTolerance && rep.corner_residual <= kCornerMatchTolerance &&
               std::abs(rep.alpha - rep.alpha_r2) <= 1e-12 * std::max(1.0, std::abs(rep.alpha));
  return rep;
}

}  // namespace afrelay
