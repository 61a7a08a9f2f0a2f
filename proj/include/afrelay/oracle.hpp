#pragma once

// Brute-force checks of the closed forms: random search over the feasible
// gain ellipsoid, a derivative-free polish, finite-difference stationarity,
// and a covariance-chain evaluation of the three-hop denominators.

#include <afrelay/capacity.hpp>
#include <afrelay/channel.hpp>
#include <afrelay/multihop.hpp>
#include <afrelay/parallel.hpp>
#include <afrelay/relay_optim.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace afrelay {

struct OracleConfig {
  std::size_t n_samples = 100000;
  std::uint64_t seed = 0;
  bool refine = true;
};

struct OracleResult {
  double best_value = -std::numeric_limits<double>::infinity();
  RelayGain best_gain;  // feasible
  double closed_form_value = 0.0;
  double gap = 0.0;  // closed_form_value - best_value
  std::optional<FamilyFit> family;  // MAC runs: fit of the best gain onto D(theta)
};

namespace detail {

inline constexpr std::size_t kOracleChunk = 1024;
inline constexpr int kRefineIterations = 200;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream per chunk, so results do not depend on the thread count.
inline std::mt19937_64 chunk_engine(std::uint64_t seed, std::uint64_t chunk) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ chunk));
}

using Objective = std::function<double(const RelayGain&)>;

struct Best {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t index = std::numeric_limits<std::size_t>::max();
  RelayGain gain;
};

inline bool better(const Best& a, const Best& b) {
  return a.value > b.value || (a.value == b.value && a.index < b.index);
}

// Uniform directions on the unit sphere; returns the best (value, index).
inline Best sample_sphere(std::size_t dim, const Objective& f, const OracleConfig& cfg) {
  const std::size_t n = std::max<std::size_t>(cfg.n_samples, 1);
  const std::size_t chunks = (n + kOracleChunk - 1) / kOracleChunk;
  std::vector<Best> per_chunk(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    auto rng = chunk_engine(cfg.seed, c);
    std::normal_distribution<double> normal(0.0, 1.0);
    Best local;
    std::vector<double> v(dim);
    const std::size_t end = std::min(n, (c + 1) * kOracleChunk);
    for (std::size_t i = c * kOracleChunk; i < end; ++i) {
      double norm = 0.0;
      do {
        norm = 0.0;
        for (auto& x : v) {
          x = normal(rng);
          norm += x * x;
        }
      } while (norm == 0.0);
      norm = std::sqrt(norm);
      for (auto& x : v) x /= norm;
      RelayGain d(v);
      const double value = f(d);
      Best cand{value, i, {}};
      if (better(cand, local)) {
        cand.gain = std::move(d);
        local = std::move(cand);
      }
    }
    per_chunk[c] = std::move(local);
  });
  Best best;
  for (auto& b : per_chunk)
    if (better(b, best)) best = std::move(b);
  return best;
}

// Cyclic coordinate search with a shrinking step on the unit sphere.
inline void polish(Best& best, const Objective& f) {
  std::vector<double> v = best.gain.vec();
  double step = 0.1;
  for (int it = 0; it < kRefineIterations; ++it) {
    bool improved = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> w = v;
        w[i] += sign * step;
        double norm = 0.0;
        for (double x : w) norm += x * x;
        if (norm == 0.0) continue;
        norm = std::sqrt(norm);
        for (auto& x : w) x /= norm;
        const RelayGain cand(w);
        const double value = f(cand);
        if (value > best.value) {
          best.value = value;
          v = std::move(w);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  best.gain = RelayGain(std::move(v));
}

template <class Net>
OracleResult run_oracle(const Net& net, const Objective& f, double closed_form, const OracleConfig& cfg) {
  Best best = sample_sphere(net.relays(), f, cfg);
  if (cfg.refine) polish(best, f);
  OracleResult out;
  out.best_value = best.value;
  out.best_gain = feasible_gain(best.gain, net);
  out.closed_form_value = closed_form;
  out.gap = closed_form - best.value;
  return out;
}

// The PTP and MAC objectives below are invariant under d -> c d; an all-zero
// gain never reaches them because sampled points lie on the unit sphere.

}  // namespace detail

/// Random search for the PTP rate, compared with the closed-form capacity.
inline OracleResult brute_force_ptp(const PtpChannel& net, const OracleConfig& cfg = {}) {
  validate(net);
  const detail::Objective f = [&net](const RelayGain& d) { return rate_from_snr(ptp_snr(net, d)); };
  return detail::run_oracle(net, f, ptp_capacity(net), cfg);
}

/// Weighted sum rate mu1 R1 + mu2 R2 at the better successive-decoding corner,
/// maximized by random search and compared with the D(theta) optimum.
inline OracleResult brute_force_mac_weighted(const MacChannel& net, double mu1, double mu2,
                                             const OracleConfig& cfg = {}) {
  const WeightedOptimum opt = mac_weighted_optimum(net, mu1, mu2);
  const detail::Objective f = [&net, mu1, mu2](const RelayGain& d) {
    const auto [r1, r2] = weighted_corner(mac_snrs(net, d), mu1, mu2);
    return mu1 * r1 + mu2 * r2;
  };
  OracleResult out = detail::run_oracle(net, f, opt.objective, cfg);
  out.family = project_onto_family(net, out.best_gain);
  return out;
}

/// Largest |directional derivative| of the weighted objective along a basis of
/// directions tangent to the relay power ellipsoid at d. Near zero at a
/// stationary point.
inline double stationarity_check(const MacChannel& net, const RelayGain& d, double mu1, double mu2) {
  validate(net);
  detail::require_nonzero_gain(net, d);
  if (!(mu1 >= 0.0) || !(mu2 >= 0.0) || mu1 + mu2 <= 0.0)
    throw InvalidArgumentError("stationarity_check: weights must be >= 0 with a positive sum");
  const auto objective = [&](const RelayGain& x) {
    const auto [r1, r2] = weighted_corner(mac_snrs(net, feasible_gain(x, net)), mu1, mu2);
    return mu1 * r1 + mu2 * r2;
  };
  const std::size_t n = d.size();
  std::vector<double> normal(n);
  double nn = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    normal[i] = d[i] * (1.0 + net.p1 * detail::sq(net.f1[i]) + net.p2 * detail::sq(net.f2[i]));
    nn += normal[i] * normal[i];
  }
  constexpr double h = 1e-6;
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> t(n, 0.0);
    t[k] = 1.0;
    for (std::size_t i = 0; i < n; ++i) t[i] -= normal[k] / nn * normal[i];
    double tn = 0.0;
    for (double x : t) tn += x * x;
    tn = std::sqrt(tn);
    if (tn < 1e-12) continue;
    std::vector<double> plus(n), minus(n);
    for (std::size_t i = 0; i < n; ++i) {
      plus[i] = d[i] + h * t[i] / tn;
      minus[i] = d[i] - h * t[i] / tn;
    }
    const double deriv = (objective(RelayGain(plus)) - objective(RelayGain(minus))) / (2.0 * h);
    worst = std::max(worst, std::abs(deriv));
  }
  return worst;
}

/// Three-hop denominators from the covariance of the full signal chain.
/// Each stage's gain is rescaled to its budget, the destination noise
/// variance is accumulated stage by stage, and the result is mapped back to
/// the unscaled-gain normalization. Shares no code with the term-by-term
/// assemblies.
inline DeltaReport chain_deltas(const ThreeHopNetwork& net, const BlockGain& a, const BlockGain& b) {
  validate(net);
  const Matrix A0 = a.dense(), B0 = b.dense();
  const Eigen::Index n1 = net.n1(), n2 = net.n2();
  DeltaReport out;

  // MAC: sources -> A -> H -> B -> g'.
  {
    const Matrix cov1 = Matrix::Identity(n1, n1) + net.p1 * net.f1_bar * net.f1_bar.transpose() +
                        net.p2 * net.f2_bar * net.f2_bar.transpose();
    const double a2 = net.p_r1 / (A0 * cov1 * A0.transpose()).trace();
    const Matrix A = std::sqrt(a2) * A0;
    const Matrix cov2 = net.h * A * cov1 * A.transpose() * net.h.transpose() + Matrix::Identity(n2, n2);
    const double b2 = net.p_r2 / (B0 * cov2 * B0.transpose()).trace();
    const Matrix B = std::sqrt(b2) * B0;
    // Noise reaching the destination: own noise, stage-2 noise, stage-1 noise.
    const Eigen::RowVectorXd gb = net.g_bar.transpose() * B;
    const Eigen::RowVectorXd gbha = gb * net.h * A;
    const double noise = 1.0 + gb.squaredNorm() + gbha.squaredNorm();
    out.delta_m = net.p_r1 * net.p_r2 * noise / (a2 * b2);
  }

  // Dual BC with transposed gains: source (P_R2) -> g -> B' -> H' -> A' -> f_j.
  {
    const Matrix Ab0 = A0.transpose(), Bb0 = B0.transpose();
    const double p = net.p_total();
    const Matrix cov1 = net.p_r2 * net.g_bar * net.g_bar.transpose() + Matrix::Identity(n2, n2);
    const double b2 = net.p_r1 / (Bb0 * cov1 * Bb0.transpose()).trace();
    const Matrix Bb = std::sqrt(b2) * Bb0;
    const Matrix cov2 = net.h.transpose() * Bb * cov1 * Bb.transpose() * net.h + Matrix::Identity(n1, n1);
    const double a2 = p / (Ab0 * cov2 * Ab0.transpose()).trace();
    const Matrix Ab = std::sqrt(a2) * Ab0;
    auto delta_for = [&](const Vector& fj) {
      const Eigen::RowVectorXd fa = fj.transpose() * Ab;
      const Eigen::RowVectorXd fahb = fa * net.h.transpose() * Bb;
      const double noise = 1.0 + fa.squaredNorm() + fahb.squaredNorm();
      return p * net.p_r1 * noise / (a2 * b2);
    };
    out.delta_b1 = delta_for(net.f1_bar);
    out.delta_b2 = delta_for(net.f2_bar);
  }
  const double lhs = net.p_total() * out.delta_m;
  out.identity_residual = std::abs(lhs - net.p1 * out.delta_b1 - net.p2 * out.delta_b2) / lhs;
  return out;
}

}  // namespace afrelay
