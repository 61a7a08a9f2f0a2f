// Acceptance run: one PASS/FAIL line per criterion, with wall time.

#include "support.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>

using namespace afrelay;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string note;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) note = what;
    pass = pass && ok;
  }
};

double rel(double a, double b) { return rel_diff(a, b); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1. PTP closed form against the oracle, gap measured in the SNR argument.
Outcome ptp_oracle() {
  Outcome o;
  NetFactory make(101);
  double worst = -INFINITY, lowest = INFINITY;
  for (int k = 0; k < 20; ++k) {
    const PtpChannel net = make.ptp(1 + k % 3);
    const OracleResult r = brute_force_ptp(net, {100000, static_cast<std::uint64_t>(k), true});
    const double gap = std::expm1(r.closed_form_value) - std::expm1(r.best_value);
    worst = std::max(worst, gap);
    lowest = std::min(lowest, gap);
  }
  o.require(lowest >= -1e-9, "oracle beat the closed form by " + num(-lowest));
  o.require(worst <= 1e-4, "gap " + num(worst));
  if (o.pass) o.note = "gap range [" + num(lowest) + ", " + num(worst) + "]";
  return o;
}

// 2. PTP reciprocity for fixed gains.
Outcome ptp_reciprocity() {
  Outcome o;
  NetFactory make(101);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const PtpChannel net = make.ptp(1 + k % 3);
    worst = std::max(worst, rel(ptp_capacity(net), ptp_capacity(PtpChannel{net.g, net.f, net.p_relay, net.p_source})));
    for (int t = 0; t < 50; ++t) {
      const RelayGain d = feasible_gain(make.direction(net.relays()), net);
      const auto pair = dual_ptp(net, d);
      worst = std::max(worst, rel(rate_from_snr(ptp_snr(net, d)), rate_from_snr(ptp_snr(pair.dual, pair.dual_gain))));
    }
  }
  o.require(worst <= 1e-12, "relative mismatch " + num(worst));
  if (o.pass) o.note = "max rel " + num(worst);
  return o;
}

// 3. MAC sum capacity against the oracle, plus the reference net.
Outcome mac_sum_capacity_check() {
  Outcome o;
  const MacChannel asym = asymmetric_mac();
  const SumRateSolution ref = mac_sum_capacity(asym);
  o.require(std::abs(ref.capacity - std::log(35.0 / 17.0)) <= 1e-12, "reference C11 " + num(ref.capacity));
  o.require(std::abs(ref.a11 - 5.0 / 17.0) <= 1e-15 && std::abs(ref.a22 - 5.0 / 17.0) <= 1e-15 &&
                std::abs(ref.a12 - 4.0 / 17.0) <= 1e-15,
            "reference coupling sums");
  NetFactory make(303);
  double worst = -INFINITY, lowest = INFINITY;
  for (int k = 0; k < 20; ++k) {
    const MacChannel net = make.mac(1 + k % 3);
    const double c11 = mac_sum_capacity(net).capacity;
    const OracleResult r = brute_force_mac_weighted(net, 1.0, 1.0, {100000, static_cast<std::uint64_t>(k), true});
    worst = std::max(worst, c11 - r.best_value);
    lowest = std::min(lowest, c11 - r.best_value);
  }
  o.require(lowest >= -1e-9, "oracle beat C11 by " + num(-lowest));
  o.require(worst <= 1e-4, "gap " + num(worst));
  if (o.pass) o.note = "gap range [" + num(lowest) + ", " + num(worst) + "]";
  return o;
}

// 4. theta-scan against the stationarity-equation path.
Outcome weighted_agreement() {
  Outcome o;
  const std::array<std::pair<double, double>, 5> weights = {{{1, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 1}}};
  NetFactory make(404);
  int disagreements = 0;
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const MacChannel net = make.mac(make.relays());
    for (const auto& [m1, m2] : weights) {
      const WeightedOptimum w = mac_weighted_optimum(net, m1, m2);
      if (w.solver_disagreement) {
        ++disagreements;
        std::cout << "  net " << k << " mu=(" << m1 << "," << m2 << "): " << w.diagnostic << "\n";
      } else if (w.equation_converged) {
        worst = std::max(worst, std::abs(w.objective - w.equation_objective));
      }
    }
  }
  o.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
  o.require(worst <= 1e-7, "objective mismatch " + num(worst));
  if (o.pass) o.note = "max diff " + num(worst);
  return o;
}

// 5. MAC-BC duality for fixed gains.
Outcome mac_bc_duality() {
  Outcome o;
  const MacChannel sym = symmetric_mac();
  const DualityReport pin = verify_mac_bc_duality(sym, feasible_gain(RelayGain{1.0}, sym));
  o.require(pin.passed, "symmetric example failed");
  o.require(std::abs(pin.alpha - 0.4) <= 1e-12, "symmetric alpha " + num(pin.alpha));
  o.require(std::abs(pin.bc_point.r1 - std::log(1.2)) <= 1e-12 && std::abs(pin.bc_point.r2 - std::log(1.25)) <= 1e-12,
            "symmetric corner");
  NetFactory make(505);
  double worst = 0.0;
  std::size_t violations = 0;
  for (int k = 0; k < 100; ++k) {
    const MacChannel net = make.mac(make.relays());
    const DualityReport rep = verify_mac_bc_duality(net, feasible_gain(make.direction(net.relays()), net), 1000);
    o.require(rep.passed, "trial " + std::to_string(k) + " failed");
    worst = std::max(worst, rep.corner_residual);
    violations += rep.containment_violations;
  }
  o.require(worst <= 1e-10, "corner residual " + num(worst));
  o.require(violations == 0, std::to_string(violations) + " containment violations");
  if (o.pass) o.note = "max corner residual " + num(worst);
  return o;
}

// 6. User 1 alone beats user 1 sharing the relays.
Outcome strict_dominance() {
  Outcome o;
  NetFactory make(606);
  double margin = INFINITY;
  for (int k = 0; k < 100; ++k) {
    const MacChannel net = make.mac(make.relays());
    margin = std::min(margin, ptp_capacity(single_user(net, 1)) - mac_corner_rates(net, 1).favored);
  }
  o.require(margin >= 1e-12, "margin " + num(margin));
  if (o.pass) o.note = "min margin " + num(margin);
  return o;
}

// 7. Region tracer endpoints, monotonicity and the single-relay collapse.
Outcome region_tracer() {
  Outcome o;
  NetFactory make(707);
  constexpr std::size_t n = 64;
  double worst = 0.0;
  for (int k = 0; k < 30; ++k) {
    const MacChannel net = make.mac(1 + k % 3);
    const RegionBoundary region = mac_region(net, n);
    const auto& p = region.points;
    const CornerRates u1 = mac_corner_rates(net, 1), u2 = mac_corner_rates(net, 2);
    const SumRateSolution s = mac_sum_capacity(net);
    const auto off = [&](const RatePoint& a, double r1, double r2) {
      worst = std::max({worst, std::abs(a.r1 - r1), std::abs(a.r2 - r2)});
    };
    off(p[0], 0.0, u2.favored);                               // A
    off(p[2], u2.other, u2.favored);                          // B
    off(p[n + 1], s.corner_1_then_2.r1, s.corner_1_then_2.r2);  // C
    off(p[n + 2], s.corner_2_then_1.r1, s.corner_2_then_1.r2);  // D
    off(p[2 * n + 1], u1.favored, u1.other);                  // E
    off(p[2 * n + 3], u1.favored, 0.0);                       // F
    for (std::size_t i = 1; i < p.size(); ++i) {
      o.require(p[i].r1 >= p[i - 1].r1 - 1e-12 && p[i].r2 <= p[i - 1].r2 + 1e-12,
                "non-monotone at row " + std::to_string(i) + " of net " + std::to_string(k));
    }
    if (net.relays() == 1) {
      off(p[2], p[n + 1].r1, p[n + 1].r2);          // B = C
      off(p[n + 2], p[2 * n + 1].r1, p[2 * n + 1].r2);  // D = E
    }
  }
  o.require(worst <= 1e-12, "endpoint mismatch " + num(worst));
  if (o.pass) o.note = "max endpoint error " + num(worst);
  return o;
}

// 8. Three-hop denominators.
Outcome three_hop_identity() {
  Outcome o;
  NetFactory make(808);
  double identity = 0.0, chain = 0.0;
  int mixed = 0;
  for (int k = 0; k < 50; ++k) {
    const ThreeHopNetwork net = make.three_hop();
    mixed += net.blocks_a != std::vector<int>{1, 1} || net.blocks_b != std::vector<int>{1, 1};
    const BlockGain a = make.block_gain(net.blocks_a), b = make.block_gain(net.blocks_b);
    const ThreeHopSnrs s = three_hop_mac_snrs(net, a, b);
    const DeltaReport c = chain_deltas(net, a, b);
    identity = std::max(identity, s.deltas.identity_residual);
    chain = std::max({chain, rel(c.delta_m, s.deltas.delta_m), rel(c.delta_b1, s.deltas.delta_b1),
                      rel(c.delta_b2, s.deltas.delta_b2)});
  }
  o.require(mixed > 0, "no multi-antenna blocks drawn");
  o.require(identity <= 1e-12, "identity residual " + num(identity));
  o.require(chain <= 1e-12, "chain mismatch " + num(chain));

  ThreeHopNetwork ones;
  ones.f1_bar = ones.f2_bar = ones.g_bar = Vector::Ones(1);
  ones.h = Matrix::Ones(1, 1);
  ones.blocks_a = ones.blocks_b = {1};
  ones.p1 = ones.p2 = ones.p_r1 = ones.p_r2 = 1.0;
  const BlockGain one({Matrix::Ones(1, 1)});
  const SnrPair mac = three_hop_mac_snrs(ones, one, one.scaled(2.0)).snrs;
  o.require(std::abs(mac.snr1 - 0.1) <= 1e-15 && std::abs(mac.snr2 - 0.1) <= 1e-15, "all-ones SNR " + num(mac.snr1));
  if (o.pass) o.note = "identity " + num(identity) + ", chain " + num(chain);
  return o;
}

// 9. Normalized SNRs do not depend on the gain scale. Forming c d rounds
// every component, and the numerator sums cancel, so a change of about
// 1e-16 times the cancellation factor sum|t_i| / |sum t_i| is unavoidable.
// The check divides that factor out; the raw maximum is printed as well.
double cancellation(const DiagChannel& x, const RelayGain& d, const DiagChannel& y) {
  double s = 0.0, a = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    s += x[i] * d[i] * y[i];
    a += std::abs(x[i] * d[i] * y[i]);
  }
  return s == 0.0 ? 1.0 : std::max(1.0, a / std::abs(s));
}

Outcome scale_invariance() {
  Outcome o;
  NetFactory make(909);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  double worst = 0.0, raw = 0.0;
  const auto track = [&](double a, double b, double kappa) {
    raw = std::max(raw, rel(a, b));
    worst = std::max(worst, rel(a, b) / kappa);
  };
  for (int k = 0; k < 1000; ++k) {
    const std::size_t r = make.relays();
    const RelayGain d = make.direction(r);
    const double c = (k % 2 ? -1.0 : 1.0) * scale(make.engine());
    const RelayGain dc = d.scaled(c);
    const PtpChannel p = make.ptp(r);
    const MacChannel m = make.mac(r);
    const BcChannel b = make.bc(r);
    track(ptp_snr(p, d), ptp_snr(p, dc), cancellation(p.g, d, p.f));
    const SnrPair m1 = mac_snrs(m, d), m2 = mac_snrs(m, dc);
    track(m1.snr1, m2.snr1, cancellation(m.g, d, m.f1));
    track(m1.snr2, m2.snr2, cancellation(m.g, d, m.f2));
    const SnrPair b1 = bc_snrs(b, d), b2 = bc_snrs(b, dc);
    track(b1.snr1, b2.snr1, cancellation(b.f1, d, b.g));
    track(b1.snr2, b2.snr2, cancellation(b.f2, d, b.g));
    if (k % 10 == 0) {
      const ThreeHopNetwork net = make.three_hop();
      const BlockGain a = make.block_gain(net.blocks_a), bb = make.block_gain(net.blocks_b);
      const double c2 = scale(make.engine());
      // Componentwise bounds for the chains g' B H A f and f' A_b H' B_b g.
      const Matrix A = a.dense(), B = bb.dense();
      const auto kappa = [&](const Vector& left, const Matrix& m, const Matrix& m_abs, const Vector& right) {
        const double s = std::abs(left.dot(m * right));
        return s == 0.0 ? 1.0 : std::max(1.0, left.cwiseAbs().dot(m_abs * right.cwiseAbs()) / s);
      };
      const Matrix mac_chain = B * net.h * A, mac_abs = B.cwiseAbs() * net.h.cwiseAbs() * A.cwiseAbs();
      const Matrix bc_chain = A * net.h.transpose() * B,
                   bc_abs = A.cwiseAbs() * net.h.transpose().cwiseAbs() * B.cwiseAbs();
      const SnrPair t1 = three_hop_mac_snrs(net, a, bb).snrs, t2 = three_hop_mac_snrs(net, a.scaled(c), bb.scaled(c2)).snrs;
      const SnrPair u1 = three_hop_bc_snrs(net, a, bb).snrs, u2 = three_hop_bc_snrs(net, a.scaled(c2), bb.scaled(c)).snrs;
      track(t1.snr1, t2.snr1, kappa(net.g_bar, mac_chain, mac_abs, net.f1_bar));
      track(t1.snr2, t2.snr2, kappa(net.g_bar, mac_chain, mac_abs, net.f2_bar));
      track(u1.snr1, u2.snr1, kappa(net.f1_bar, bc_chain, bc_abs, net.g_bar));
      track(u1.snr2, u2.snr2, kappa(net.f2_bar, bc_chain, bc_abs, net.g_bar));
    }
  }
  o.require(worst <= 1e-14, "relative change per unit cancellation " + num(worst));
  o.note = "max rel / cancellation " + num(worst) + ", raw max rel " + num(raw);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. Two CLI runs with the same inputs give byte-identical files.
Outcome cli_reproducible() {
  Outcome o;
  const std::string cli = AFRELAY_CLI_PATH, data = AFRELAY_DATA_DIR;
  const std::vector<std::string> commands = {
      "ptp --config " + data + "/ptp_two.json --out gain.json",
      "mac-region --config " + data + "/mac_asymmetric.json --points 100 --out mac.csv",
      "mac-region --config " + data + "/mac_asymmetric.json --points 50 --out mac_bits.csv --bits",
      "bc-region --config " + data + "/bc_asymmetric.json --splits 51 --points 60 --out bc --time-sharing",
      "verify --mode mac-bc --trials 40 --seed 17 --out macbc.json",
      "verify --mode three-hop --config " + data + "/three_hop_mixed.json --trials 20 --seed 9 --out hop.json",
  };
  const fs::path root = fs::temp_directory_path() / ("afrelay_acceptance_" + std::to_string(::getpid()));
  std::array<fs::path, 2> dirs = {root / "a", root / "b"};
  for (std::size_t run = 0; run < 2; ++run) {
    fs::create_directories(dirs[run]);
    // Different worker counts must not change the bytes either.
    const std::string threads = run == 0 ? "1" : "4";
    for (const auto& c : commands) {
      const std::string line =
          "cd '" + dirs[run].string() + "' && AFRELAY_THREADS=" + threads + " '" + cli + "' " + c + " > stdout.txt 2>&1";
      const int status = std::system(line.c_str());
      o.require(status == 0, "command failed: " + c);
      fs::rename(dirs[run] / "stdout.txt", dirs[run] / ("stdout_" + c.substr(0, c.find(' ')) +
                                                         std::to_string(&c - commands.data()) + ".txt"));
    }
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    const fs::path other = dirs[1] / entry.path().filename();
    o.require(fs::exists(other), entry.path().filename().string() + " missing in second run");
    if (fs::exists(other)) {
      o.require(slurp(entry.path()) == slurp(other), entry.path().filename().string() + " differs");
      ++compared;
    }
  }
  o.require(compared >= 20, "only " + std::to_string(compared) + " files produced");
  if (o.pass) o.note = std::to_string(compared) + " files identical";
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double limit_seconds;  // 0: no limit
  };
  const std::vector<Criterion> criteria = {
      {"PTP closed form vs oracle", ptp_oracle, 5.0},
      {"PTP reciprocity", ptp_reciprocity, 1.0},
      {"MAC sum capacity", mac_sum_capacity_check, 10.0},
      {"weighted-sum solver agreement", weighted_agreement, 0.0},
      {"MAC-BC duality", mac_bc_duality, 10.0},
      {"strict dominance", strict_dominance, 0.0},
      {"region tracer", region_tracer, 0.0},
      {"three-hop identity", three_hop_identity, 0.0},
      {"scale invariance", scale_invariance, 0.0},
      {"CLI reproducibility", cli_reproducible, 0.0},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0.0 && secs > c.limit_seconds) {
      o.pass = false;
      o.note += " (over the " + num(c.limit_seconds) + " s limit)";
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, c.name, o.note.c_str(), secs);
  }
  return failed == 0 ? 0 : 1;
}
