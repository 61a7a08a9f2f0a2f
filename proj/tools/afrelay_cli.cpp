// afrelay: capacities, region boundaries and duality checks for AF relay
// networks. Exit codes: 0 ok, 1 verification failed, 2 usage or config error.

#include <afrelay/afrelay.hpp>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifndef AFRELAY_VERSION
#define AFRELAY_VERSION "0.0.0"
#endif

namespace {

using namespace afrelay;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

// Collects output files and writes the run manifest next to them.
class Run {
public:
  Run(std::string command, const std::string& config_path) : command_(std::move(command)) {
    if (!config_path.empty()) {
      config_text_ = io::read_file(config_path);
      input_ = {{"path", config_path}, {"sha256", sha256_hex(config_text_)}};
    }
  }

  const std::string& config_text() const { return config_text_; }
  json& parameters() { return params_; }

  void write(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(path + ": cannot write");
    out << content;
    if (!out.flush()) throw ConfigError(path + ": write failed");
    outputs_.push_back({{"path", path}, {"sha256", sha256_hex(content)}});
  }

  void finish(const std::string& manifest_path) {
    json m;
    m["command"] = command_;
    m["version"] = AFRELAY_VERSION;
    m["input"] = input_;
    m["parameters"] = params_;
    m["outputs"] = outputs_;
    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(manifest_path + ": cannot write");
    out << m.dump(2) << "\n";
  }

private:
  std::string command_;
  std::string config_text_;
  json input_ = nullptr;
  json params_ = json::object();
  json outputs_ = json::array();
};

json load(const Run& run, const std::string& path) { return io::parse_json(run.config_text(), path); }

std::string replace_ext(const std::string& path, const std::string& ext) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return path.substr(0, dot) + ext;
  return path + ext;
}

// ---------------------------------------------------------------------------

struct PtpArgs {
  std::string config;
  std::string out = "ptp_gain.json";
};

int cmd_ptp(const PtpArgs& a) {
  Run run("ptp", a.config);
  const PtpChannel net = io::ptp_from_json(load(run, a.config));
  run.parameters() = {{"out", a.out}};
  const double cap = ptp_capacity(net);
  std::cout << "capacity_nats=" << io::fmt(cap) << "\n";
  std::cout << "capacity_bits=" << io::fmt(cap / std::log(2.0)) << "\n";

  json j;
  j["capacity_nats"] = cap;
  j["capacity_bits"] = cap / std::log(2.0);
  try {
    const RelayGain d = ptp_optimal_gain(net);
    j["gain"] = io::gain_to_json(d);
    j["gamma"] = ptp_optimal_gamma(net);
    j["relay_power"] = relay_output_power(net, d);
  } catch (const DisconnectedNetworkError&) {
    // No relay path: every gain is optimal, none is reported.
    j["gain"] = nullptr;
    std::cout << "disconnected=true\n";
  }
  run.write(a.out, j.dump(2) + "\n");
  run.finish(a.out + ".manifest.json");
  return kOk;
}

// ---------------------------------------------------------------------------

struct MacRegionArgs {
  std::string config;
  std::string out;
  std::size_t points = 100;
  bool bits = false;
};

int cmd_mac_region(const MacRegionArgs& a) {
  Run run("mac-region", a.config);
  const MacChannel net = io::mac_from_json(load(run, a.config));
  run.parameters() = {{"points", a.points}, {"bits", a.bits}, {"out", a.out}};
  const io::RateUnit unit = a.bits ? io::bits() : io::nats();
  const RegionBoundary region = mac_region(net, a.points);

  std::ostringstream csv;
  io::write_region_csv(csv, region, unit);
  run.write(a.out, csv.str());
  const json summary = io::region_summary_json(region, unit);
  run.write(replace_ext(a.out, ".summary.json"), summary.dump(2) + "\n");
  run.finish(a.out + ".manifest.json");

  std::cout << "rows=" << region.points.size() << "\n";
  std::cout << "c11_" << unit.suffix << "=" << io::fmt(summary["c11"].get<double>()) << "\n";
  std::cout << "theta11=" << io::fmt(region.sum_rate.theta11) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct BcRegionArgs {
  std::string config;
  std::string out;
  std::size_t splits = 21;
  std::size_t points = 100;
  bool time_sharing = false;
  bool bits = false;
};

inline constexpr double kNonConvexThreshold = 1e-9;

int cmd_bc_region(const BcRegionArgs& a) {
  Run run("bc-region", a.config);
  const BcChannel net = io::bc_from_json(load(run, a.config));
  run.parameters() = {{"splits", a.splits},         {"points", a.points}, {"time_sharing", a.time_sharing},
                      {"bits", a.bits},             {"out", a.out}};
  const io::RateUnit unit = a.bits ? io::bits() : io::nats();
  const BcRegion region = bc_region(net, a.splits, a.points);
  const auto hull = upper_concave_envelope(region.frontier);
  const double gap = envelope_gap(region.frontier, hull);
  const bool non_convex = gap > kNonConvexThreshold;

  std::ostringstream splits, frontier;
  io::write_bc_splits_csv(splits, region, unit);
  io::write_frontier_csv(frontier, region.frontier, unit);
  run.write(a.out + ".splits.csv", splits.str());
  run.write(a.out + ".frontier.csv", frontier.str());
  if (a.time_sharing) {
    std::ostringstream env;
    io::write_frontier_csv(env, hull, unit);
    run.write(a.out + ".envelope.csv", env.str());
  }
  json summary;
  summary["unit"] = unit.suffix;
  summary["splits"] = region.per_split.size();
  summary["frontier_points"] = region.frontier.size();
  summary["envelope_points"] = hull.size();
  summary["envelope_gap"] = gap * unit.scale;
  summary["non_convex"] = non_convex;
  run.write(a.out + ".summary.json", summary.dump(2) + "\n");
  run.finish(a.out + ".manifest.json");

  std::cout << "frontier_points=" << region.frontier.size() << "\n";
  std::cout << "non_convex=" << (non_convex ? "true" : "false") << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// verify: randomized duality checks. With --config the network is fixed and
// only the gains are drawn; without it every trial draws its own network.

struct VerifyArgs {
  std::string config;
  std::string mode;
  std::string out = "verify_report.json";
  std::size_t trials = 100;
  std::uint64_t seed = 0;
};

inline constexpr double kPtpTolerance = 1e-12;

struct Draw {
  explicit Draw(std::uint64_t seed, std::uint64_t trial) : rng(detail::chunk_engine(seed, trial)) {}
  double coeff() { return std::uniform_real_distribution<double>(-2.0, 2.0)(rng); }
  double power() { return std::uniform_real_distribution<double>(0.1, 5.0)(rng); }
  std::size_t relays() { return std::uniform_int_distribution<std::size_t>(1, 3)(rng); }
  std::vector<double> coeffs(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = coeff();
    return v;
  }
  RelayGain direction(std::size_t n) {
    for (;;) {
      RelayGain d(coeffs(n));
      if (!d.all_zero()) return d;
    }
  }
  Matrix matrix(Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = coeff();
    return m;
  }
  BlockGain block_gain(const std::vector<int>& sizes) {
    std::vector<Matrix> blocks;
    for (int s : sizes) blocks.push_back(matrix(s, s));
    return BlockGain(std::move(blocks));
  }
  ThreeHopNetwork three_hop() {
    ThreeHopNetwork net;
    for (int i = 0; i < 2; ++i) {
      net.blocks_a.push_back(std::uniform_int_distribution<int>(1, 2)(rng));
      net.blocks_b.push_back(std::uniform_int_distribution<int>(1, 2)(rng));
    }
    const Eigen::Index n1 = net.blocks_a[0] + net.blocks_a[1], n2 = net.blocks_b[0] + net.blocks_b[1];
    net.f1_bar = matrix(n1, 1);
    net.f2_bar = matrix(n1, 1);
    net.g_bar = matrix(n2, 1);
    net.h = matrix(n2, n1);
    net.p1 = power();
    net.p2 = power();
    net.p_r1 = power();
    net.p_r2 = power();
    return net;
  }
  std::mt19937_64 rng;
};

struct Trial {
  bool passed = false;
  json detail;
};

Trial ptp_trial(const std::optional<PtpChannel>& fixed, Draw& draw) {
  const std::size_t r = fixed ? fixed->relays() : draw.relays();
  const PtpChannel net = fixed ? *fixed : PtpChannel{DiagChannel(draw.coeffs(r)), DiagChannel(draw.coeffs(r)),
                                                     draw.power(), draw.power()};
  const RelayGain d = feasible_gain(draw.direction(r), net);
  const auto pair = dual_ptp(net, d);
  const double s = ptp_snr(net, d), sd = ptp_snr(pair.dual, pair.dual_gain);
  const double snr_residual = s > 0.0 ? std::abs(s - sd) / s : std::abs(sd);
  const double c = ptp_capacity(net), cd = ptp_capacity(pair.dual);
  const double cap_residual = c > 0.0 ? std::abs(c - cd) / c : std::abs(cd);
  const double residual = std::max(snr_residual, cap_residual);
  return {residual <= kPtpTolerance, {{"residual", residual}, {"kappa", pair.kappa}}};
}

Trial mac_bc_trial(const std::optional<MacChannel>& fixed, Draw& draw) {
  const std::size_t r = fixed ? fixed->relays() : draw.relays();
  const MacChannel net = fixed ? *fixed
                               : MacChannel{DiagChannel(draw.coeffs(r)), DiagChannel(draw.coeffs(r)),
                                            DiagChannel(draw.coeffs(r)), draw.power(), draw.power(), draw.power()};
  const RelayGain d = feasible_gain(draw.direction(r), net);
  const DualityReport rep = verify_mac_bc_duality(net, d);
  return {rep.passed,
          {{"corner_residual", rep.corner_residual},
           {"alpha", rep.alpha},
           {"alpha_residual", rep.alpha_residual},
           {"stronger_user", rep.stronger_user},
           {"containment_violations", rep.containment_violations}}};
}

Trial three_hop_trial(const std::optional<ThreeHopNetwork>& fixed, Draw& draw) {
  const ThreeHopNetwork net = fixed ? *fixed : draw.three_hop();
  const BlockGain a = draw.block_gain(net.blocks_a), b = draw.block_gain(net.blocks_b);
  const ThreeHopDualityReport rep = three_hop_duality_check(net, a, b);
  const DeltaReport chain = chain_deltas(net, a, b);
  auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(x), std::abs(y)); };
  const double chain_residual = std::max({rel(chain.delta_m, rep.deltas.delta_m), rel(chain.delta_b1, rep.deltas.delta_b1),
                                          rel(chain.delta_b2, rep.deltas.delta_b2)});
  return {rep.passed && chain_residual <= kIdentityTolerance,
          {{"identity_residual", rep.deltas.identity_residual},
           {"chain_residual", chain_residual},
           {"corner_residual", rep.corner_residual},
           {"alpha", rep.alpha},
           {"stronger_user", rep.stronger_user}}};
}

int cmd_verify(const VerifyArgs& a) {
  Run run("verify", a.config);
  run.parameters() = {{"mode", a.mode}, {"trials", a.trials}, {"seed", a.seed}, {"out", a.out}};
  std::optional<PtpChannel> ptp;
  std::optional<MacChannel> mac;
  std::optional<ThreeHopNetwork> hop;
  if (!a.config.empty()) {
    const json j = load(run, a.config);
    if (a.mode == "ptp") ptp = io::ptp_from_json(j);
    if (a.mode == "mac-bc") mac = io::mac_from_json(j);
    if (a.mode == "three-hop") hop = io::three_hop_from_json(j);
  }

  std::vector<Trial> trials(a.trials);
  parallel_for(a.trials, [&](std::size_t i) {
    Draw draw(a.seed, i);
    if (a.mode == "ptp") trials[i] = ptp_trial(ptp, draw);
    else if (a.mode == "mac-bc") trials[i] = mac_bc_trial(mac, draw);
    else trials[i] = three_hop_trial(hop, draw);
  });

  json report;
  report["mode"] = a.mode;
  report["seed"] = a.seed;
  report["trials"] = a.trials;
  std::size_t failures = 0;
  json per_trial = json::array();
  json worst = json::object();
  for (const auto& t : trials) {
    if (!t.passed) ++failures;
    per_trial.push_back(t.detail);
    for (const auto& [key, value] : t.detail.items()) {
      if (key.find("residual") == std::string::npos) continue;
      const double v = value.get<double>();
      if (!worst.contains(key) || v > worst[key].get<double>()) worst[key] = v;
    }
  }
  report["failures"] = failures;
  report["passed"] = failures == 0;
  report["max"] = worst;
  report["per_trial"] = per_trial;
  run.write(a.out, report.dump(2) + "\n");
  run.finish(a.out + ".manifest.json");

  for (const auto& [key, value] : worst.items()) std::cout << "max_" << key << "=" << io::fmt(value.get<double>()) << "\n";
  std::cout << (failures == 0 ? "PASS" : "FAIL") << " " << a.mode << " trials=" << a.trials
            << " failures=" << failures << "\n";
  return failures == 0 ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Amplify-and-forward relay capacities, regions and duality checks"};
  app.set_version_flag("--version", std::string(AFRELAY_VERSION));
  app.require_subcommand(1);

  PtpArgs ptp;
  auto* c_ptp = app.add_subcommand("ptp", "point-to-point capacity and optimal relay gain");
  c_ptp->add_option("--config", ptp.config, "network file (JSON)")->required()->check(CLI::ExistingFile);
  c_ptp->add_option("--out", ptp.out, "gain output (JSON)")->capture_default_str();

  MacRegionArgs mac;
  auto* c_mac = app.add_subcommand("mac-region", "trace the MAC capacity region boundary");
  c_mac->add_option("--config", mac.config, "network file (JSON)")->required()->check(CLI::ExistingFile);
  c_mac->add_option("--points", mac.points, "points per curved segment")->check(CLI::Range(2, 1000000))->capture_default_str();
  c_mac->add_option("--out", mac.out, "boundary CSV")->required();
  c_mac->add_flag("--bits", mac.bits, "rates in bits instead of nats");

  BcRegionArgs bc;
  auto* c_bc = app.add_subcommand("bc-region", "BC region as a union of dual MAC regions");
  c_bc->add_option("--config", bc.config, "network file (JSON)")->required()->check(CLI::ExistingFile);
  c_bc->add_option("--splits", bc.splits, "number of user power splits")->check(CLI::Range(2, 100000))->capture_default_str();
  c_bc->add_option("--points", bc.points, "points per curved segment")->check(CLI::Range(2, 1000000))->capture_default_str();
  c_bc->add_option("--out", bc.out, "output prefix")->required();
  c_bc->add_flag("--time-sharing", bc.time_sharing, "also write the upper concave envelope");
  c_bc->add_flag("--bits", bc.bits, "rates in bits instead of nats");

  VerifyArgs ver;
  auto* c_ver = app.add_subcommand("verify", "randomized duality checks");
  c_ver->add_option("--config", ver.config, "fixed network file (JSON); random networks if omitted")
      ->check(CLI::ExistingFile);
  c_ver->add_option("--mode", ver.mode, "ptp, mac-bc or three-hop")
      ->required()
      ->check(CLI::IsMember({"ptp", "mac-bc", "three-hop"}));
  c_ver->add_option("--trials", ver.trials, "number of random draws")->check(CLI::Range(1, 10000000))->capture_default_str();
  c_ver->add_option("--seed", ver.seed, "random seed")->capture_default_str();
  c_ver->add_option("--out", ver.out, "report (JSON)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*c_ptp) return cmd_ptp(ptp);
    if (*c_mac) return cmd_mac_region(mac);
    if (*c_bc) return cmd_bc_region(bc);
    if (*c_ver) return cmd_verify(ver);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
