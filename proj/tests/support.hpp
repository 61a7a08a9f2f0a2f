#pragma once

// Random networks for property tests: coefficients U(-2, 2), powers U(0.1, 5).

#include <afrelay/afrelay.hpp>

#include <random>
#include <vector>

namespace testing_support {

using namespace afrelay;

class NetFactory {
public:
  explicit NetFactory(std::uint64_t seed) : rng_(seed) {}

  double coeff() { return std::uniform_real_distribution<double>(-2.0, 2.0)(rng_); }
  double power() { return std::uniform_real_distribution<double>(0.1, 5.0)(rng_); }
  std::size_t relays(std::size_t lo = 1, std::size_t hi = 3) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }

  std::vector<double> coeffs(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = coeff();
    return v;
  }

  PtpChannel ptp(std::size_t r) { return {DiagChannel(coeffs(r)), DiagChannel(coeffs(r)), power(), power()}; }
  MacChannel mac(std::size_t r) {
    return {DiagChannel(coeffs(r)), DiagChannel(coeffs(r)), DiagChannel(coeffs(r)), power(), power(), power()};
  }
  BcChannel bc(std::size_t r) {
    return {DiagChannel(coeffs(r)), DiagChannel(coeffs(r)), DiagChannel(coeffs(r)), power(), power()};
  }

  RelayGain direction(std::size_t r) {
    std::vector<double> v;
    do {
      v = coeffs(r);
    } while (RelayGain(v).all_zero());
    return RelayGain(std::move(v));
  }

  std::vector<int> block_sizes(int relays) {
    std::vector<int> sizes;
    for (int i = 0; i < relays; ++i) sizes.push_back(std::uniform_int_distribution<int>(1, 2)(rng_));
    return sizes;
  }

  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = coeff();
    return m;
  }

  Vector vector(Eigen::Index n) { return matrix(n, 1); }

  /// Two relays per stage, each with one or two antennas.
  ThreeHopNetwork three_hop() {
    ThreeHopNetwork net;
    net.blocks_a = block_sizes(2);
    net.blocks_b = block_sizes(2);
    const Eigen::Index n1 = net.blocks_a[0] + net.blocks_a[1];
    const Eigen::Index n2 = net.blocks_b[0] + net.blocks_b[1];
    net.f1_bar = vector(n1);
    net.f2_bar = vector(n1);
    net.g_bar = vector(n2);
    net.h = matrix(n2, n1);
    net.p1 = power();
    net.p2 = power();
    net.p_r1 = power();
    net.p_r2 = power();
    return net;
  }

  BlockGain block_gain(const std::vector<int>& sizes) {
    std::vector<Matrix> blocks;
    for (int s : sizes) blocks.push_back(matrix(s, s));
    return BlockGain(std::move(blocks));
  }

  std::mt19937_64& engine() { return rng_; }

private:
  std::mt19937_64 rng_;
};

inline MacChannel symmetric_mac() { return {DiagChannel{1.0}, DiagChannel{1.0}, DiagChannel{1.0}, 1.0, 1.0, 1.0}; }

inline MacChannel asymmetric_mac() {
  return {DiagChannel{1.0, 0.5}, DiagChannel{0.5, 1.0}, DiagChannel{1.0, 1.0}, 1.0, 1.0, 2.0};
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace testing_support
