#pragma once

// Channel and network value types for parallel amplify-and-forward relay
// networks, plus the scale-invariant ("normalized") effective SNR forms.
//
// All channels are real-valued; noise variances are fixed at 1.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace afrelay {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

// A relay gain (or gain direction) that is identically zero.
class DegenerateGainError : public Error {
public:
  using Error::Error;
};

// No source-relay-destination path carries signal.
class DisconnectedNetworkError : public Error {
public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
public:
  using Error::Error;
};

// A gain handed to a duality routine does not meet the relay budget.
class FeasibilityError : public Error {
public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Value types
// ---------------------------------------------------------------------------

namespace detail {

// Shared storage for the two diagonal-matrix flavours. Distinct derived types
// keep channel coefficients and amplification factors from being mixed up.
class DiagValues {
public:
  DiagValues() = default;
  explicit DiagValues(std::vector<double> values) : values_(std::move(values)) {}
  DiagValues(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vec() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool all_finite() const noexcept {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }
  bool all_zero() const noexcept {
    for (double v : values_)
      if (v != 0.0) return false;
    return true;
  }

  friend bool operator==(const DiagValues&, const DiagValues&) = default;

protected:
  std::vector<double> values_;
};

}  // namespace detail

/// Diagonal channel matrix, one real coefficient per relay.
class DiagChannel : public detail::DiagValues {
public:
  using DiagValues::DiagValues;
  friend bool operator==(const DiagChannel&, const DiagChannel&) = default;
};

/// Per-relay amplification factors (diagonal D).
class RelayGain : public detail::DiagValues {
public:
  using DiagValues::DiagValues;

  RelayGain scaled(double c) const {
    RelayGain out = *this;
    for (auto& v : out.values_) v *= c;
    return out;
  }
  double norm() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
  }
  friend bool operator==(const RelayGain&, const RelayGain&) = default;
};

/// Single source, R parallel relays, single destination.
struct PtpChannel {
  DiagChannel f;          // source -> relay
  DiagChannel g;          // relay -> destination
  double p_source = 0.0;  // source symbol power
  double p_relay = 1.0;   // total relay transmit power

  std::size_t relays() const noexcept { return f.size(); }
  friend bool operator==(const PtpChannel&, const PtpChannel&) = default;
};

/// Two sources, R parallel relays, one destination.
struct MacChannel {
  DiagChannel f1;  // source 1 -> relay
  DiagChannel f2;  // source 2 -> relay
  DiagChannel g;   // relay -> destination
  double p1 = 0.0;
  double p2 = 0.0;
  double p_relay = 1.0;

  std::size_t relays() const noexcept { return g.size(); }
  double p_total() const noexcept { return p1 + p2; }
  friend bool operator==(const MacChannel&, const MacChannel&) = default;
};

/// One source, R parallel relays, two destinations.
struct BcChannel {
  DiagChannel g;   // source -> relay
  DiagChannel f1;  // relay -> destination 1
  DiagChannel f2;  // relay -> destination 2
  double p_source = 0.0;
  double p_relay = 1.0;

  std::size_t relays() const noexcept { return g.size(); }
  friend bool operator==(const BcChannel&, const BcChannel&) = default;
};

struct SnrPair {
  double snr1 = 0.0;
  double snr2 = 0.0;
  double sum() const noexcept { return snr1 + snr2; }
  friend bool operator==(const SnrPair&, const SnrPair&) = default;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline void require_len(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got)
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                         ", got " + std::to_string(got));
}

inline void require_power(double p, const char* what, bool strictly_positive) {
  if (!std::isfinite(p) || p < 0.0 || (strictly_positive && p == 0.0))
    throw InvalidArgumentError(std::string(what) + " must be " +
                               (strictly_positive ? "> 0" : ">= 0") + " and finite");
}

inline void require_finite(const DiagValues& v, const char* what) {
  if (!v.all_finite()) throw InvalidArgumentError(std::string(what) + " has non-finite entries");
}

}  // namespace detail

inline void validate(const PtpChannel& net) {
  if (net.f.empty()) throw DimensionError("ptp: channel arrays must not be empty");
  detail::require_len(net.f.size(), net.g.size(), "ptp g");
  detail::require_finite(net.f, "ptp f");
  detail::require_finite(net.g, "ptp g");
  detail::require_power(net.p_source, "ptp p_source", false);
  detail::require_power(net.p_relay, "ptp p_relay", true);
}

inline void validate(const MacChannel& net) {
  if (net.g.empty()) throw DimensionError("mac: channel arrays must not be empty");
  detail::require_len(net.g.size(), net.f1.size(), "mac f1");
  detail::require_len(net.g.size(), net.f2.size(), "mac f2");
  detail::require_finite(net.f1, "mac f1");
  detail::require_finite(net.f2, "mac f2");
  detail::require_finite(net.g, "mac g");
  detail::require_power(net.p1, "mac p1", false);
  detail::require_power(net.p2, "mac p2", false);
  detail::require_power(net.p_relay, "mac p_relay", true);
  if (net.p1 + net.p2 <= 0.0) throw InvalidArgumentError("mac: p1 + p2 must be > 0");
}

inline void validate(const BcChannel& net) {
  if (net.g.empty()) throw DimensionError("bc: channel arrays must not be empty");
  detail::require_len(net.g.size(), net.f1.size(), "bc f1");
  detail::require_len(net.g.size(), net.f2.size(), "bc f2");
  detail::require_finite(net.f1, "bc f1");
  detail::require_finite(net.f2, "bc f2");
  detail::require_finite(net.g, "bc g");
  detail::require_power(net.p_source, "bc p_source", false);
  detail::require_power(net.p_relay, "bc p_relay", true);
}

namespace detail {

template <class Net>
void require_gain(const Net& net, const RelayGain& d) {
  require_len(net.relays(), d.size(), "relay gain");
  require_finite(d, "relay gain");
}

template <class Net>
void require_nonzero_gain(const Net& net, const RelayGain& d) {
  require_gain(net, d);
  if (d.all_zero()) throw DegenerateGainError("relay gain is identically zero");
}

inline double sq(double x) noexcept { return x * x; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Relay power usage
// ---------------------------------------------------------------------------

/// Total relay transmit power sum_i d_i^2 (1 + sum_u P_u f_{u,i}^2).
inline double relay_output_power(const MacChannel& net, const RelayGain& d) {
  validate(net);
  detail::require_gain(net, d);
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    total += detail::sq(d[i]) *
             (1.0 + net.p1 * detail::sq(net.f1[i]) + net.p2 * detail::sq(net.f2[i]));
  return total;
}

inline double relay_output_power(const PtpChannel& net, const RelayGain& d) {
  validate(net);
  detail::require_gain(net, d);
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    total += detail::sq(d[i]) * (1.0 + net.p_source * detail::sq(net.f[i]));
  return total;
}

/// For a BC the relays hear the common source through g.
inline double relay_output_power(const BcChannel& net, const RelayGain& d) {
  validate(net);
  detail::require_gain(net, d);
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    total += detail::sq(d[i]) * (1.0 + net.p_source * detail::sq(net.g[i]));
  return total;
}

/// Positive rescaling of `direction` that spends exactly the relay budget.
template <class Net>
RelayGain feasible_gain(const RelayGain& direction, const Net& net) {
  detail::require_gain(net, direction);
  if (direction.all_zero()) throw DegenerateGainError("feasible_gain: all-zero direction");
  if (!(net.p_relay > 0.0)) throw InvalidArgumentError("feasible_gain: relay budget must be > 0");
  const double used = relay_output_power(net, direction);
  return direction.scaled(std::sqrt(net.p_relay / used));
}

// ---------------------------------------------------------------------------
// Normalized effective SNRs (invariant under d -> c d)
// ---------------------------------------------------------------------------

/// Per-user SNRs at the MAC destination with the relay budget folded into the
/// channel: snr_u = P_u P_R (sum g d f_u)^2 / sum d^2 (1 + P1 f1^2 + P2 f2^2 + P_R g^2).
inline SnrPair mac_snrs(const MacChannel& net, const RelayGain& d) {
  validate(net);
  detail::require_nonzero_gain(net, d);
  double s1 = 0.0, s2 = 0.0, den = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    s1 += net.g[i] * d[i] * net.f1[i];
    s2 += net.g[i] * d[i] * net.f2[i];
    den += detail::sq(d[i]) * (1.0 + net.p1 * detail::sq(net.f1[i]) +
                               net.p2 * detail::sq(net.f2[i]) + net.p_relay * detail::sq(net.g[i]));
  }
  return {net.p1 * net.p_relay * s1 * s1 / den, net.p2 * net.p_relay * s2 * s2 / den};
}

/// Per-destination SNRs of the BC. Unlike the MAC the denominators differ
/// per user because each destination sees its own forwarded relay noise.
inline SnrPair bc_snrs(const BcChannel& net, const RelayGain& d) {
  validate(net);
  detail::require_nonzero_gain(net, d);
  double s1 = 0.0, s2 = 0.0, den1 = 0.0, den2 = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    s1 += net.f1[i] * d[i] * net.g[i];
    s2 += net.f2[i] * d[i] * net.g[i];
    const double common = 1.0 + net.p_source * detail::sq(net.g[i]);
    den1 += detail::sq(d[i]) * (common + net.p_relay * detail::sq(net.f1[i]));
    den2 += detail::sq(d[i]) * (common + net.p_relay * detail::sq(net.f2[i]));
  }
  const double scale = net.p_relay * net.p_source;
  return {scale * s1 * s1 / den1, scale * s2 * s2 / den2};
}

inline double ptp_snr(const PtpChannel& net, const RelayGain& d) {
  validate(net);
  detail::require_nonzero_gain(net, d);
  double s = 0.0, den = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    s += net.g[i] * d[i] * net.f[i];
    den += detail::sq(d[i]) *
           (1.0 + net.p_source * detail::sq(net.f[i]) + net.p_relay * detail::sq(net.g[i]));
  }
  return net.p_source * net.p_relay * s * s / den;
}

// Unnormalized forms: SNR computed from the actual gain with unit destination
// noise plus forwarded relay noise. They agree with the normalized forms only
// when d meets the relay budget exactly.

inline double ptp_snr_unnormalized(const PtpChannel& net, const RelayGain& d) {
  validate(net);
  detail::require_gain(net, d);
  double s = 0.0, noise = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    s += net.g[i] * d[i] * net.f[i];
    noise += detail::sq(d[i] * net.g[i]);
  }
  return net.p_source * s * s / noise;
}

inline SnrPair mac_snrs_unnormalized(const MacChannel& net, const RelayGain& d) {
  validate(net);
  detail::require_gain(net, d);
  double s1 = 0.0, s2 = 0.0, noise = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    s1 += net.g[i] * d[i] * net.f1[i];
    s2 += net.g[i] * d[i] * net.f2[i];
    noise += detail::sq(d[i] * net.g[i]);
  }
  return {net.p1 * s1 * s1 / noise, net.p2 * s2 * s2 / noise};
}

inline SnrPair bc_snrs_unnormalized(const BcChannel& net, const RelayGain& d) {
  validate(net);
  detail::require_gain(net, d);
  double s1 = 0.0, s2 = 0.0, n1 = 1.0, n2 = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    s1 += net.f1[i] * d[i] * net.g[i];
    s2 += net.f2[i] * d[i] * net.g[i];
    n1 += detail::sq(d[i] * net.f1[i]);
    n2 += detail::sq(d[i] * net.f2[i]);
  }
  return {net.p_source * s1 * s1 / n1, net.p_source * s2 * s2 / n2};
}

// ---------------------------------------------------------------------------
// Small helpers shared by the solvers
// ---------------------------------------------------------------------------

/// log(1 + snr) with tiny negative rounding noise clamped to 0.
inline double rate_from_snr(double snr) {
  if (snr < 0.0 && snr > -1e-14) snr = 0.0;
  return std::log1p(snr);
}

/// Single-user view of user `user` (1 or 2) of a MAC, as if the other user
/// were silent.
inline PtpChannel single_user(const MacChannel& net, int user) {
  return user == 1 ? PtpChannel{net.f1, net.g, net.p1, net.p_relay}
                   : PtpChannel{net.f2, net.g, net.p2, net.p_relay};
}

/// The same MAC with the user labels exchanged.
inline MacChannel swap_users(const MacChannel& net) {
  return {net.f2, net.f1, net.g, net.p2, net.p1, net.p_relay};
}

inline BcChannel swap_users(const BcChannel& net) {
  return {net.g, net.f2, net.f1, net.p_source, net.p_relay};
}

}  // namespace afrelay
