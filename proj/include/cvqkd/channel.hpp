#pragma once

// Fiber catalog and the Gaussian channel parameters Alice and Bob estimate.

#include <charconv>
#include <cstdio>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>

#include "cvqkd/errors.hpp"

namespace cvqkd {

struct FiberSpec {
  std::string name;
  double attenuation = 0.2;  // dB/km
};

namespace fibers {
inline FiberSpec deployed() { return {"deployed", 0.275}; }
inline FiberSpec g652() { return {"g652", 0.2}; }
inline FiberSpec lowloss() { return {"lowloss", 0.15}; }
inline FiberSpec hollowcore() { return {"hollowcore", 0.1}; }
/// Idealised loss-free fiber.
inline FiberSpec lossless() { return {"lossless", 0.0}; }
}  // namespace fibers

inline FiberSpec custom_fiber(double attenuation) {
  if (!(attenuation > 0.0) || !std::isfinite(attenuation)) {
    throw DomainError("fiber attenuation must be positive");
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", attenuation);
  return {buf, attenuation};
}

/// Catalog name ("deployed", "g652", "lowloss", "hollowcore", "lossless") or a number in dB/km.
inline FiberSpec parse_fiber(std::string_view text) {
  if (text == "deployed") return fibers::deployed();
  if (text == "g652") return fibers::g652();
  if (text == "lowloss") return fibers::lowloss();
  if (text == "hollowcore") return fibers::hollowcore();
  if (text == "lossless") return fibers::lossless();
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DomainError("unknown fiber '" + std::string(text) + "'");
  }
  return custom_fiber(value);
}

/// Attenuation in dB over `length` km; additive in length.
inline double attenuation_db(const FiberSpec& fiber, double length) {
  if (!(length >= 0.0)) throw DomainError("fiber length must be non-negative");
  return fiber.attenuation * length;
}

inline double transmittance_from_db(double db) { return std::pow(10.0, -db / 10.0); }

inline double transmittance(const FiberSpec& fiber, double length) {
  return transmittance_from_db(attenuation_db(fiber, length));
}

/// Equivalent channel (T_equ, eps_equ) with input-referred excess noise.
class GaussianChannelTarget {
 public:
  GaussianChannelTarget(double transmittance, double excess_noise)
      : t_(transmittance), eps_(excess_noise) {
    if (!(t_ > 0.0 && t_ <= 1.0)) throw DomainError("channel transmittance must lie in (0, 1]");
    if (!(eps_ >= 0.0)) throw DomainError("excess noise must be non-negative");
  }

  double transmittance() const { return t_; }
  double excess_noise() const { return eps_; }
  /// Output-referred added noise 1 - T + T eps.
  double chi() const { return 1.0 - t_ + t_ * eps_; }
  /// Variance of the purifying thermal mode, 1 + T eps / (1 - T).
  double noise_variance() const {
    if (t_ >= 1.0) {
      if (eps_ == 0.0) return 1.0;
      throw DomainError("a unit-transmittance channel cannot carry excess noise");
    }
    return 1.0 + t_ * eps_ / (1.0 - t_);
  }

 private:
  double t_;
  double eps_;
};

inline GaussianChannelTarget target_from_system(double alpha_system, double length, double excess_noise) {
  return GaussianChannelTarget(transmittance(FiberSpec{"system", alpha_system}, length), excess_noise);
}

/// Placement of Eve's two stations along the link.
///   T1: Alice -> station I, T3 = T4: station I -> station II, T2: station II -> Bob.
class LinkGeometry {
 public:
  LinkGeometry(double l1, double l2, double l_total, FiberSpec eve_fiber)
      : l1_(l1), l2_(l2), l_total_(l_total), fiber_(std::move(eve_fiber)) {
    if (!(0.0 <= l1_ && l1_ <= l2_ && l2_ <= l_total_)) {
      throw DomainError("station positions must satisfy 0 <= L1 <= L2 <= L_total");
    }
    t1_ = transmittance(fiber_, l1_);
    t2_ = transmittance(fiber_, l_total_ - l2_);
    t3_ = transmittance(fiber_, l2_ - l1_);
  }

  /// Eve's fiber is lossless everywhere (the ideal teleportation model).
  static LinkGeometry lossless(double l_total = 0.0) {
    return LinkGeometry(0.0, 0.0, l_total, fibers::lossless());
  }

  /// Geometry given directly by its link transmittances (T4 = T3).
  static LinkGeometry from_transmittances(double t1, double t2, double t3) {
    for (double t : {t1, t2, t3}) {
      if (!(t > 0.0 && t <= 1.0)) throw DomainError("link transmittance must lie in (0, 1]");
    }
    LinkGeometry g = lossless();
    g.fiber_.name = "explicit";
    g.t1_ = t1;
    g.t2_ = t2;
    g.t3_ = t3;
    return g;
  }

  double l1() const { return l1_; }
  double l2() const { return l2_; }
  double l_total() const { return l_total_; }
  const FiberSpec& eve_fiber() const { return fiber_; }
  double t1() const { return t1_; }
  double t2() const { return t2_; }
  double t3() const { return t3_; }
  double t4() const { return t3_; }

 private:
  double l1_, l2_, l_total_;
  FiberSpec fiber_;
  double t1_ = 1.0, t2_ = 1.0, t3_ = 1.0;
};

}  // namespace cvqkd
