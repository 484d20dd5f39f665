#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace modesheaf {

// Default tolerances. Weights closer to zero than `kSnapTolerance` are
// snapped to exactly zero before support computation; `kSumTolerance`
// bounds the allowed drift of a partition-of-unity sum from 1.
inline constexpr double kSnapTolerance = 1e-9;
inline constexpr double kSumTolerance = 1e-9;

enum class ErrorCode {
  UnknownVertex,
  EmptyCover,
  NotACover,
  SampleMismatch,
  SupportNotASimplex,
  SegmentLeavesComplex,
  NotASubset,
  NotASuperset,
  OutOfStateSpace,
  PartitionAxiom,
  SchemaError,
  ShieldBreach,
  NoProbes,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::EmptyCover: return "EmptyCover";
    case ErrorCode::NotACover: return "NotACover";
    case ErrorCode::SampleMismatch: return "SampleMismatch";
    case ErrorCode::SupportNotASimplex: return "SupportNotASimplex";
    case ErrorCode::SegmentLeavesComplex: return "SegmentLeavesComplex";
    case ErrorCode::NotASubset: return "NotASubset";
    case ErrorCode::NotASuperset: return "NotASuperset";
    case ErrorCode::OutOfStateSpace: return "OutOfStateSpace";
    case ErrorCode::PartitionAxiom: return "PartitionAxiom";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ShieldBreach: return "ShieldBreach";
    case ErrorCode::NoProbes: return "NoProbes";
  }
  return "Unknown";
}

class ModelError : public std::runtime_error {
 public:
  ModelError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw ModelError(code, what);
}

/// A point of a state space: a small set of named real coordinates.
/// Stored sorted by name; lookup is a linear scan (states have a handful
/// of coordinates at most).
class State {
 public:
  State() = default;
  State(std::initializer_list<std::pair<std::string, double>> kv) {
    for (const auto& [k, v] : kv) set(k, v);
  }

  void set(std::string_view name, double value) {
    for (auto& [k, v] : kv_) {
      if (k == name) {
        v = value;
        return;
      }
    }
    kv_.emplace_back(std::string(name), value);
    std::sort(kv_.begin(), kv_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  bool has(std::string_view name) const {
    for (const auto& [k, v] : kv_)
      if (k == name) return true;
    return false;
  }

  double at(std::string_view name) const {
    for (const auto& [k, v] : kv_)
      if (k == name) return v;
    fail(ErrorCode::SchemaError, "state has no coordinate '" + std::string(name) + "'");
  }

  const std::vector<std::pair<std::string, double>>& items() const { return kv_; }
  std::size_t size() const { return kv_.size(); }

  bool operator==(const State& o) const { return kv_ == o.kv_; }

  std::string to_string() const {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [k, v] : kv_) {
      if (!first) os << ", ";
      os << k << "=" << v;
      first = false;
    }
    os << "}";
    return os.str();
  }

 private:
  std::vector<std::pair<std::string, double>> kv_;
};

/// One-dimensional interval with independently open or closed endpoints.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double x) const {
    if (lo_open ? x <= lo : x < lo) return false;
    if (hi_open ? x >= hi : x > hi) return false;
    return true;
  }
};

/// Axis-aligned box over named coordinates. Coordinates absent from the
/// box are unconstrained.
class Box {
 public:
  Box() = default;

  void set(std::string_view coord, Interval iv) {
    for (auto& [k, v] : axes_) {
      if (k == coord) {
        v = iv;
        return;
      }
    }
    axes_.emplace_back(std::string(coord), iv);
  }

  bool has(std::string_view coord) const {
    for (const auto& [k, v] : axes_)
      if (k == coord) return true;
    return false;
  }

  const Interval& axis(std::string_view coord) const {
    for (const auto& [k, v] : axes_)
      if (k == coord) return v;
    fail(ErrorCode::SchemaError, "box has no axis '" + std::string(coord) + "'");
  }

  const std::vector<std::pair<std::string, Interval>>& axes() const { return axes_; }

  bool contains(const State& s) const {
    for (const auto& [k, iv] : axes_) {
      if (!s.has(k)) return false;
      if (!iv.contains(s.at(k))) return false;
    }
    return true;
  }

  /// Uniform sample strictly inside the box (open endpoints are avoided
  /// almost surely; degenerate axes return the single point).
  template <typename Rng>
  State sample(Rng& rng) const {
    State s;
    for (const auto& [k, iv] : axes_) {
      if (iv.hi <= iv.lo) {
        s.set(k, iv.lo);
        continue;
      }
      std::uniform_real_distribution<double> dist(iv.lo, iv.hi);
      s.set(k, dist(rng));
    }
    return s;
  }

 private:
  std::vector<std::pair<std::string, Interval>> axes_;
};

/// Verbosity from the MODESHEAF_LOG environment variable: unset/empty or
/// "off" is silent, "info" logs scenario-level messages, "debug" adds
/// per-operation diagnostics.
inline int log_level() {
  static const int level = [] {
    const char* v = std::getenv("MODESHEAF_LOG");
    if (v == nullptr) return 0;
    std::string s(v);
    if (s == "debug") return 2;
    if (s == "info") return 1;
    return 0;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[modesheaf] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[modesheaf:debug] " << msg << "\n";
}

}  // namespace modesheaf
