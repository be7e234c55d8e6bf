#pragma once

// Shared small utilities: error types, compensated summation, hashing,
// deterministic RNG plumbing, and number formatting for artifacts.

#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbmm {

// ---------------------------------------------------------------------------
// Error types. These are thrown for contract violations that callers are
// expected to either prevent or handle; numerical non-convergence is reported
// through result structs instead (see solver.hpp).

struct OutsideTubularNeighborhood : std::runtime_error {
  explicit OutsideTubularNeighborhood(const std::string& what)
      : std::runtime_error(what) {}
};

struct NotTangent : std::runtime_error {
  explicit NotTangent(const std::string& what) : std::runtime_error(what) {}
};

struct EnergyGateExceeded : std::runtime_error {
  explicit EnergyGateExceeded(const std::string& what)
      : std::runtime_error(what) {}
};

struct BallsNotDisjoint : std::runtime_error {
  explicit BallsNotDisjoint(const std::string& what)
      : std::runtime_error(what) {}
};

struct TraceMismatch : std::runtime_error {
  explicit TraceMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NotApproxHarmonic : std::runtime_error {
  explicit NotApproxHarmonic(const std::string& what)
      : std::runtime_error(what) {}
};

struct GateViolation : std::runtime_error {
  explicit GateViolation(const std::string& what) : std::runtime_error(what) {}
};

struct CoverFailure : std::runtime_error {
  explicit CoverFailure(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Compensated (Kahan) summation. Energy totals are differences of many
// per-edge terms; plain accumulation loses the low bits we later compare
// against 1e-12 scale margins.

class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }
  void reset() { s_ = 0.0; c_ = 0.0; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

inline double kahan_total(const std::vector<double>& terms) {
  KahanSum k;
  for (double t : terms) k.add(t);
  return k.value();
}

// ---------------------------------------------------------------------------
// FNV-1a 64-bit hash, used to fingerprint configs and artifact payloads in
// manifests. Stable across platforms, not cryptographic.

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t seed = 1469598103934665603ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<std::uint64_t>(p[i]);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

// ---------------------------------------------------------------------------
// RNG. All stochastic pieces (ball sampling, varifold test directions) take
// an explicit engine seeded from the run config so artifacts are reproducible.

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Number formatting. %.17g round-trips IEEE doubles exactly; every number
// that lands in an artifact goes through here so byte-identity across runs
// only depends on the computed values.

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

inline double sqr(double x) { return x * x; }

}  // namespace fbmm
