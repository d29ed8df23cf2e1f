#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace drsgk {

class RngStream;

//---------------------------------------------------------------------------//
// Errors
//---------------------------------------------------------------------------//

/// Invalid argument to a numerical routine (out-of-range probability, count...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inconsistent configuration (gatekeeper parameters, scenario files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state became non-finite during propagation.
class NumericalDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//---------------------------------------------------------------------------//
// Small fixed-capacity vectors
//---------------------------------------------------------------------------//

inline constexpr std::size_t kMaxDim = 16;

/*!
 * Inline-storage real vector with a runtime length of at most kMaxDim.
 *
 * The tag parameter makes states, controls, noise and unsafe-set parameters
 * distinct types. Storage lives inside the object so the rollout inner loop
 * never touches the heap.
 */
template <class Tag>
class FixedVector {
 public:
  FixedVector() = default;

  explicit FixedVector(std::size_t size, double fill = 0.0) : size_(size) {
    if (size > kMaxDim) {
      throw DomainError("vector dimension " + std::to_string(size) +
                        " exceeds capacity " + std::to_string(kMaxDim));
    }
    std::fill_n(data_.begin(), size_, fill);
  }

  FixedVector(std::initializer_list<double> values)
      : FixedVector(std::span<const double>(values.begin(), values.size())) {}

  explicit FixedVector(std::span<const double> values)
      : FixedVector(values.size()) {
    std::copy(values.begin(), values.end(), data_.begin());
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* begin() { return data_.data(); }
  double* end() { return data_.data() + size_; }
  const double* begin() const { return data_.data(); }
  const double* end() const { return data_.data() + size_; }

  std::span<double> span() { return {data_.data(), size_}; }
  std::span<const double> span() const { return {data_.data(), size_}; }

  bool all_finite() const {
    return std::all_of(begin(), end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const FixedVector& a, const FixedVector& b) {
    return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
  }

 private:
  std::array<double, kMaxDim> data_{};
  std::size_t size_ = 0;
};

struct StateTag;
struct ControlTag;
struct NoiseTag;
struct ParamTag;

using StateVector = FixedVector<StateTag>;
using ControlVector = FixedVector<ControlTag>;
using NoiseVector = FixedVector<NoiseTag>;
using ParamVector = FixedVector<ParamTag>;

/// Sampled unsafe-set parameters; nullopt means the geometry is known exactly.
using ThetaHypothesis = std::optional<ParamVector>;

/// Component-wise box on controls.
struct ControlBounds {
  ControlVector lower;
  ControlVector upper;

  ControlVector clamp(ControlVector u) const {
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = std::clamp(u[i], lower[i], upper[i]);
    }
    return u;
  }

  bool contains(const ControlVector& u) const {
    if (u.size() != lower.size()) return false;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!(u[i] >= lower[i] && u[i] <= upper[i])) return false;
    }
    return true;
  }
};

//---------------------------------------------------------------------------//
// Interfaces
//---------------------------------------------------------------------------//

/// Feedback policy. Implementations must be pure and clamp into their bounds.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual ControlVector act(const StateVector& x) const = 0;
};

/// Process-noise distribution, possibly conditioned on (x, u).
class NoiseSampler {
 public:
  virtual ~NoiseSampler() = default;
  virtual std::size_t dim() const = 0;
  virtual NoiseVector sample(const StateVector& x, const ControlVector& u,
                             RngStream& stream) const = 0;
};

/// Perception channel producing unsafe-set parameter hypotheses.
class ThetaSampler {
 public:
  virtual ~ThetaSampler() = default;
  virtual std::size_t dim() const = 0;
  virtual ThetaHypothesis sample(const StateVector& x, RngStream& stream) const = 0;
};

/// Point mass at "exact geometry"; contributes no coordinates to the noise.
class ExactTheta final : public ThetaSampler {
 public:
  std::size_t dim() const override { return 0; }
  ThetaHypothesis sample(const StateVector&, RngStream&) const override {
    return std::nullopt;
  }
};

/// Discrete-time dynamics x' = f(x, u, w).
class SystemModel {
 public:
  virtual ~SystemModel() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t control_dim() const = 0;
  virtual std::size_t noise_dim() const = 0;
  virtual double dt() const = 0;
  virtual StateVector step(const StateVector& x, const ControlVector& u,
                           const NoiseVector& w) const = 0;
};

/*!
 * Safety specification.
 *
 * stage_margin >= 0 iff the state is in the safe set for the given parameter
 * hypothesis; terminal_margin >= 0 iff the state is in the backup's invariant
 * set. alpha is the backup's invariance failure budget.
 */
class SafetySpec {
 public:
  explicit SafetySpec(double alpha = 0.0) : alpha_(alpha) {}
  virtual ~SafetySpec() = default;

  virtual double stage_margin(const StateVector& x,
                              const ThetaHypothesis& theta) const = 0;
  virtual double terminal_margin(const StateVector& x) const = 0;

  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

//---------------------------------------------------------------------------//
// Switched policy
//---------------------------------------------------------------------------//

/// Nominal before switch_step, backup from switch_step on.
class SwitchedPolicy {
 public:
  SwitchedPolicy(const Policy& nominal, const Policy& backup, long switch_step)
      : nominal_(&nominal), backup_(&backup), switch_step_(switch_step) {}

  bool uses_backup(long t) const { return t >= switch_step_; }

  ControlVector act(const StateVector& x, long t) const {
    return uses_backup(t) ? backup_->act(x) : nominal_->act(x);
  }

  long switch_step() const { return switch_step_; }
  const Policy& nominal() const { return *nominal_; }
  const Policy& backup() const { return *backup_; }

 private:
  const Policy* nominal_;
  const Policy* backup_;
  long switch_step_;
};

inline ControlVector switched_act(const SwitchedPolicy& policy,
                                  const StateVector& x, long t) {
  if (t < 0) throw DomainError("switched_act: negative time index");
  return policy.act(x, t);
}

}  // namespace drsgk
