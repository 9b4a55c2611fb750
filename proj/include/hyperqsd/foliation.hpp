#pragma once

// Flat space-like hyperplanes of Minkowski space, signature (+,-,-,-).
//
// Events carry t in time units and x, y, z in length units; hyperplane normals
// are dimensionless. A hyperplane (n, a) is the set of events with
//   n_t t - (n_x x + n_y y + n_z z) / c = a,
// so the offset a is the time coordinate the observer with 4-velocity n
// assigns to the plane. With c = 1 this is the usual n.x = a.

#include <algorithm>
#include <cmath>

#include "hyperqsd/error.hpp"

namespace hyperqsd {

inline constexpr double kDefaultLightSpeed = 1.0;
inline constexpr double kNormalTol = 1e-12;

struct FourVector {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const FourVector&, const FourVector&) = default;
};

/// Minkowski product of two dimensionless four-vectors.
constexpr double minkowski_dot(const FourVector& u, const FourVector& v) noexcept {
  return u.t * v.t - u.x * v.x - u.y * v.y - u.z * v.z;
}

class Hyperplane {
 public:
  const FourVector& normal() const noexcept { return n_; }
  double offset() const noexcept { return a_; }

  /// n_t t - n_s . x / c
  double value_at(const FourVector& event, double c = kDefaultLightSpeed) const noexcept {
    return n_.t * event.t - (n_.x * event.x + n_.y * event.y + n_.z * event.z) / c;
  }

 private:
  friend Hyperplane make_hyperplane(const FourVector&, double);
  Hyperplane(FourVector n, double a) : n_(n), a_(a) {}
  FourVector n_;
  double a_;
};

/// Rescales n_raw to unit Minkowski norm. Throws NotTimelike (n.n <= 0),
/// PastPointing (n.t <= 0) or NonFinite.
Hyperplane make_hyperplane(const FourVector& n_raw, double a);

/// Rest frame of an observer moving with velocity beta = v/c along +x.
class ObserverFrame {
 public:
  explicit ObserverFrame(double beta);
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return 1.0 / std::sqrt(1.0 - beta_ * beta_); }
  double rapidity() const noexcept { return std::atanh(beta_); }
  FourVector normal() const noexcept;
  Hyperplane hyperplane(double a) const;

 private:
  double beta_;
};

/// gamma (1, beta, 0, 0). Throws SuperluminalBeta for |beta| >= 1.
FourVector frame_normal(double beta);

/// |value_at(x) - a| <= tol
bool contains_event(const Hyperplane& plane, const FourVector& event, double tol,
                    double c = kDefaultLightSpeed);

/// Membership tolerance scaled to the coordinate magnitude of `event`.
inline double event_tolerance(const FourVector& event, double base = 1e-9) {
  const double scale = std::max({1.0, std::abs(event.t), std::abs(event.x), std::abs(event.y),
                                 std::abs(event.z)});
  return base * scale;
}

/// R-frame offset a0 = ell beta / c of the event where the moving observer's
/// a = 0 hyperplane crosses the worldline x = ell.
double coincidence_offset(double ell, double beta, double c = kDefaultLightSpeed);

/// The event (a0, ell, 0, 0) shared by (n0, a0) and (n_beta, 0).
FourVector coincidence_event(double ell, double beta, double c = kDefaultLightSpeed);

}  // namespace hyperqsd
