#include "hyperqsd/foliation.hpp"

#include <string>

namespace hyperqsd {

namespace {

bool finite(const FourVector& v) {
  return std::isfinite(v.t) && std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

void require_subluminal(double beta) {
  if (!std::isfinite(beta) || std::abs(beta) >= 1.0) {
    throw Error(ErrorCode::SuperluminalBeta, "|beta| = " + std::to_string(std::abs(beta)) + " >= 1",
                std::abs(beta));
  }
}

}  // namespace

Hyperplane make_hyperplane(const FourVector& n_raw, double a) {
  if (!finite(n_raw) || !std::isfinite(a)) {
    throw Error(ErrorCode::NonFinite, "hyperplane data must be finite");
  }
  const double nn = minkowski_dot(n_raw, n_raw);
  if (nn <= 0.0) throw Error(ErrorCode::NotTimelike, "n.n = " + std::to_string(nn), nn);
  if (n_raw.t <= 0.0) throw Error(ErrorCode::PastPointing, "n.t = " + std::to_string(n_raw.t), n_raw.t);
  const double s = 1.0 / std::sqrt(nn);
  return Hyperplane({n_raw.t * s, n_raw.x * s, n_raw.y * s, n_raw.z * s}, a);
}

ObserverFrame::ObserverFrame(double beta) : beta_(beta) { require_subluminal(beta); }

FourVector ObserverFrame::normal() const noexcept {
  const double g = gamma();
  return {g, g * beta_, 0.0, 0.0};
}

Hyperplane ObserverFrame::hyperplane(double a) const { return make_hyperplane(normal(), a); }

FourVector frame_normal(double beta) { return ObserverFrame(beta).normal(); }

bool contains_event(const Hyperplane& plane, const FourVector& event, double tol, double c) {
  return std::abs(plane.value_at(event, c) - plane.offset()) <= tol;
}

double coincidence_offset(double ell, double beta, double c) {
  require_subluminal(beta);
  if (!(ell > 0.0) || !std::isfinite(ell)) {
    throw Error(ErrorCode::InvalidArgument, "ell must be positive and finite");
  }
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "c must be positive");
  return ell * beta / c;
}

FourVector coincidence_event(double ell, double beta, double c) {
  return {coincidence_offset(ell, beta, c), ell, 0.0, 0.0};
}

}  // namespace hyperqsd
