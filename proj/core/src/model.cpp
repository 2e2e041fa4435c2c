// SPDX-License-Identifier: Apache-2.0
#include "nsgda/model.hpp"

#include <cmath>
#include <limits>

namespace nsgda {

ActivationSpec::ActivationSpec(ActivationKind kind, int d, Vec lo, Vec hi)
    : kind_(kind), dim_(d), lo_(std::move(lo)), hi_(std::move(hi)) {
  require_dim(d);
}

ActivationSpec ActivationSpec::relu(int d) { return {ActivationKind::ReLU, d, Vec(), Vec()}; }

ActivationSpec ActivationSpec::sigmoid(int d) { return {ActivationKind::Sigmoid, d, Vec(), Vec()}; }

ActivationSpec ActivationSpec::identity_on_box(Vec lo, Vec hi) {
  if (lo.size() != hi.size()) throw ConfigError("identity_on_box: lo/hi dimension mismatch");
  if (!lo.allFinite() || !hi.allFinite()) throw ConfigError("identity_on_box: bounds must be finite");
  if (!(lo.array() < hi.array()).all()) throw ConfigError("identity_on_box: requires lo < hi componentwise");
  const auto d = static_cast<int>(lo.size());
  return {ActivationKind::IdentityOnBox, d, std::move(lo), std::move(hi)};
}

std::string ActivationSpec::name() const {
  switch (kind_) {
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::IdentityOnBox: return "identity_on_box";
  }
  return "unknown";
}

void ActivationSpec::check_dim(const Vec& v) const {
  if (v.size() != dim_) throw ConfigError("activation: dimension mismatch");
}

Vec ActivationSpec::forward(const Vec& x) const {
  check_dim(x);
  Vec y = x;
  forward_inplace(y.data());
  return y;
}

void ActivationSpec::forward_inplace(double* x) const noexcept {
  switch (kind_) {
    case ActivationKind::ReLU:
      for (int i = 0; i < dim_; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
      break;
    case ActivationKind::Sigmoid:
      for (int i = 0; i < dim_; ++i) x[i] = 1.0 / (1.0 + std::exp(-x[i]));
      break;
    case ActivationKind::IdentityOnBox:
      break;
  }
}

bool ActivationSpec::in_domain(const double* x) const noexcept {
  switch (kind_) {
    case ActivationKind::ReLU:
      for (int i = 0; i < dim_; ++i)
        if (!(x[i] > 0.0)) return false;
      return true;
    case ActivationKind::Sigmoid:
      for (int i = 0; i < dim_; ++i)
        if (!std::isfinite(x[i])) return false;
      return true;
    case ActivationKind::IdentityOnBox:
      for (int i = 0; i < dim_; ++i)
        if (!(x[i] > lo_[i] && x[i] < hi_[i])) return false;
      return true;
  }
  return false;
}

bool ActivationSpec::in_domain(const Vec& x) const {
  check_dim(x);
  return in_domain(x.data());
}

bool ActivationSpec::in_image(const Vec& y) const {
  check_dim(y);
  if (kind_ == ActivationKind::Sigmoid) return ((y.array() > 0.0) && (y.array() < 1.0)).all();
  return in_domain(y.data());
}

Vec ActivationSpec::inverse(const Vec& y) const {
  if (!in_image(y)) throw OutsideInvertibleRegion("activation inverse: point outside S");
  if (kind_ != ActivationKind::Sigmoid) return y;
  Vec x(dim_);
  for (int i = 0; i < dim_; ++i) x[i] = std::log(y[i]) - std::log1p(-y[i]);
  return x;
}

GeneratorParams::GeneratorParams(Mat w) : w_(std::move(w)) {
  if (w_.rows() != w_.cols()) throw ConfigError("GeneratorParams: W must be square");
  require_dim(static_cast<int>(w_.rows()));
  require_finite(w_, "GeneratorParams");
  Eigen::JacobiSVD<Mat> svd(w_);
  const Vec& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0) || s(0) / smin > kMaxGeneratorCondition)
    throw Singular("GeneratorParams: W is singular or cond(W) > 1e8");
}

GeneratorParams GeneratorParams::identity(int d) { return GeneratorParams(Mat::Identity(d, d)); }

double closeness(const SymMat& sigma) {
  const int d = sigma.dim();
  const Mat id = Mat::Identity(d, d);
  return std::max((sigma.matrix() - id).norm(), (inverse(sigma.matrix()) - id).norm());
}

TargetSpec::TargetSpec(SymMat sigma_star, ActivationSpec activation, double closeness_c)
    : sigma_(std::move(sigma_star)), act_(std::move(activation)), c_(closeness_c) {
  require_dim(sigma_.dim());
  if (act_.dim() != sigma_.dim()) throw ConfigError("TargetSpec: activation dimension mismatch");
  if (!(c_ > 0.0) || !std::isfinite(c_)) throw ConfigError("TargetSpec: closeness_c must be positive");
  require_finite(sigma_.matrix(), "TargetSpec sigma_star");
  try {
    cholesky(sigma_);
  } catch (const NotPositiveDefinite&) {
    throw ConfigError("TargetSpec: sigma_star is not positive definite");
  }
  sqrt_ = sym_sqrt(sigma_);
  inv_ = inverse(sigma_.matrix());
  const double measured = closeness(sigma_);
  if (measured > c_ * (1.0 + 1e-12))
    throw ConfigError("TargetSpec: closeness " + std::to_string(measured) + " exceeds c = " +
                      std::to_string(c_));
}

void to_json(nlohmann::json& j, const ActivationSpec& a) {
  j = nlohmann::json{{"kind", a.name()}};
  if (a.kind() == ActivationKind::IdentityOnBox) {
    j["lo"] = std::vector<double>(a.lower().begin(), a.lower().end());
    j["hi"] = std::vector<double>(a.upper().begin(), a.upper().end());
  }
}

ActivationSpec activation_from_json(const nlohmann::json& j, int dim) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "relu") return ActivationSpec::relu(dim);
  if (kind == "sigmoid") return ActivationSpec::sigmoid(dim);
  if (kind == "identity_on_box") {
    const auto lo = j.at("lo").get<std::vector<double>>();
    const auto hi = j.at("hi").get<std::vector<double>>();
    if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim)
      throw ConfigError("identity_on_box: bounds must have `dim` entries");
    return ActivationSpec::identity_on_box(Eigen::Map<const Vec>(lo.data(), dim),
                                           Eigen::Map<const Vec>(hi.data(), dim));
  }
  throw ConfigError("unknown activation kind '" + kind + "'");
}

void to_json(nlohmann::json& j, const TargetSpec& t) {
  const int d = t.dim();
  std::vector<double> rows(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) rows[static_cast<std::size_t>(i) * d + k] = t.sigma_star()(i, k);
  j = nlohmann::json{{"dim", d},
                     {"activation", t.activation()},
                     {"sigma_star", rows},
                     {"closeness_c", t.closeness_c()}};
}

TargetSpec target_from_json(const nlohmann::json& j) {
  try {
    const int d = j.at("dim").get<int>();
    require_dim(d);
    const auto rows = j.at("sigma_star").get<std::vector<double>>();
    if (rows.size() != static_cast<std::size_t>(d) * d)
      throw ConfigError("sigma_star must hold dim*dim row-major entries");
    Mat s(d, d);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) s(i, k) = rows[static_cast<std::size_t>(i) * d + k];
    if (!s.isApprox(s.transpose(), 1e-12)) throw ConfigError("sigma_star must be symmetric");
    return TargetSpec(SymMat(s), activation_from_json(j.at("activation"), d),
                      j.at("closeness_c").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("target json: ") + e.what());
  }
}

GeneratorSample sample_p(const Mat& w, const ActivationSpec& act, RngStream& rng) {
  const auto d = static_cast<int>(w.rows());
  GeneratorSample s;
  s.z = sample_std_normal(rng, d);
  s.x = w * s.z;
  act.forward_inplace(s.x.data());
  return s;
}

Vec sample_target(const TargetSpec& target, RngStream& rng) {
  return sample_p(target.sigma_sqrt().matrix(), target.activation(), rng).x;
}

std::vector<Vec> sample_target(const TargetSpec& target, int n, RngStream& rng) {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(sample_target(target, rng));
  return out;
}

Estimate estimate_mass_T(const Mat& w, const ActivationSpec& act, int n, RngStream& rng) {
  if (n < 1) throw ConfigError("estimate_mass_T: n must be positive");
  const auto d = static_cast<int>(w.rows());
  Vec z(d);
  Vec x(d);
  long hits = 0;
  for (int i = 0; i < n; ++i) {
    fill_std_normal(rng, z.data(), d);
    x.noalias() = w * z;
    hits += act.in_domain(x.data()) ? 1 : 0;
  }
  const double p = static_cast<double>(hits) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

Mat Preconditioner::initial_weights() const { return sym_sqrt(covariance).matrix(); }

Preconditioner precondition(std::span<const Vec> samples, const ActivationSpec& act) {
  const int d = act.dim();
  Mat second = Mat::Zero(d, d);
  int in = 0;
  for (const Vec& y : samples) {
    if (y.size() != d) throw ConfigError("precondition: sample dimension mismatch");
    if (!act.in_image(y)) continue;
    const Vec u = act.inverse(y);
    second.noalias() += u * u.transpose();
    ++in;
  }
  if (in < d)
    throw InsufficientInRegionSamples("precondition: " + std::to_string(in) +
                                      " in-region samples, need at least " + std::to_string(d));
  Preconditioner out;
  out.covariance = SymMat(second / in);
  out.transform = sym_inv_sqrt(out.covariance).matrix();
  out.in_region = in;
  out.in_region_fraction = static_cast<double>(in) / static_cast<double>(samples.size());
  return out;
}

}  // namespace nsgda
