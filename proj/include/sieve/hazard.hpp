#pragma once

// Distributions of the stick-breaking factor H on (0,1), their mixed moments
// mu_{i,j} = E[H^i (1-H)^j], the log-spacing mean E[-log(1-H)], and samplers
// for H and for the stationary delay of the renewal process whose spacings
// are -log(1-H).
//
// Infinity is a legal value for moments that diverge (j = -1 with a light
// left tail of 1-H); it is returned as a genuine IEEE infinity.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "numeric.hpp"
#include "rng.hpp"

namespace sieve {

enum class HazardKind { gem, beta, atoms };

class HazardModel {
 public:
  // H ~ beta(1, theta); survival P(H > u) = (1-u)^theta
  static HazardModel gem(double theta, bool nonlattice = true) {
    if (!(theta > 0) || !std::isfinite(theta))
      throw std::invalid_argument("HazardModel::gem: theta must be positive and finite");
    HazardModel m;
    m.kind_ = HazardKind::gem;
    m.a_ = 1.0;
    m.b_ = theta;
    m.nonlattice_ = nonlattice;
    return m;
  }

  static HazardModel beta(double a, double b, bool nonlattice = true) {
    if (!(a > 0) || !(b > 0) || !std::isfinite(a) || !std::isfinite(b))
      throw std::invalid_argument("HazardModel::beta: parameters must be positive and finite");
    HazardModel m;
    m.kind_ = HazardKind::beta;
    m.a_ = a;
    m.b_ = b;
    m.nonlattice_ = nonlattice;
    return m;
  }

  static HazardModel atoms(std::vector<double> values, std::vector<double> weights,
                           bool nonlattice = false) {
    if (values.empty() || values.size() != weights.size())
      throw std::invalid_argument("HazardModel::atoms: values/weights size mismatch");
    double total = 0.0;
    int support = 0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!(values[k] > 0.0) || !(values[k] < 1.0))
        throw std::invalid_argument("HazardModel::atoms: atoms must lie strictly inside (0,1)");
      if (weights[k] < 0.0) throw std::invalid_argument("HazardModel::atoms: negative weight");
      total += weights[k];
      if (weights[k] > 0.0) ++support;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("HazardModel::atoms: weights must sum to 1 within 1e-12");
    HazardModel m;
    m.kind_ = HazardKind::atoms;
    m.atoms_ = std::move(values);
    m.weights_ = std::move(weights);
    // a single effective atom makes -log(1-H) degenerate, hence lattice
    m.nonlattice_ = (support == 1) ? false : nonlattice;
    return m;
  }

  HazardKind kind() const { return kind_; }
  double theta() const {
    require(HazardKind::gem);
    return b_;
  }
  double beta_a() const {
    require(HazardKind::beta);
    return a_;
  }
  double beta_b() const {
    require(HazardKind::beta);
    return b_;
  }
  const std::vector<double>& atom_values() const {
    require(HazardKind::atoms);
    return atoms_;
  }
  const std::vector<double>& atom_weights() const {
    require(HazardKind::atoms);
    return weights_;
  }
  bool declared_nonlattice() const { return nonlattice_; }
  bool is_continuous() const { return kind_ != HazardKind::atoms; }

  // shape parameters of the beta family; gem(theta) is beta(1, theta)
  double shape_a() const { return a_; }
  double shape_b() const { return b_; }

  // P(H > u)
  double survival(double u) const {
    if (u <= 0.0) return 1.0;
    if (u >= 1.0) return 0.0;
    switch (kind_) {
      case HazardKind::gem:
        return std::exp(b_ * std::log1p(-u));
      case HazardKind::beta:
        return boost::math::ibetac(a_, b_, u);
      case HazardKind::atoms: {
        double s = 0.0;
        for (std::size_t k = 0; k < atoms_.size(); ++k)
          if (atoms_[k] > u) s += weights_[k];
        return s;
      }
    }
    return 0.0;
  }

  // P(-log(1-H) > s); evaluated through exp(-s) so large s stays accurate
  double spacing_survival(double s) const {
    if (s <= 0.0) return 1.0;
    double z = std::exp(-s);  // = 1-u
    switch (kind_) {
      case HazardKind::gem:
        return std::pow(z, b_);
      case HazardKind::beta:
        return reg_inc_beta(b_, a_, z);
      case HazardKind::atoms: {
        double acc = 0.0;
        for (std::size_t k = 0; k < atoms_.size(); ++k)
          if (-std::log1p(-atoms_[k]) > s) acc += weights_[k];
        return acc;
      }
    }
    return 0.0;
  }

  // density of -log(1-H) at s, continuous kinds only: u^{a-1} e^{-b s} / B(a,b)
  // with u = 1 - e^{-s}
  double spacing_density(double s) const {
    if (!is_continuous())
      throw std::logic_error("spacing_density: discrete hazard has no density");
    if (s <= 0.0) return 0.0;
    double logu = std::log(-std::expm1(-s));
    double shape_term = (a_ == 1.0) ? 0.0 : (a_ - 1.0) * logu;
    return std::exp(shape_term - b_ * s -
                    (std::lgamma(a_) + std::lgamma(b_) - std::lgamma(a_ + b_)));
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    switch (kind_) {
      case HazardKind::gem:
        j["kind"] = "gem";
        j["theta"] = b_;
        break;
      case HazardKind::beta:
        j["kind"] = "beta";
        j["a"] = a_;
        j["b"] = b_;
        break;
      case HazardKind::atoms:
        j["kind"] = "atoms";
        j["atoms"] = atoms_;
        j["weights"] = weights_;
        break;
    }
    j["nonlattice"] = nonlattice_;
    return j;
  }

  static HazardModel from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    bool nonlat = j.value("nonlattice", true);
    if (kind == "gem") return gem(j.at("theta").get<double>(), nonlat);
    if (kind == "beta") return beta(j.at("a").get<double>(), j.at("b").get<double>(), nonlat);
    if (kind == "atoms")
      return atoms(j.at("atoms").get<std::vector<double>>(),
                   j.at("weights").get<std::vector<double>>(), j.value("nonlattice", false));
    throw std::invalid_argument("HazardModel::from_json: unknown kind '" + kind + "'");
  }

 private:
  void require(HazardKind k) const {
    if (kind_ != k) throw std::logic_error("HazardModel: parameter access for wrong kind");
  }
  HazardKind kind_ = HazardKind::gem;
  double a_ = 1.0;
  double b_ = 1.0;
  std::vector<double> atoms_;
  std::vector<double> weights_;
  bool nonlattice_ = true;
};

struct MixedMoment {
  long long i = 0;
  long long j = 0;
  double value = 0.0;
};

namespace detail {

// mu_{i,j} for the beta(a,b) family: B(a+i, b+j)/B(a,b). Ratio products for
// small indices (more accurate), lgamma beyond. j = -1 allowed when b > 1.
inline double beta_mu(double a, double b, long long i, long long j) {
  if (j == -1) {
    if (!(b > 1.0)) return kInf;
    return std::exp(std::lgamma(a + static_cast<double>(i)) - std::lgamma(a) + std::lgamma(b - 1.0) -
                    std::lgamma(b) + std::lgamma(a + b) -
                    std::lgamma(a + b + static_cast<double>(i) - 1.0));
  }
  if (i + j <= 256) {
    double r = 1.0;
    for (long long t = 0; t < i; ++t) r *= (a + static_cast<double>(t)) / (a + b + static_cast<double>(t));
    for (long long s = 0; s < j; ++s)
      r *= (b + static_cast<double>(s)) / (a + b + static_cast<double>(i + s));
    return r;
  }
  return std::exp(log_pochhammer(a, i) + log_pochhammer(b, j) - log_pochhammer(a + b, i + j));
}

inline double beta_log_mu(double a, double b, long long i, long long j) {
  return log_pochhammer(a, i) + log_pochhammer(b, j) - log_pochhammer(a + b, i + j);
}

}  // namespace detail

// mu_{i,j} = E[H^i (1-H)^j]; i >= 0, j >= -1; +inf when the integral diverges
inline double mu_moment(const HazardModel& model, long long i, long long j) {
  if (i < 0) throw std::invalid_argument("mu_moment: i must be nonnegative");
  if (j < -1) throw std::invalid_argument("mu_moment: j must be >= -1");
  if (i == 0 && j == 0) return 1.0;
  switch (model.kind()) {
    case HazardKind::gem:
    case HazardKind::beta:
      return detail::beta_mu(model.shape_a(), model.shape_b(), i, j);
    case HazardKind::atoms: {
      const auto& h = model.atom_values();
      const auto& w = model.atom_weights();
      double s = 0.0;
      for (std::size_t k = 0; k < h.size(); ++k) {
        if (w[k] == 0.0) continue;
        s += w[k] * std::exp(static_cast<double>(i) * std::log(h[k]) +
                             static_cast<double>(j) * std::log1p(-h[k]));
      }
      return s;
    }
  }
  return 0.0;
}

// log mu_{i,j} for j >= 0; used where products of many moments underflow
inline double log_mu_moment(const HazardModel& model, long long i, long long j) {
  if (i < 0 || j < 0) throw std::invalid_argument("log_mu_moment: indices must be nonnegative");
  if (i == 0 && j == 0) return 0.0;
  switch (model.kind()) {
    case HazardKind::gem:
    case HazardKind::beta:
      return detail::beta_log_mu(model.shape_a(), model.shape_b(), i, j);
    case HazardKind::atoms: {
      const auto& h = model.atom_values();
      const auto& w = model.atom_weights();
      double best = -kInf;
      std::vector<double> terms;
      terms.reserve(h.size());
      for (std::size_t k = 0; k < h.size(); ++k) {
        if (w[k] == 0.0) continue;
        double t = std::log(w[k]) + static_cast<double>(i) * std::log(h[k]) +
                   static_cast<double>(j) * std::log1p(-h[k]);
        terms.push_back(t);
        best = std::max(best, t);
      }
      if (terms.empty() || best == -kInf) return -kInf;
      double s = 0.0;
      for (double t : terms) s += std::exp(t - best);
      return best + std::log(s);
    }
  }
  return -kInf;
}

// mu_log = E[-log(1-H)]; 1/theta for gem, psi(a+b) - psi(b) for beta
inline double mu_log(const HazardModel& model) {
  switch (model.kind()) {
    case HazardKind::gem:
      return 1.0 / model.theta();
    case HazardKind::beta:
      return digamma(model.shape_a() + model.shape_b()) - digamma(model.shape_b());
    case HazardKind::atoms: {
      double s = 0.0;
      const auto& h = model.atom_values();
      const auto& w = model.atom_weights();
      for (std::size_t k = 0; k < h.size(); ++k) s += -w[k] * std::log1p(-h[k]);
      return s;
    }
  }
  return kNaN;
}

// E[-log H]; drives the limit mean of the empty-box count
inline double mu_log_h(const HazardModel& model) {
  switch (model.kind()) {
    case HazardKind::gem:
    case HazardKind::beta:
      return digamma(model.shape_a() + model.shape_b()) - digamma(model.shape_a());
    case HazardKind::atoms: {
      double s = 0.0;
      const auto& h = model.atom_values();
      const auto& w = model.atom_weights();
      for (std::size_t k = 0; k < h.size(); ++k) s += -w[k] * std::log(h[k]);
      return s;
    }
  }
  return kNaN;
}

inline double sample_hazard(const HazardModel& model, Rng& rng) {
  switch (model.kind()) {
    case HazardKind::gem:
      return -std::expm1(std::log(rng.uniform01()) / model.theta());
    case HazardKind::beta: {
      double a = model.beta_a(), b = model.beta_b();
      if (a == 1.0) return -std::expm1(std::log(rng.uniform01()) / b);
      if (b == 1.0) return std::exp(std::log(rng.uniform01()) / a);
      for (;;) {
        double h = rng.beta(a, b);
        if (h > 0.0 && h < 1.0) return h;
      }
    }
    case HazardKind::atoms: {
      double u = rng.uniform01();
      const auto& w = model.atom_weights();
      double acc = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        acc += w[k];
        if (u <= acc) return model.atom_values()[k];
      }
      return model.atom_values().back();
    }
  }
  return 0.5;
}

// one spacing -log(1-H) of the induced renewal process
inline double sample_log_spacing(const HazardModel& model, Rng& rng) {
  if (model.kind() == HazardKind::gem) return rng.exponential(model.theta());
  return -std::log1p(-sample_hazard(model, rng));
}

// Draw from the stationary delay density P(-log(1-H) > s)/mu_log via the
// size-bias-then-uniform identity: a length-biased spacing scaled by an
// independent uniform. Length-biasing is exact for gem (Gamma(2,theta)) and
// atoms (reweighting), and uses rejection against a beta(a, b/2) proposal for
// general beta hazards.
inline double sample_stationary_delay(const HazardModel& model, Rng& rng) {
  double ml = mu_log(model);
  if (!std::isfinite(ml))
    throw std::domain_error("sample_stationary_delay: mu_log is infinite");
  switch (model.kind()) {
    case HazardKind::gem: {
      double biased = (rng.exponential() + rng.exponential()) / model.theta();
      return rng.uniform01() * biased;
    }
    case HazardKind::beta: {
      double a = model.beta_a(), b = model.beta_b();
      double bound = 2.0 / (b * 2.718281828459045235360287471353);
      for (;;) {
        double v = rng.beta(a, b / 2.0);
        if (!(v > 0.0 && v < 1.0)) continue;
        double spacing = -std::log1p(-v);
        double weight = spacing * std::exp(0.5 * b * std::log1p(-v));
        if (rng.uniform01() * bound <= weight) return rng.uniform01() * spacing;
      }
    }
    case HazardKind::atoms: {
      const auto& h = model.atom_values();
      const auto& w = model.atom_weights();
      double u = rng.uniform01() * ml;  // ml = sum w_k * x_k
      double acc = 0.0;
      for (std::size_t k = 0; k < h.size(); ++k) {
        double x = -std::log1p(-h[k]);
        acc += w[k] * x;
        if (u <= acc) return rng.uniform01() * x;
      }
      return rng.uniform01() * -std::log1p(-h.back());
    }
  }
  return 0.0;
}

}  // namespace sieve
