#include "mvspec/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mvspec/error.hpp"

namespace mvspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Standardized GIG: density proportional to x^{lambda-1} exp(-omega/2 (x + 1/x)),
// lambda >= 0, omega > 0.
struct StandardGig {
  double lambda;
  double omega;

  double log_g(double x) const { return (lambda - 1.0) * std::log(x) - 0.5 * omega * (x + 1.0 / x); }

  double mode() const {
    if (lambda >= 1.0) return ((lambda - 1.0) + std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega)) / omega;
    return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
  }

  // Ratio-of-uniforms, rectangle anchored at the origin.
  double rou_plain(Rng& rng) const {
    const double m = mode();
    const double log_gm = log_g(m);
    const double x_max = ((1.0 + lambda) + std::sqrt((1.0 + lambda) * (1.0 + lambda) + omega * omega)) / omega;
    const double u_max = x_max * std::exp(0.5 * (log_g(x_max) - log_gm));
    while (true) {
      const double u = u_max * uniform01(rng);
      const double v = uniform01(rng);
      if (v <= 0.0) continue;
      const double x = u / v;
      if (x <= 0.0) continue;
      if (2.0 * std::log(v) <= log_g(x) - log_gm) return x;
    }
  }

  // Ratio-of-uniforms with the rectangle centred on the mode. The u-bounds
  // are the extrema of (x - m) sqrt(g(x)), the two positive roots of
  // x^3 + c2 x^2 + c1 x + c0 = 0.
  double rou_mode_shift(Rng& rng) const {
    const double m = mode();
    const double log_gm = log_g(m);
    const double c2 = -(2.0 * (lambda + 1.0) / omega + m);
    const double c1 = 2.0 * (lambda - 1.0) * m / omega - 1.0;
    const double c0 = m;
    const double p = c1 - c2 * c2 / 3.0;
    const double q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    const double arg = std::clamp(-q / (2.0 * std::sqrt(-p * p * p / 27.0)), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double x_hi = r * std::cos(phi) - c2 / 3.0;
    const double x_lo = std::max(r * std::cos(phi + 4.0 * std::numbers::pi / 3.0) - c2 / 3.0, 0.0);
    const double u_hi = (x_hi - m) * std::exp(0.5 * (log_g(x_hi) - log_gm));
    const double u_lo = x_lo > 0.0 ? (x_lo - m) * std::exp(0.5 * (log_g(x_lo) - log_gm)) : -m;
    while (true) {
      const double u = u_lo + (u_hi - u_lo) * uniform01(rng);
      const double v = uniform01(rng);
      if (v <= 0.0) continue;
      const double x = u / v + m;
      if (x <= 0.0) continue;
      if (2.0 * std::log(v) <= log_g(x) - log_gm) return x;
    }
  }

  // Three-piece envelope for lambda < 1 and small omega, where the density
  // is not T-concave: constant on (0, x0), power law on (x0, 2/omega),
  // exponential tail beyond.
  double piecewise(Rng& rng) const {
    const double m = mode();
    const double x0 = omega / (1.0 - lambda);
    const double xs = std::max(x0, 2.0 / omega);
    const double k1 = std::exp(log_g(m));
    const double a1 = k1 * x0;
    double k2 = 0.0, a2 = 0.0;
    if (x0 < 2.0 / omega) {
      k2 = std::exp(-omega);
      a2 = lambda > 0.0 ? k2 * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda)) / lambda
                        : k2 * std::log(2.0 / (omega * omega));
    }
    const double k3 = std::pow(xs, lambda - 1.0);
    const double a3 = 2.0 * k3 * std::exp(-xs * omega / 2.0) / omega;
    const double total = a1 + a2 + a3;
    while (true) {
      const double u = uniform01(rng);
      double v = total * uniform01(rng);
      double x, hx;
      if (v <= a1) {
        x = x0 * v / a1;
        hx = k1;
      } else if (v <= a1 + a2) {
        v -= a1;
        x = lambda > 0.0 ? std::pow(std::pow(x0, lambda) + v * lambda / k2, 1.0 / lambda)
                         : omega * std::exp(v * std::exp(omega));
        hx = k2 * std::pow(x, lambda - 1.0);
      } else {
        v -= a1 + a2;
        x = -2.0 / omega * std::log(std::exp(-xs * omega / 2.0) - v * omega / (2.0 * k3));
        hx = k3 * std::exp(-x * omega / 2.0);
      }
      if (x > 0.0 && u * hx <= std::exp(log_g(x))) return x;
    }
  }

  double sample(Rng& rng) const {
    if (lambda > 2.0 || omega > 3.0) return rou_mode_shift(rng);
    if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) return rou_plain(rng);
    return piecewise(rng);
  }
};

}  // namespace

double sample_gamma(double shape, double rate, Rng& rng) {
  return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

double InverseGamma::log_pdf(double x) const {
  if (!(x > 0.0)) return -kInf;
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double InverseGamma::sample(Rng& rng) const {
  if (!(shape > 0.0 && rate > 0.0)) throw InputError("inverse gamma requires positive shape and rate");
  return 1.0 / sample_gamma(shape, rate, rng);
}

double GeneralizedInverseGaussian::log_kernel(double x) const {
  if (!(x > 0.0)) return -kInf;
  return (p - 1.0) * std::log(x) - 0.5 * (a * x + b / x);
}

double GeneralizedInverseGaussian::mode() const {
  if (a == 0.0) return b / (2.0 * (1.0 - p));
  return ((p - 1.0) + std::sqrt((p - 1.0) * (p - 1.0) + a * b)) / a;
}

double GeneralizedInverseGaussian::sample(Rng& rng) const {
  if (a < 0.0 || b < 0.0 || (a == 0.0 && b == 0.0)) throw InputError("GIG requires a, b >= 0, not both zero");
  if (a == 0.0) {
    if (!(p < 0.0)) throw InputError("GIG with a = 0 requires p < 0");
    return InverseGamma{-p, b / 2.0}.sample(rng);
  }
  if (b == 0.0) {
    if (!(p > 0.0)) throw InputError("GIG with b = 0 requires p > 0");
    return sample_gamma(p, a / 2.0, rng);
  }
  const StandardGig std_gig{std::abs(p), std::sqrt(a * b)};
  const double x = std_gig.sample(rng);
  return (p < 0.0 ? 1.0 / x : x) * std::sqrt(b / a);
}

DiscreteDistribution DiscreteDistribution::from_log_mass(int first, const Eigen::VectorXd& log_mass) {
  if (log_mass.size() == 0) throw InputError("discrete distribution needs at least one support point");
  const double top = log_mass.maxCoeff();
  if (!std::isfinite(top)) throw NumericalError("discrete distribution has no finite mass");
  Eigen::VectorXd w = (log_mass.array() - top).exp();
  return DiscreteDistribution{first, w / w.sum()};
}

int DiscreteDistribution::sample(Rng& rng) const {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < prob.size(); ++k) {
    acc += prob[k];
    if (u < acc) return first + static_cast<int>(k);
  }
  return first + static_cast<int>(prob.size()) - 1;
}

int DiscreteDistribution::mode() const {
  Eigen::Index k;
  prob.maxCoeff(&k);
  return first + static_cast<int>(k);
}

double log_half_normal_pdf(double x, double s2) {
  if (!(x > 0.0) || !(s2 > 0.0)) return -kInf;
  return std::log(2.0) - 0.5 * std::log(2.0 * std::numbers::pi * s2) - x * x / (2.0 * s2);
}

}  // namespace mvspec
