#include "asr/prox.hpp"

#include <cmath>
#include <stdexcept>

namespace asr {

EnvelopeParams::EnvelopeParams(double lambda_in, double mu_in)
    : lambda(lambda_in), mu(mu_in) {
  if (!(lambda > 0.0)) throw std::invalid_argument("EnvelopeParams: lambda must be > 0");
  if (!(mu > 0.0)) throw std::invalid_argument("EnvelopeParams: mu must be > 0");
}

double soft_threshold_scalar(double z, double tau) {
  double m = std::abs(z) - tau;
  if (m <= 0.0) return 0.0;
  return z > 0.0 ? m : -m;
}

Vector soft_threshold(const Vector& z, double tau) {
  if (tau < 0.0) throw std::invalid_argument("soft_threshold: tau must be >= 0");
  Vector out(z.size());
  for (Index i = 0; i < z.size(); ++i) out[i] = soft_threshold_scalar(z[i], tau);
  return out;
}

double huber(double x, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("huber: alpha must be > 0");
  double ax = std::abs(x);
  if (ax < alpha) return x * x / (2.0 * alpha);
  return ax - alpha / 2.0;
}

double envelope_value(const Vector& v, const EnvelopeParams& params) {
  const double alpha = params.lambda * params.mu;
  double sum = 0.0;
  for (Index i = 0; i < v.size(); ++i) sum += huber(v[i], alpha);
  return params.lambda * sum;
}

Vector envelope_gradient(const Vector& v, const EnvelopeParams& params) {
  const double alpha = params.lambda * params.mu;
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i)
    out[i] = (v[i] - soft_threshold_scalar(v[i], alpha)) / params.mu;
  return out;
}

Vector partial_min_z(const Vector& v, double lambda, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("partial_min_z: rho must be > 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("partial_min_z: lambda must be > 0");
  return soft_threshold(v, lambda / rho);
}

}  // namespace asr
