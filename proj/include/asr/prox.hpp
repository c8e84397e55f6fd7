#pragma once

#include "asr/types.hpp"

namespace asr {

// Weight/smoothing pair for the l1 Moreau envelope. mu has units of
// signal^2 per objective unit; both must be strictly positive (the
// unsmoothed limit mu -> 0 is handled by dedicated exact-l1 paths, not by
// passing 0 here).
struct EnvelopeParams {
  double lambda;
  double mu;

  EnvelopeParams(double lambda_in, double mu_in);
};

// Soft shrinkage: out_i = max(|z_i| - tau, 0) * sgn(z_i). Ties |z| == tau
// map to exactly 0.
Vector soft_threshold(const Vector& z, double tau);
double soft_threshold_scalar(double z, double tau);

// Huber function: x^2/(2a) on |x| < a, |x| - a/2 otherwise.
double huber(double x, double alpha);

// Moreau envelope of lambda*||.||_1 evaluated at v:
//   min_u { lambda*||u||_1 + ||u - v||^2 / (2 mu) }  =  lambda * sum_i H_{lambda*mu}(v_i).
double envelope_value(const Vector& v, const EnvelopeParams& params);

// Gradient of the envelope, (v - soft_threshold(v, lambda*mu)) / mu.
// Componentwise magnitude is at most lambda; the map is (1/mu)-Lipschitz.
// Callers composing with an analysis operator apply D themselves.
Vector envelope_gradient(const Vector& v, const EnvelopeParams& params);

// argmin_z { lambda*||z||_1 + (rho/2)*||z - v||^2 } = soft_threshold(v, lambda/rho).
Vector partial_min_z(const Vector& v, double lambda, double rho);

}  // namespace asr
