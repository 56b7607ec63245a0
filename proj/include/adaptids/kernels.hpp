#pragma once

#include <cstdint>
#include <span>

#include "adaptids/matrix.hpp"

namespace adaptids {

// serial runs the plain loop; parallel runs the same loops under OpenMP.
// Every kernel keeps a fixed per-output-element summation order, so both
// modes give bit-identical results for any worker count.
enum class ExecMode { serial, parallel };

ExecMode default_exec();
void set_default_exec(ExecMode mode);
// 0 = hardware default
void set_worker_threads(int n);
int worker_threads();

// out[r][j] = bias[j] + sum_i in[r][i] * w[i][j]   (bias first, then ascending i)
void affine(const Matrix& in, const Matrix& w, std::span<const double> bias, Matrix& out,
            ExecMode mode);

void tanh_activate(Matrix& m, ExecMode mode);

// gw[i][j] = sum_r a[r][i] * delta[r][j], ascending r
void grad_weights(const Matrix& a, const Matrix& delta, Matrix& gw, ExecMode mode);

// gb[j] = sum_r delta[r][j], ascending r
void grad_bias(const Matrix& delta, std::span<double> gb, ExecMode mode);

// dprev[r][i] = (sum_j delta[r][j] * w[i][j]) * (1 - a[r][i]^2)
void backprop_delta(const Matrix& delta, const Matrix& w, const Matrix& a, Matrix& dprev,
                    ExecMode mode);

// rows where (score >= threshold) == (label != 0)
std::size_t count_correct(std::span<const double> scores, std::span<const std::uint8_t> labels,
                          double threshold, ExecMode mode);

// fixed ascending summation order regardless of mode
double mean_squared_error(std::span<const double> scores, std::span<const double> targets);

}  // namespace adaptids
