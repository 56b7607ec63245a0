#include "adaptids/kernels.hpp"

#include <atomic>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "adaptids/error.hpp"

namespace adaptids {

namespace {
std::atomic<ExecMode> g_mode{ExecMode::parallel};
std::atomic<int> g_threads{0};

inline bool par(ExecMode mode) { return mode == ExecMode::parallel; }
}  // namespace

ExecMode default_exec() { return g_mode.load(); }
void set_default_exec(ExecMode mode) { g_mode.store(mode); }

void set_worker_threads(int n) {
  g_threads.store(n);
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#endif
}

int worker_threads() {
#ifdef _OPENMP
  const int n = g_threads.load();
  return n > 0 ? n : omp_get_max_threads();
#else
  return 1;
#endif
}

void affine(const Matrix& in, const Matrix& w, std::span<const double> bias, Matrix& out,
            ExecMode mode) {
  if (in.cols != w.rows || bias.size() != w.cols)
    fail(errc::shape, "affine: input cols " + std::to_string(in.cols) + " vs weight rows " +
                          std::to_string(w.rows));
  out.rows = in.rows;
  out.cols = w.cols;
  out.data.resize(in.rows * w.cols);

  const std::int64_t n = static_cast<std::int64_t>(in.rows);
  const std::size_t k = in.cols;
  const std::size_t m = w.cols;

#pragma omp parallel for schedule(static) if (par(mode))
  for (std::int64_t r = 0; r < n; ++r) {
    const double* xr = in.data.data() + static_cast<std::size_t>(r) * k;
    double* or_ = out.data.data() + static_cast<std::size_t>(r) * m;
    for (std::size_t j = 0; j < m; ++j) {
      double acc = bias[j];
      const double* wj = w.data.data() + j;
      for (std::size_t i = 0; i < k; ++i) acc += xr[i] * wj[i * m];
      or_[j] = acc;
    }
  }
}

void tanh_activate(Matrix& m, ExecMode mode) {
  const std::int64_t n = static_cast<std::int64_t>(m.data.size());
#pragma omp parallel for schedule(static) if (par(mode))
  for (std::int64_t i = 0; i < n; ++i) m.data[i] = std::tanh(m.data[i]);
}

void grad_weights(const Matrix& a, const Matrix& delta, Matrix& gw, ExecMode mode) {
  if (a.rows != delta.rows) fail(errc::shape, "grad_weights: row mismatch");
  gw.rows = a.cols;
  gw.cols = delta.cols;
  gw.data.assign(gw.rows * gw.cols, 0.0);

  const std::int64_t fan_in = static_cast<std::int64_t>(a.cols);
  const std::size_t fan_out = delta.cols;
  const std::size_t n = a.rows;

#pragma omp parallel for schedule(static) if (par(mode))
  for (std::int64_t i = 0; i < fan_in; ++i) {
    double* gi = gw.data.data() + static_cast<std::size_t>(i) * fan_out;
    for (std::size_t j = 0; j < fan_out; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < n; ++r) acc += a(r, static_cast<std::size_t>(i)) * delta(r, j);
      gi[j] = acc;
    }
  }
}

void grad_bias(const Matrix& delta, std::span<double> gb, ExecMode mode) {
  if (gb.size() != delta.cols) fail(errc::shape, "grad_bias: size mismatch");
  const std::int64_t m = static_cast<std::int64_t>(delta.cols);
  const std::size_t n = delta.rows;
#pragma omp parallel for schedule(static) if (par(mode))
  for (std::int64_t j = 0; j < m; ++j) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) acc += delta(r, static_cast<std::size_t>(j));
    gb[static_cast<std::size_t>(j)] = acc;
  }
}

void backprop_delta(const Matrix& delta, const Matrix& w, const Matrix& a, Matrix& dprev,
                    ExecMode mode) {
  if (delta.cols != w.cols || a.cols != w.rows || a.rows != delta.rows)
    fail(errc::shape, "backprop_delta: shape mismatch");
  dprev.rows = delta.rows;
  dprev.cols = w.rows;
  dprev.data.resize(dprev.rows * dprev.cols);

  const std::int64_t n = static_cast<std::int64_t>(delta.rows);
  const std::size_t fan_in = w.rows;
  const std::size_t fan_out = w.cols;

#pragma omp parallel for schedule(static) if (par(mode))
  for (std::int64_t r = 0; r < n; ++r) {
    const std::size_t rr = static_cast<std::size_t>(r);
    for (std::size_t i = 0; i < fan_in; ++i) {
      double acc = 0.0;
      const double* wi = w.data.data() + i * fan_out;
      for (std::size_t j = 0; j < fan_out; ++j) acc += delta(rr, j) * wi[j];
      const double av = a(rr, i);
      dprev(rr, i) = acc * (1.0 - av * av);
    }
  }
}

std::size_t count_correct(std::span<const double> scores, std::span<const std::uint8_t> labels,
                          double threshold, ExecMode mode) {
  if (scores.size() != labels.size()) fail(errc::shape, "count_correct: size mismatch");
  const std::int64_t n = static_cast<std::int64_t>(scores.size());
  std::int64_t correct = 0;
#pragma omp parallel for schedule(static) reduction(+ : correct) if (par(mode))
  for (std::int64_t i = 0; i < n; ++i) {
    const std::uint8_t pred = scores[static_cast<std::size_t>(i)] >= threshold ? 1 : 0;
    correct += (pred == (labels[static_cast<std::size_t>(i)] != 0 ? 1 : 0)) ? 1 : 0;
  }
  return static_cast<std::size_t>(correct);
}

double mean_squared_error(std::span<const double> scores, std::span<const double> targets) {
  if (scores.size() != targets.size()) fail(errc::shape, "mean_squared_error: size mismatch");
  if (scores.empty()) fail(errc::evaluation, "mean_squared_error: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double d = scores[i] - targets[i];
    acc += d * d;
  }
  return acc / static_cast<double>(scores.size());
}

}  // namespace adaptids
