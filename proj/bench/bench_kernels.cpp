// Benchmarks the OpenMP kernels against the serial loop on the operations the
// pipeline spends its time in: batched forward passes and MSE gradients.
// Output also asserts that both modes produce identical bits, since the
// kernels are written with a fixed summation order.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adaptids/kernels.hpp"
#include "adaptids/mlp.hpp"
#include "adaptids/rng.hpp"
#include "adaptids/util.hpp"

using namespace adaptids;

namespace {

double run_ms(const std::function<void()>& fn, int reps) {
  // warm-up
  fn();
  double best = 1e18;
  for (int i = 0; i < reps; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto elapsed = std::chrono::steady_clock::now() - start;
    best = std::min(best, std::chrono::duration<double, std::milli>(elapsed).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel benchmark: serial reference vs OpenMP"};
  std::size_t rows = 4096, features = 64;
  std::string hidden = "64,64,64,64";
  int reps = 5, jobs = 0;
  app.add_option("--rows", rows, "batch rows")->capture_default_str();
  app.add_option("--features", features, "input features")->capture_default_str();
  app.add_option("--hidden", hidden, "hidden layer sizes")->capture_default_str();
  app.add_option("--reps", reps, "timing repetitions (best-of)")->capture_default_str();
  app.add_option("--jobs", jobs, "worker threads (0 = all cores)")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  set_worker_threads(jobs);

  std::vector<std::size_t> sizes{features};
  for (const auto& part : split(hidden, ','))
    if (!part.empty()) sizes.push_back(std::stoul(part));
  sizes.push_back(1);

  const Mlp model = init_mlp(sizes, 7);
  Rng rng(11);
  Matrix X(rows, features);
  for (double& v : X.data) v = rng.uniform();
  std::vector<double> targets(rows);
  for (double& t : targets) t = rng.uniform();

  std::printf("model: %zu params, batch %zu x %zu, %d worker thread(s)\n", model.param_count(),
              rows, features, worker_threads());
  std::printf("%-12s %12s %12s %10s\n", "op", "serial ms", "parallel ms", "speedup");

  const auto bench_op = [&](const char* name, const std::function<void(ExecMode)>& op) {
    const double serial = run_ms([&] { op(ExecMode::serial); }, reps);
    const double parallel = run_ms([&] { op(ExecMode::parallel); }, reps);
    std::printf("%-12s %12.3f %12.3f %9.2fx\n", name, serial, parallel, serial / parallel);
  };

  std::vector<double> fwd_serial, fwd_parallel;
  bench_op("forward", [&](ExecMode mode) {
    auto scores = forward(model, X, mode);
    (mode == ExecMode::serial ? fwd_serial : fwd_parallel) = std::move(scores);
  });

  Gradients g_serial, g_parallel;
  bench_op("gradients", [&](ExecMode mode) {
    auto g = mse_gradients(model, X, targets, mode);
    (mode == ExecMode::serial ? g_serial : g_parallel) = std::move(g);
  });

  bool identical = fwd_serial == fwd_parallel;
  for (std::size_t l = 0; identical && l < g_serial.weights.size(); ++l)
    identical = g_serial.weights[l] == g_parallel.weights[l] &&
                g_serial.biases[l] == g_parallel.biases[l];
  std::printf("bit-identical serial/parallel results: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
