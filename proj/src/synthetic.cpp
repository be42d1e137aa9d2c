#include "daa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "daa/daat_format.hpp"
#include "daa/errors.hpp"
#include "daa/parallel.hpp"

namespace daa {

void SynthParams::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::invalid_params, msg); };
  if (tokens < 2) fail("L must be >= 2");
  if (dim < 2) fail("D must be >= 2");
  if (steps < 6) fail("T must be >= 6");
  if (!(eos_rate_factor > 0.0) || !std::isfinite(eos_rate_factor)) fail("eos_rate_factor must be positive");
  if (!(base_rate > 0.0) || !std::isfinite(base_rate)) fail("base_rate must be positive");
  if (base_rate * std::max(1.0, eos_rate_factor) > 1.0) fail("base_rate * eos_rate_factor must not exceed 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) fail("noise_sigma must be non-negative");
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) fail("amplitude must be positive");
  if (!(start_jitter >= 0.0 && start_jitter <= 0.5)) fail("start_jitter must lie in [0, 0.5]");
}

std::uint64_t derive_seed(std::uint64_t template_seed, std::uint64_t index) noexcept {
  // splitmix64 finaliser over (seed, index)
  std::uint64_t z = template_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Trajectory gen_trajectory(const SynthParams& params, Label label, std::string sample_id) {
  params.validate();
  const double rho = params.eos_rate_factor;
  if (label == Label::backdoor && !(rho < 1.0)) {
    throw Error(ErrorCode::invalid_params, "backdoor samples need eos_rate_factor < 1");
  }
  if (label == Label::benign && rho < 1.0) {
    throw Error(ErrorCode::invalid_params, "benign samples need eos_rate_factor >= 1");
  }

  const std::size_t L = params.tokens, D = params.dim, T = params.steps, n = D * D;
  const double h = params.amplitude;
  const std::size_t eos = L - 1;
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> start_dist(1.5 * h, 2.5 * h);
  std::uniform_real_distribution<double> jitter(-params.start_jitter * h, params.start_jitter * h);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> noise(0.0, 1.0);

  // Shared start layout, optionally perturbed per token.
  std::vector<double> shared(n);
  for (auto& v : shared) v = start_dist(rng);
  std::vector<std::vector<double>> current(L, std::vector<double>(n));
  std::vector<std::vector<double>> target(L, std::vector<double>(n));
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      current[i][k] = params.start_jitter > 0.0 ? shared[k] + jitter(rng) : shared[k];
      double delta;
      if (i == eos) {
        // EOS drifts towards a fixed layout: up in the central block, down elsewhere.
        const std::size_t r = k / D, c = k % D;
        const bool central = r >= D / 4 && r < D - D / 4 && c >= D / 4 && c < D - D / 4;
        delta = central ? h : -h;
      } else {
        delta = coin(rng) ? h : -h;
      }
      target[i][k] = current[i][k] + delta;
    }
  }

  auto advance = [&] {
    for (std::size_t i = 0; i < L; ++i) {
      const double rate = i == eos ? params.base_rate * rho : params.base_rate;
      for (std::size_t k = 0; k < n; ++k) {
        double v = current[i][k] + rate * (target[i][k] - current[i][k]);
        if (params.noise_sigma > 0.0) v += params.noise_sigma * noise(rng);
        current[i][k] = std::max(v, 0.0);
      }
    }
  };
  for (std::size_t w = 0; w < params.warmup_steps; ++w) advance();

  std::vector<float> payload;
  payload.reserve((T + 1) * L * n);
  auto emit = [&] {
    for (const auto& m : current) {
      for (double v : m) payload.push_back(static_cast<float>(v));
    }
  };
  emit();
  for (std::size_t t = 0; t < T; ++t) {
    advance();
    emit();
  }

  TrajectoryShape shape{T + 1, L, D};
  return Trajectory::from_payload(shape, default_roles(L), std::move(payload), std::move(sample_id));
}

DatasetManifest gen_dataset(std::size_t n_benign, std::size_t n_backdoor, const SynthDatasetParams& params,
                            const std::filesystem::path& out_dir, unsigned workers) {
  if (n_benign < 1 || n_backdoor < 1) throw Error(ErrorCode::invalid_params, "both class counts must be >= 1");
  if (!(params.train_fraction >= 0.0 && params.train_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_params, "train_fraction must lie in [0, 1]");
  }
  SynthParams check = params.base;
  check.eos_rate_factor = params.rho_backdoor;
  check.validate();
  if (!(params.rho_backdoor < 1.0)) throw Error(ErrorCode::invalid_params, "rho_backdoor must be < 1");
  check.eos_rate_factor = params.rho_benign;
  check.validate();
  if (params.rho_benign < 1.0) throw Error(ErrorCode::invalid_params, "rho_benign must be >= 1");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + out_dir.string() + ": " + ec.message());

  const std::size_t total = n_benign + n_backdoor;
  DatasetManifest manifest;
  manifest.entries.resize(total);
  const auto train_benign = static_cast<std::size_t>(std::llround(params.train_fraction * static_cast<double>(n_benign)));
  const auto train_backdoor =
      static_cast<std::size_t>(std::llround(params.train_fraction * static_cast<double>(n_backdoor)));

  parallel_for(total, workers, [&](std::size_t idx) {
    const bool backdoor = idx >= n_benign;
    const std::size_t within = backdoor ? idx - n_benign : idx;
    char name[48];
    std::snprintf(name, sizeof name, "%s_%05zu", backdoor ? "backdoor" : "benign", within);

    SynthParams p = params.base;
    p.eos_rate_factor = backdoor ? params.rho_backdoor : params.rho_benign;
    p.seed = derive_seed(params.base.seed, idx);
    const Label label = backdoor ? Label::backdoor : Label::benign;
    const auto traj = gen_trajectory(p, label, name);
    const auto path = out_dir / (std::string(name) + ".daat");
    write_trajectory_file(path, traj);

    auto& e = manifest.entries[idx];
    e.path = std::filesystem::absolute(path);
    e.label = label;
    e.scenario = params.scenario;
    e.split = within < (backdoor ? train_backdoor : train_benign) ? Split::train : Split::test;
  });

  write_manifest(out_dir / "manifest.jsonl", manifest);
  return manifest;
}

}  // namespace daa
