#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "daa/manifest.hpp"
#include "daa/trajectory.hpp"

namespace daa {

/// Synthetic attention dynamics. Every token relaxes exponentially from a
/// start map towards a target map at the same distance; the EOS token's rate
/// is base_rate * eos_rate_factor, so factors below 1 reproduce the slower
/// EOS evolution of triggered prompts.
struct SynthParams {
  std::size_t tokens = 8;  // L
  std::size_t dim = 8;     // D
  std::size_t steps = 16;  // T
  double eos_rate_factor = 1.0;
  double base_rate = 0.04;
  double noise_sigma = 0.0;
  /// Entry scale of the maps; start entries lie in [1.5, 2.5] * amplitude and
  /// targets differ from them by +-amplitude per entry.
  double amplitude = 5.0;
  /// Per-token uniform perturbation of the shared start map, as a fraction of
  /// amplitude. With 0 every token starts from the same map, so the first
  /// frame carries no token structure.
  double start_jitter = 0.0;
  /// Relaxation steps run before the first recorded frame.
  std::size_t warmup_steps = 4;
  std::uint64_t seed = 0;

  /// Throws InvalidParams.
  void validate() const;
};

/// Throws InvalidParams when the rate factor does not fit the label:
/// backdoor needs 0 < factor < 1, benign needs factor >= 1.
Trajectory gen_trajectory(const SynthParams& params, Label label, std::string sample_id = {});

struct SynthDatasetParams {
  SynthParams base;  // eos_rate_factor is replaced per label
  double rho_backdoor = 0.6;
  double rho_benign = 1.2;
  double train_fraction = 0.7;
  std::string scenario = "synthetic";
};

/// Seed of sample `index` derived from the template seed; independent of
/// generation order.
std::uint64_t derive_seed(std::uint64_t template_seed, std::uint64_t index) noexcept;

/// Writes one DAAT file per sample plus `manifest.jsonl` into out_dir. Each
/// class is split train/test separately with round(train_fraction * n) train
/// samples.
DatasetManifest gen_dataset(std::size_t n_benign, std::size_t n_backdoor, const SynthDatasetParams& params,
                            const std::filesystem::path& out_dir, unsigned workers = 0);

}  // namespace daa
