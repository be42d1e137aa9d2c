#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace daa {

enum class TokenRole : std::uint8_t { bos = 0, prompt = 1, eos = 2 };

enum class Metric { frobenius, one_norm };

std::string_view to_string(Metric metric) noexcept;
Metric parse_metric(std::string_view name);

/// Non-owning view of one token's D x D attention map, row-major.
class MapView {
 public:
  MapView(std::span<const float> values, std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::span<const float> values() const noexcept { return values_; }
  float operator()(std::size_t row, std::size_t col) const noexcept {
    return values_[row * dim_ + col];
  }

 private:
  std::span<const float> values_;
  std::size_t dim_;
};

/// Owning D x D attention map. Entries must be finite and non-negative.
class AttentionMap {
 public:
  explicit AttentionMap(std::size_t dim);
  AttentionMap(std::size_t dim, std::vector<float> values);

  static AttentionMap from_rows(const std::vector<std::vector<float>>& rows);

  std::size_t dim() const noexcept { return dim_; }
  std::span<const float> values() const noexcept { return values_; }
  float& at(std::size_t row, std::size_t col);
  float at(std::size_t row, std::size_t col) const;
  MapView view() const noexcept { return {values_, dim_}; }
  operator MapView() const noexcept { return view(); }  // NOLINT(google-explicit-constructor)

 private:
  std::size_t dim_;
  std::vector<float> values_;
};

struct TrajectoryShape {
  std::size_t frames = 0;  // T + 1
  std::size_t tokens = 0;  // L
  std::size_t dim = 0;     // D

  std::size_t map_size() const noexcept { return dim * dim; }
  std::size_t payload_size() const noexcept { return frames * tokens * map_size(); }
  bool operator==(const TrajectoryShape&) const = default;
};

/// BOS, PROMPT..., EOS for `tokens` positions.
std::vector<TokenRole> default_roles(std::size_t tokens);

/// Full attention record of one generation request: (T+1) frames of L maps of
/// size D x D, stored densely in frame-major, token, row-major order.
///
/// Positions are 0-based in this API; the EOS token always occupies the last
/// position (its 1-based index equals L). Instances are immutable once built,
/// and every factory validates the invariants before returning.
class Trajectory {
 public:
  static Trajectory from_payload(TrajectoryShape shape, std::vector<TokenRole> roles,
                                 std::vector<float> payload, std::string sample_id = {},
                                 std::string prompt = {});

  /// frames[step][token]
  static Trajectory from_frames(const std::vector<std::vector<AttentionMap>>& frames,
                                std::vector<TokenRole> roles = {}, std::string sample_id = {},
                                std::string prompt = {});

  const TrajectoryShape& shape() const noexcept { return shape_; }
  std::size_t num_frames() const noexcept { return shape_.frames; }
  std::size_t num_tokens() const noexcept { return shape_.tokens; }
  std::size_t dim() const noexcept { return shape_.dim; }
  /// T, the index of the last denoising step.
  std::size_t last_step() const noexcept { return shape_.frames - 1; }

  std::size_t eos_position() const noexcept { return shape_.tokens - 1; }
  std::uint32_t eos_index() const noexcept { return static_cast<std::uint32_t>(shape_.tokens); }
  /// First BOS-tagged position, or npos when the record has none.
  std::size_t bos_position() const noexcept;

  const std::vector<TokenRole>& roles() const noexcept { return roles_; }
  const std::string& sample_id() const noexcept { return sample_id_; }
  const std::string& prompt() const noexcept { return prompt_; }
  std::span<const float> payload() const noexcept { return payload_; }

  MapView map(std::size_t step, std::size_t token) const;
  std::vector<MapView> frame(std::size_t step) const;

  bool operator==(const Trajectory& other) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  Trajectory() = default;

  TrajectoryShape shape_;
  std::vector<TokenRole> roles_;
  std::vector<float> payload_;
  std::string sample_id_;
  std::string prompt_;
};

using MapDistance = std::function<double(MapView, MapView)>;

/// frobenius: sqrt of summed squared differences; one_norm: summed absolute
/// differences. Accumulated in double precision.
double map_distance(MapView a, MapView b, Metric metric);

MapDistance distance_function(Metric metric);

}  // namespace daa
