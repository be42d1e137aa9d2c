#include "daa/trajectory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "daa/errors.hpp"

namespace daa {

std::string_view to_string(Metric metric) noexcept {
  switch (metric) {
    case Metric::frobenius: return "frobenius";
    case Metric::one_norm: return "one_norm";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "frobenius" || name == "fro") return Metric::frobenius;
  if (name == "one_norm" || name == "l1" || name == "1-norm") return Metric::one_norm;
  throw Error(ErrorCode::invalid_axis_value, "unknown similarity metric '" + std::string(name) + "'");
}

MapView::MapView(std::span<const float> values, std::size_t dim) : values_(values), dim_(dim) {
  if (dim == 0 || values.size() != dim * dim) {
    throw Error(ErrorCode::shape_mismatch, "map view of " + std::to_string(values.size()) +
                                               " values cannot be " + std::to_string(dim) + "x" +
                                               std::to_string(dim));
  }
}

namespace {

void check_entries(std::span<const float> values, const std::string& where) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) {
      throw Error(ErrorCode::non_finite_value, where + " entry " + std::to_string(k));
    }
    if (values[k] < 0.0F) {
      throw Error(ErrorCode::negative_value, where + " entry " + std::to_string(k));
    }
  }
}

}  // namespace

AttentionMap::AttentionMap(std::size_t dim) : dim_(dim), values_(dim * dim, 0.0F) {
  if (dim == 0) throw Error(ErrorCode::shape_mismatch, "attention map dimension must be >= 1");
}

AttentionMap::AttentionMap(std::size_t dim, std::vector<float> values)
    : dim_(dim), values_(std::move(values)) {
  if (dim == 0 || values_.size() != dim * dim) {
    throw Error(ErrorCode::shape_mismatch, "attention map needs " + std::to_string(dim * dim) +
                                               " values, got " + std::to_string(values_.size()));
  }
  check_entries(values_, "attention map");
}

AttentionMap AttentionMap::from_rows(const std::vector<std::vector<float>>& rows) {
  const std::size_t dim = rows.size();
  std::vector<float> values;
  values.reserve(dim * dim);
  for (const auto& row : rows) {
    if (row.size() != dim) throw Error(ErrorCode::shape_mismatch, "attention map rows must be square");
    values.insert(values.end(), row.begin(), row.end());
  }
  return AttentionMap(dim, std::move(values));
}

float& AttentionMap::at(std::size_t row, std::size_t col) {
  if (row >= dim_ || col >= dim_) throw Error(ErrorCode::index_out_of_range, "map coordinate");
  return values_[row * dim_ + col];
}

float AttentionMap::at(std::size_t row, std::size_t col) const {
  if (row >= dim_ || col >= dim_) throw Error(ErrorCode::index_out_of_range, "map coordinate");
  return values_[row * dim_ + col];
}

std::vector<TokenRole> default_roles(std::size_t tokens) {
  std::vector<TokenRole> roles(tokens, TokenRole::prompt);
  if (tokens >= 1) roles.back() = TokenRole::eos;
  if (tokens >= 2) roles.front() = TokenRole::bos;
  return roles;
}

Trajectory Trajectory::from_payload(TrajectoryShape shape, std::vector<TokenRole> roles,
                                    std::vector<float> payload, std::string sample_id,
                                    std::string prompt) {
  if (shape.frames < 2) {
    throw Error(ErrorCode::invalid_trajectory,
                "a trajectory needs at least two frames, got " + std::to_string(shape.frames));
  }
  if (shape.tokens < 2) {
    throw Error(ErrorCode::invalid_trajectory,
                "a trajectory needs at least two tokens, got " + std::to_string(shape.tokens));
  }
  if (shape.dim < 1) throw Error(ErrorCode::invalid_trajectory, "map dimension must be >= 1");
  if (roles.empty()) roles = default_roles(shape.tokens);
  if (roles.size() != shape.tokens) {
    throw Error(ErrorCode::shape_mismatch, "role list has " + std::to_string(roles.size()) +
                                               " entries for " + std::to_string(shape.tokens) +
                                               " tokens");
  }
  for (std::size_t i = 0; i < roles.size(); ++i) {
    const bool last = i + 1 == roles.size();
    if (static_cast<std::uint8_t>(roles[i]) > 2) {
      throw Error(ErrorCode::invalid_trajectory, "role tag out of range at position " + std::to_string(i));
    }
    if ((roles[i] == TokenRole::eos) != last) {
      throw Error(ErrorCode::invalid_trajectory,
                  "exactly one EOS role is required and it must be the last position (found at " +
                      std::to_string(i) + ")");
    }
  }
  if (payload.size() != shape.payload_size()) {
    throw Error(ErrorCode::shape_mismatch, "payload holds " + std::to_string(payload.size()) +
                                               " values, shape requires " +
                                               std::to_string(shape.payload_size()));
  }
  check_entries(payload, "payload");

  Trajectory traj;
  traj.shape_ = shape;
  traj.roles_ = std::move(roles);
  traj.payload_ = std::move(payload);
  traj.sample_id_ = std::move(sample_id);
  traj.prompt_ = std::move(prompt);
  return traj;
}

Trajectory Trajectory::from_frames(const std::vector<std::vector<AttentionMap>>& frames,
                                   std::vector<TokenRole> roles, std::string sample_id,
                                   std::string prompt) {
  if (frames.empty()) throw Error(ErrorCode::invalid_trajectory, "empty frame list");
  if (frames.front().empty()) throw Error(ErrorCode::invalid_trajectory, "frame 0 has no maps");
  TrajectoryShape shape{frames.size(), frames.front().size(), frames.front().front().dim()};
  std::vector<float> payload;
  payload.reserve(shape.payload_size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].size() != shape.tokens) {
      throw Error(ErrorCode::shape_mismatch, "frame " + std::to_string(t) + " has " +
                                                 std::to_string(frames[t].size()) + " maps, expected " +
                                                 std::to_string(shape.tokens));
    }
    for (std::size_t i = 0; i < frames[t].size(); ++i) {
      const auto& m = frames[t][i];
      if (m.dim() != shape.dim) {
        throw Error(ErrorCode::shape_mismatch, "map (" + std::to_string(t) + ", " + std::to_string(i) +
                                                   ") has dimension " + std::to_string(m.dim()));
      }
      payload.insert(payload.end(), m.values().begin(), m.values().end());
    }
  }
  return from_payload(shape, std::move(roles), std::move(payload), std::move(sample_id),
                      std::move(prompt));
}

std::size_t Trajectory::bos_position() const noexcept {
  const auto it = std::find(roles_.begin(), roles_.end(), TokenRole::bos);
  return it == roles_.end() ? npos : static_cast<std::size_t>(it - roles_.begin());
}

MapView Trajectory::map(std::size_t step, std::size_t token) const {
  if (step >= shape_.frames || token >= shape_.tokens) {
    throw Error(ErrorCode::index_out_of_range, "map (step " + std::to_string(step) + ", token " +
                                                   std::to_string(token) + ") outside " +
                                                   std::to_string(shape_.frames) + " frames x " +
                                                   std::to_string(shape_.tokens) + " tokens");
  }
  const std::size_t offset = (step * shape_.tokens + token) * shape_.map_size();
  return {std::span<const float>(payload_).subspan(offset, shape_.map_size()), shape_.dim};
}

std::vector<MapView> Trajectory::frame(std::size_t step) const {
  std::vector<MapView> maps;
  maps.reserve(shape_.tokens);
  for (std::size_t i = 0; i < shape_.tokens; ++i) maps.push_back(map(step, i));
  return maps;
}

bool Trajectory::operator==(const Trajectory& other) const {
  if (!(shape_ == other.shape_) || roles_ != other.roles_ || sample_id_ != other.sample_id_ ||
      prompt_ != other.prompt_) {
    return false;
  }
  // bitwise, so that -0.0f and 0.0f are told apart
  return std::equal(payload_.begin(), payload_.end(), other.payload_.begin(),
                    [](float a, float b) { return std::bit_cast<std::uint32_t>(a) ==
                                                  std::bit_cast<std::uint32_t>(b); });
}

double map_distance(MapView a, MapView b, Metric metric) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::shape_mismatch, "map distance between " + std::to_string(a.dim()) + "x" +
                                               std::to_string(a.dim()) + " and " +
                                               std::to_string(b.dim()) + "x" + std::to_string(b.dim()));
  }
  const auto va = a.values();
  const auto vb = b.values();
  double acc = 0.0;
  if (metric == Metric::frobenius) {
    for (std::size_t k = 0; k < va.size(); ++k) {
      const double d = static_cast<double>(va[k]) - static_cast<double>(vb[k]);
      acc += d * d;
    }
    return std::sqrt(acc);
  }
  for (std::size_t k = 0; k < va.size(); ++k) {
    acc += std::abs(static_cast<double>(va[k]) - static_cast<double>(vb[k]));
  }
  return acc;
}

MapDistance distance_function(Metric metric) {
  return [metric](MapView a, MapView b) { return map_distance(a, b, metric); };
}

}  // namespace daa
