#include "daa/daat_format.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "daa/errors.hpp"

namespace daa {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_bytes(std::vector<std::uint8_t>& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void require(std::size_t n, const char* field) const {
    if (remaining() < n) {
      throw Error(ErrorCode::truncated_payload,
                  std::string(field) + " at offset " + std::to_string(pos_) + " needs " +
                      std::to_string(n) + " bytes, " + std::to_string(remaining()) + " left");
    }
  }

  std::uint32_t u32(const char* field) {
    require(4, field);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes_[pos_ + k]) << (8 * k);
    pos_ += 4;
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* field) {
    require(n, field);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

[[noreturn]] void shape_error(const std::string& field, std::size_t offset, const std::string& detail) {
  throw Error(ErrorCode::shape_mismatch, field + " at offset " + std::to_string(offset) + ": " + detail);
}

}  // namespace

std::vector<std::uint8_t> save_trajectory(const Trajectory& traj) {
  const auto& shape = traj.shape();
  std::vector<std::uint8_t> out;
  out.reserve(32 + shape.tokens + traj.sample_id().size() + traj.prompt().size() +
              4 * shape.payload_size());
  out.insert(out.end(), std::begin(kDaatMagic), std::end(kDaatMagic));
  put_u32(out, kDaatVersion);
  put_u32(out, static_cast<std::uint32_t>(shape.frames));
  put_u32(out, static_cast<std::uint32_t>(shape.tokens));
  put_u32(out, static_cast<std::uint32_t>(shape.dim));
  put_u32(out, traj.eos_index());
  for (auto role : traj.roles()) out.push_back(static_cast<std::uint8_t>(role));
  put_bytes(out, traj.sample_id());
  put_bytes(out, traj.prompt());
  for (float v : traj.payload()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Trajectory load_trajectory(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const auto magic = in.take(4, "magic");
  if (std::memcmp(magic.data(), kDaatMagic, 4) != 0) {
    throw Error(ErrorCode::bad_magic, "magic at offset 0 is not \"DAAT\"");
  }
  const std::size_t version_offset = in.offset();
  const std::uint32_t version = in.u32("version");
  if (version != kDaatVersion) {
    throw Error(ErrorCode::unsupported_version, "version at offset " + std::to_string(version_offset) +
                                                    " is " + std::to_string(version));
  }

  const std::size_t frames_offset = in.offset();
  const std::uint32_t n_frames = in.u32("n_frames");
  const std::uint32_t n_tokens = in.u32("n_tokens");
  const std::uint32_t map_dim = in.u32("map_dim");
  const std::size_t eos_offset = in.offset();
  const std::uint32_t eos_index = in.u32("eos_index");
  if (n_frames < 2) shape_error("n_frames", frames_offset, "need at least 2 frames, got " + std::to_string(n_frames));
  if (n_tokens < 2) shape_error("n_tokens", frames_offset + 4, "need at least 2 tokens, got " + std::to_string(n_tokens));
  if (map_dim < 1) shape_error("map_dim", frames_offset + 8, "must be >= 1");
  if (eos_index != n_tokens) {
    shape_error("eos_index", eos_offset, "is " + std::to_string(eos_index) + ", must equal n_tokens " +
                                             std::to_string(n_tokens));
  }

  const std::size_t roles_offset = in.offset();
  const auto raw_roles = in.take(n_tokens, "roles");
  std::vector<TokenRole> roles(n_tokens);
  for (std::size_t i = 0; i < n_tokens; ++i) {
    const std::uint8_t tag = raw_roles[i];
    const bool last = i + 1 == n_tokens;
    if (tag > 2) shape_error("roles", roles_offset + i, "unknown role tag " + std::to_string(tag));
    if ((tag == 2) != last) {
      shape_error("roles", roles_offset + i, "EOS must be tagged exactly once, at position eos_index");
    }
    roles[i] = static_cast<TokenRole>(tag);
  }

  const std::uint32_t id_len = in.u32("sample_id_len");
  const auto id_bytes = in.take(id_len, "sample_id");
  const std::uint32_t prompt_len = in.u32("prompt_len");
  const auto prompt_bytes = in.take(prompt_len, "prompt");

  const std::size_t payload_offset = in.offset();
  const std::uint64_t map_bytes = 4ULL * map_dim * map_dim;
  const std::uint64_t declared_maps = static_cast<std::uint64_t>(n_frames) * n_tokens;
  const std::uint64_t remaining = in.remaining();
  if (remaining % map_bytes != 0) {
    throw Error(ErrorCode::truncated_payload,
                "payload at offset " + std::to_string(payload_offset) + " ends mid-map (" +
                    std::to_string(remaining) + " bytes is not a multiple of " +
                    std::to_string(map_bytes) + ")");
  }
  if (remaining / map_bytes != declared_maps) {
    shape_error("payload", payload_offset,
                "holds " + std::to_string(remaining / map_bytes) + " maps, header declares " +
                    std::to_string(n_frames) + " x " + std::to_string(n_tokens));
  }

  const TrajectoryShape shape{n_frames, n_tokens, map_dim};
  std::vector<float> payload(shape.payload_size());
  const auto raw = in.take(remaining, "payload");
  for (std::size_t k = 0; k < payload.size(); ++k) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(raw[4 * k + b]) << (8 * b);
    const float v = std::bit_cast<float>(bits);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::non_finite_value, "payload value at offset " +
                                                   std::to_string(payload_offset + 4 * k) +
                                                   " is not finite");
    }
    if (v < 0.0F) {
      throw Error(ErrorCode::negative_value, "payload value at offset " +
                                                 std::to_string(payload_offset + 4 * k) +
                                                 " is negative");
    }
    payload[k] = v;
  }

  return Trajectory::from_payload(shape, std::move(roles), std::move(payload),
                                  std::string(id_bytes.begin(), id_bytes.end()),
                                  std::string(prompt_bytes.begin(), prompt_bytes.end()));
}

Trajectory read_trajectory_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::io_error, "read failed for " + path.string());
  return load_trajectory(bytes);
}

void write_trajectory_file(const std::filesystem::path& path, const Trajectory& traj) {
  const auto bytes = save_trajectory(traj);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

}  // namespace daa
