#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "daa/manifest.hpp"

namespace daa {

enum class Method { daa_i, daa_s };

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view name);

/// Which per-token construction feeds a detector score.
///   eos:        EOS value minus the mean over every other position (the detectors' default)
///   bos:        BOS value minus the mean over every other position
///   all_tokens: plain mean over all positions
enum class TokenChoice { eos, bos, all_tokens };

std::string_view to_string(TokenChoice choice) noexcept;
TokenChoice parse_token_choice(std::string_view name);

/// One step's contribution to a detector score from per-token evolution
/// values. Sums run in ascending position order.
double relative_term(std::span<const double> per_token, std::size_t eos_position,
                     std::size_t bos_position, TokenChoice choice);

/// backdoor iff score <= threshold (inclusive).
Verdict classify(double score, double threshold) noexcept;
inline Verdict classify_i(double score, double alpha_i) noexcept { return classify(score, alpha_i); }
inline Verdict classify_s(double score, double alpha_s) noexcept { return classify(score, alpha_s); }

}  // namespace daa
