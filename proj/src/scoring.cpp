#include "daa/scoring.hpp"

#include <string>

#include "daa/errors.hpp"
#include "daa/trajectory.hpp"

namespace daa {

std::string_view to_string(Method method) noexcept {
  return method == Method::daa_s ? "daa_s" : "daa_i";
}

Method parse_method(std::string_view name) {
  if (name == "daa_i" || name == "daa-i" || name == "DAA-I") return Method::daa_i;
  if (name == "daa_s" || name == "daa-s" || name == "DAA-S") return Method::daa_s;
  throw Error(ErrorCode::invalid_params, "unknown method '" + std::string(name) + "'");
}

std::string_view to_string(TokenChoice choice) noexcept {
  switch (choice) {
    case TokenChoice::eos: return "eos";
    case TokenChoice::bos: return "bos";
    case TokenChoice::all_tokens: return "all_tokens";
  }
  return "unknown";
}

TokenChoice parse_token_choice(std::string_view name) {
  if (name == "eos") return TokenChoice::eos;
  if (name == "bos") return TokenChoice::bos;
  if (name == "all_tokens" || name == "all") return TokenChoice::all_tokens;
  throw Error(ErrorCode::invalid_axis_value, "unknown token choice '" + std::string(name) + "'");
}

double relative_term(std::span<const double> per_token, std::size_t eos_position,
                     std::size_t bos_position, TokenChoice choice) {
  const std::size_t n = per_token.size();
  if (n < 2) throw Error(ErrorCode::shape_mismatch, "relative term needs at least two tokens");

  if (choice == TokenChoice::all_tokens) {
    double sum = 0.0;
    for (double v : per_token) sum += v;
    return sum / static_cast<double>(n);
  }

  const std::size_t reference = choice == TokenChoice::eos ? eos_position : bos_position;
  if (reference >= n) {
    throw Error(ErrorCode::config_out_of_range,
                std::string("reference token for '") + std::string(to_string(choice)) +
                    "' is not present in this trajectory");
  }
  double others = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != reference) others += per_token[i];
  }
  return per_token[reference] - others / static_cast<double>(n - 1);
}

Verdict classify(double score, double threshold) noexcept {
  return score <= threshold ? Verdict::backdoor : Verdict::benign;
}

}  // namespace daa
