#include "daa/daa_independent.hpp"

#include <string>

#include "daa/errors.hpp"

namespace daa {

double evolve_rate(const Trajectory& traj, std::size_t token, std::size_t step) {
  if (token >= traj.num_tokens() || step >= traj.last_step()) {
    throw Error(ErrorCode::index_out_of_range,
                "evolve rate for token " + std::to_string(token) + " at step " + std::to_string(step) +
                    " (L=" + std::to_string(traj.num_tokens()) + ", T=" + std::to_string(traj.last_step()) + ")");
  }
  return map_distance(traj.map(step + 1, token), traj.map(step, token), Metric::frobenius);
}

std::vector<double> evolve_rates(const Trajectory& traj, std::size_t step) {
  std::vector<double> rates(traj.num_tokens());
  for (std::size_t i = 0; i < rates.size(); ++i) rates[i] = evolve_rate(traj, i, step);
  return rates;
}

std::vector<double> daa_i_terms(const Trajectory& traj, const DaaIConfig& cfg) {
  if (cfg.span < 1) throw Error(ErrorCode::config_out_of_range, "span must be >= 1");
  if (cfg.start_step + cfg.span + 1 > traj.last_step()) {
    throw Error(ErrorCode::config_out_of_range,
                "window t=" + std::to_string(cfg.start_step) + ", s=" + std::to_string(cfg.span) +
                    " needs t + s <= T - 1 = " + std::to_string(traj.last_step() - 1));
  }
  std::vector<double> terms;
  terms.reserve(cfg.span + 1);
  const std::size_t bos = traj.bos_position();
  for (std::size_t j = cfg.start_step; j <= cfg.start_step + cfg.span; ++j) {
    const auto rates = evolve_rates(traj, j);
    terms.push_back(relative_term(rates, traj.eos_position(), bos, cfg.token_choice));
  }
  return terms;
}

double daa_i_score(const Trajectory& traj, const DaaIConfig& cfg) {
  double score = 0.0;
  for (double term : daa_i_terms(traj, cfg)) score += term;
  return score;
}

}  // namespace daa
