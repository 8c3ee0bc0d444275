#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "esr/momdp.hpp"
#include "esr/policy.hpp"
#include "esr/random.hpp"
#include "esr/welfare.hpp"

namespace esr {

struct EpisodeResult {
    Trajectory trajectory;
    RewardVec total;
    double welfare = 0.0;
};

struct RolloutReport {
    std::vector<EpisodeResult> episodes;
    double mean = 0.0;
    /// Sample standard deviation (n - 1 denominator); 0 for a single episode.
    double std = 0.0;
};

/// Draws s' ~ Pr(. | s, a).
StateId sample_next(const Momdp& model, StateId s, ActionId a, Rng& rng);

/**
 * Seeded Monte-Carlo episodes of length T (model horizon when T <= 0) from
 * the start state. Episode i draws from its own stream derive_seed(seed, i).
 */
RolloutReport rollout(const Momdp& model, const Policy& policy, const WelfareFn& welfare, std::uint64_t seed,
                      std::size_t episodes, int T = 0);

double mean_of(std::span<const double> xs);
double sample_std(std::span<const double> xs);

}  // namespace esr
