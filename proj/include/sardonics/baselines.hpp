#pragma once

#include <random>

#include "sardonics/model.hpp"

namespace sardonics {

enum class ScanOrder { Systematic, Random };

// Resample site i from its exact conditional,
// P(s_i = +1 | rest) = 1 / (1 + exp(-2 beta f_i)).
void gibbs_site_update(const IsingModel& model, SpinState& state, int i,
                       std::mt19937_64& rng);

// One heat-bath sweep: each visited site i is resampled from its exact
// conditional (systematic: 0..M-1; random: M uniform draws).
void gibbs_sweep(const IsingModel& model, SpinState& state, std::mt19937_64& rng,
                 ScanOrder order = ScanOrder::Systematic);

// For bipartite models: resample every hidden-layer spin given the visible
// layer, then every visible spin given the hidden layer. Throws if the model
// declares no bipartition.
void block_gibbs_sweep(const IsingModel& model, SpinState& state,
                       std::mt19937_64& rng);

// One cluster update: place a bond on each satisfied edge with probability
// 1 - exp(-2 beta |J|), form clusters by union-find, flip each cluster with
// probability 1/2. Fields couple each site to a frozen ghost spin with
// strength |h_i|, bonded only when s_i agrees with sign(h_i); the ghost's
// cluster is never flipped.
void swendsen_wang_step(const IsingModel& model, SpinState& state,
                        std::mt19937_64& rng);

}  // namespace sardonics
