#pragma once

#include "gcm/blocks.hpp"
#include "gcm/carafe.hpp"
#include "gcm/gamma.hpp"
#include "gcm/io.hpp"

namespace gcm {

/// Forward-chain settings for the demo pipeline:
/// gamma -> stem -> clue merge -> ODSS block -> CARAFE upsample.
struct PipelineConfig {
    std::size_t image_size = 32;    // divisible by 8
    std::size_t stem_channels = 8;
    std::size_t merge_channels = 16;
    std::size_t state_size = 4;
    GammaConfig gamma;
    CarafeConfig carafe;
};

struct PipelineWeights {
    StemWeights stem;
    ClueMergeWeights merge;
    OdssWeights odss;
    CarafeWeights carafe;
};

PipelineWeights make_pipeline_weights(const PipelineConfig& cfg, Rng& rng);

/// Weight-container layout used by the CLI. Convolution geometry (stride,
/// padding, groups) is implied by each section's role; epsilons stay at the
/// library defaults.
WeightFile pack_pipeline_weights(const PipelineWeights& w);
PipelineWeights unpack_pipeline_weights(const WeightFile& wf, const PipelineConfig& cfg);

WeightFile pack_carafe_weights(const CarafeWeights& w);
CarafeWeights unpack_carafe_weights(const WeightFile& wf);

} // namespace gcm
