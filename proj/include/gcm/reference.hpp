#pragma once

#include <array>

#include "gcm/carafe.hpp"
#include "gcm/ops.hpp"
#include "gcm/ssm.hpp"
#include "gcm/tensor.hpp"

namespace gcm::ref {

// Serial straight-line implementations, written independently of the
// parallel kernels. They are the oracle side of the dual-route checks in
// the test suites and the baseline side of the benchmark comparison.

Tensor conv2d(const Tensor& x, const ConvWeights& w);

Tensor reassemble(const Tensor& x, const ReassemblyField& field, const CarafeConfig& cfg);

/// Full compress -> encode -> shuffle -> normalize -> reassemble pipeline
/// as one explicit loop nest over output sites.
Tensor carafe_forward(const Tensor& x, const CarafeWeights& w, const CarafeConfig& cfg);

Tensor ss2d_scan(const Tensor& x, const std::array<DiscreteSsm, 4>& dirs);

} // namespace gcm::ref
