#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gcm/tensor.hpp"

#include "json.hpp"

namespace gcm {

/// Text tensor format: header "shape: d0 d1 ..." then one line of values per
/// innermost slice, 9 significant digits. The file is the canonical value;
/// pipelines that dump stages re-load from it so replays are bit-stable.
void save_tensor_text(const std::string& path, const Tensor& t);
Tensor load_tensor_text(const std::string& path);

/// Flat binary weight container: magic "GCMW", u32 version, u32 section
/// count, then per section a name, a shape, and little-endian f64 data.
class WeightFile {
public:
    void add(const std::string& name, Tensor tensor);
    const Tensor* find(const std::string& name) const;
    /// Lookup that throws ParseError when the section is missing.
    const Tensor& require(const std::string& name) const;
    const std::vector<std::pair<std::string, Tensor>>& sections() const { return sections_; }

private:
    std::vector<std::pair<std::string, Tensor>> sections_;
};

void save_weights(const std::string& path, const WeightFile& weights);
WeightFile load_weights(const std::string& path);

/// Deterministic JSON serialization: object keys sorted (nlohmann::json
/// default ordering), floating-point numbers fixed to 6 decimals.
std::string dump_json(const nlohmann::json& j, int indent = 2);
void save_json(const std::string& path, const nlohmann::json& j);

} // namespace gcm
