#pragma once

#include <stdexcept>
#include <string>

#include "rfda/model.hpp"

namespace rfda {

struct WeightsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binary weight container: magic "RFDA", version u16, entry count u32, then
// per entry {name_len u16, name, ndim u8, dims u32..., float32 payload},
// everything little-endian.  A "__config__" entry records [R,F,K,L,beta] so
// a file identifies its own architecture.  Written via temp file + rename.
template <typename S>
void save_weights(const ModelParams<S>& params, const std::string& path);

// Architecture recorded in the file (throws WeightsError on malformed input).
ModelConfig read_weights_config(const std::string& path);

// Loads and validates every tensor against the expected architecture.  When
// allow_missing_rf is set, a file without the recurrent-fusion tensors (a
// stage-1 checkpoint) still loads: those tensors are freshly initialized from
// rf_seed.  Any other missing, unknown, or misshapen entry raises
// WeightsError naming the offending tensor.
template <typename S>
ModelParams<S> load_weights(const std::string& path, const ModelConfig& cfg,
                            bool allow_missing_rf = false, std::uint64_t rf_seed = 1);

extern template void save_weights(const ModelParams<float>&, const std::string&);
extern template void save_weights(const ModelParams<double>&, const std::string&);
extern template ModelParams<float> load_weights(const std::string&, const ModelConfig&,
                                                bool, std::uint64_t);
extern template ModelParams<double> load_weights(const std::string&, const ModelConfig&,
                                                 bool, std::uint64_t);

}  // namespace rfda
