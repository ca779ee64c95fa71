#ifndef PEM_PRESETS_HPP
#define PEM_PRESETS_HPP

#include <string>
#include <string_view>
#include <vector>

#include "pem/online.hpp"

namespace pem {

/// Named hyperparameter sets: one per domain ("antisparse", "nn_antisparse",
/// "sparse", "nn_sparse", "simplex") and the unnormalized counterparts
/// prefixed with "u-pem/".
PemConfig preset(std::string_view name, int n, int m);

std::vector<std::string> preset_names();

/// Multi-line human-readable listing of one preset.
std::string describe_preset(std::string_view name);

}  // namespace pem

#endif  // PEM_PRESETS_HPP
