// Flat binary checkpoint: ordered (name, shape, float64 payload) entries
// with a version header. Byte order is little-endian.
#pragma once

#include "dtcn/tensor.hpp"

#include <string>
#include <utility>
#include <vector>

namespace dtcn {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

void save_checkpoint(const std::string& path, const NamedTensors& entries);
NamedTensors load_checkpoint(const std::string& path);

}  // namespace dtcn
