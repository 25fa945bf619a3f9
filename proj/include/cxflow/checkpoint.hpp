#pragma once

#include <string>

#include "cxflow/nn.hpp"

namespace cxflow {

// Checkpoint layout: magic "CXFLOW1", u32 mode (J), u32 layer count, per
// layer u32 in and u32 out, then per layer the weight block (out x in,
// row-major) and bias block as 64-bit little-endian doubles. The target copy
// is reconstructed from the value network on load.
void save_checkpoint(const std::string& path, const nn::Mlp& net, int mode);

struct Checkpoint {
    nn::Mlp net;
    int mode = 0;
};

Checkpoint load_checkpoint(const std::string& path);

} // namespace cxflow
