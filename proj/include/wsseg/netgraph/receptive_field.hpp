#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "wsseg/netgraph/blocks.hpp"
#include "wsseg/netgraph/config.hpp"

namespace wsseg {

struct RfLayer {
  int kernel = 3;
  int stride = 1;
  int dilation = 1;
};

/// Side of the receptive field of a sequential chain:
/// rf += (k - 1) * dilation * jump; jump *= stride.
int receptive_field(const std::vector<RfLayer>& chain);

/// Sequential specs use the chain; parallel branches take the widest.
/// Identity links never widen the field.
int receptive_field(const FusionSpec& spec);

/// Structural receptive field measured by backpropagation: with all conv
/// weights positive and batch norm in inference mode at identity statistics,
/// the input gradient of one centered output pixel is nonzero exactly on the
/// receptive field. Returns (height, width) of its bounding box.
std::pair<int, int> probe_receptive_field(
    const std::function<Var<double>(const Var<double>&)>& net, ParameterSet<double>& params,
    Shape input);

/// Receptive field of a fusion variant via the probe.
std::pair<int, int> probe_fusion_receptive_field(FusionKind kind);

}  // namespace wsseg
