#include "lensless/weights.hpp"

#include <string>

#include "lensless/error.hpp"

namespace lensless {

void EnhancerWeights::validate() const {
  if (shuffle_factor < 1) throw InvalidArgument("enhancer shuffle_factor must be >= 1");
  if (layers.empty()) throw InvalidArgument("enhancer has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const KernelBank& k = layers[i].kernels;
    const std::string where = "enhancer layer " + std::to_string(i);
    if (k.kernel_h() % 2 == 0 || k.kernel_w() % 2 == 0) throw InvalidArgument(where + ": kernels must be odd-sized");
    if (layers[i].bias.size() != static_cast<std::size_t>(k.out_channels())) {
      throw InvalidArgument(where + ": bias length differs from output channels");
    }
    if (i > 0 && layers[i - 1].kernels.out_channels() != k.in_channels()) {
      throw InvalidArgument(where + ": input channels do not match the previous layer");
    }
  }
  if (layers.back().kernels.out_channels() != layers.front().kernels.in_channels()) {
    throw InvalidArgument("enhancer output channels must equal its input channels for the skip connection");
  }
}

Matrix default_channel_mix(int in_channels) {
  if (in_channels < 1) throw InvalidArgument("channel count must be >= 1");
  if (in_channels == 4) {
    Matrix m(3, 4);
    m(0, 0) = 1.0;
    m(1, 1) = 0.5;
    m(1, 2) = 0.5;
    m(2, 3) = 1.0;
    return m;
  }
  return Matrix::identity(in_channels);
}

int default_output_channels(int in_channels) { return in_channels == 4 ? 3 : in_channels; }

}  // namespace lensless
