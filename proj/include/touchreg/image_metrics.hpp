#pragma once

#include <optional>

#include "touchreg/image.hpp"

namespace touchreg {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

// Peak signal-to-noise ratio in dB for peak value 1, from the MSE pooled over
// all channels. Identical images have no finite PSNR and return nullopt.
std::optional<double> psnr(const ImageBuffer& a, const ImageBuffer& b);

// Mean SSIM over all valid 11x11 Gaussian windows (sigma 1.5), computed per
// channel and averaged. Throws Error(InvalidArgument) for mismatched
// dimensions or images smaller than the window.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace touchreg
