#include "touchreg/image_metrics.hpp"

#include <array>
#include <cmath>

#include "touchreg/error.hpp"

namespace touchreg {

namespace {

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
    throw Error(ErrorKind::InvalidArgument, "image dimensions differ");
}

std::array<double, kSsimWindow * kSsimWindow> gaussian_window() {
  std::array<double, kSsimWindow * kSsimWindow> w{};
  const int half = kSsimWindow / 2;
  double sum = 0.0;
  for (int y = 0; y < kSsimWindow; ++y) {
    for (int x = 0; x < kSsimWindow; ++x) {
      const double dx = x - half, dy = y - half;
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * kSsimSigma * kSsimSigma));
      w[static_cast<std::size_t>(y * kSsimWindow + x)] = v;
      sum += v;
    }
  }
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace

std::optional<double> psnr(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b);
  double sse = 0.0;
  const auto& va = a.values();
  const auto& vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] - vb[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::nullopt;
  const double mse = sse / static_cast<double>(va.size());
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b);
  if (a.width() < kSsimWindow || a.height() < kSsimWindow)
    throw Error(ErrorKind::InvalidArgument, "image smaller than the 11x11 SSIM window");

  static const auto window = gaussian_window();
  constexpr double c1 = kSsimK1 * kSsimK1;
  constexpr double c2 = kSsimK2 * kSsimK2;
  const int out_w = a.width() - kSsimWindow + 1;
  const int out_h = a.height() - kSsimWindow + 1;

  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    double channel_sum = 0.0;
    for (int y0 = 0; y0 < out_h; ++y0) {
      for (int x0 = 0; x0 < out_w; ++x0) {
        double mu_a = 0.0, mu_b = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
        for (int wy = 0; wy < kSsimWindow; ++wy) {
          for (int wx = 0; wx < kSsimWindow; ++wx) {
            const double w = window[static_cast<std::size_t>(wy * kSsimWindow + wx)];
            const double pa = a.at(x0 + wx, y0 + wy, c);
            const double pb = b.at(x0 + wx, y0 + wy, c);
            mu_a += w * pa;
            mu_b += w * pb;
            saa += w * pa * pa;
            sbb += w * pb * pb;
            sab += w * pa * pb;
          }
        }
        const double var_a = saa - mu_a * mu_a;
        const double var_b = sbb - mu_b * mu_b;
        const double cov = sab - mu_a * mu_b;
        channel_sum += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                       ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      }
    }
    total += channel_sum / (static_cast<double>(out_w) * out_h);
  }
  return total / a.channels();
}

}  // namespace touchreg
