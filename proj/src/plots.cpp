#include "locfft/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "locfft/errors.hpp"

namespace locfft {
namespace {

const cv::Scalar kBlack(0, 0, 0);
const cv::Scalar kGrid(220, 220, 220);
const cv::Scalar kPoint(160, 80, 20);
const cv::Scalar kMark(40, 40, 220);
constexpr int kFont = cv::FONT_HERSHEY_SIMPLEX;
constexpr double kLogGain = 1e4;

void put_text(cv::Mat& img, const std::string& text, int x, int y, double scale = 0.45,
              const cv::Scalar& color = kBlack) {
  cv::putText(img, text, {x, y}, kFont, scale, color, 1, cv::LINE_8);
}

int text_width(const std::string& text, double scale = 0.45) {
  int baseline = 0;
  return cv::getTextSize(text, kFont, scale, 1, &baseline).width;
}

void save_png(const cv::Mat& img, const std::filesystem::path& path) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), img, {cv::IMWRITE_PNG_COMPRESSION, 6});
  } catch (const cv::Exception& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write " + path.string());
}

std::string decade_label(int e) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "1e%d", e);
  return buf;
}

cv::Mat gray_mat(const RowMatrix& m, bool log1p_scale) {
  const auto bytes = to_gray8(m, log1p_scale);
  cv::Mat out(static_cast<int>(m.rows()), static_cast<int>(m.cols()), CV_8UC1);
  std::copy(bytes.begin(), bytes.end(), out.data);
  return out;
}

// Nearest-neighbour upscale by an integer factor, or area-average downscale,
// so the result fits a box x box square.
cv::Mat fit_box(const cv::Mat& src, int box) {
  const int longest = std::max(src.rows, src.cols);
  cv::Mat out;
  if (longest <= box) {
    const int f = std::max(1, box / longest);
    cv::resize(src, out, {src.cols * f, src.rows * f}, 0, 0, cv::INTER_NEAREST);
  } else {
    const double f = static_cast<double>(box) / longest;
    cv::resize(src, out, {std::max(1, static_cast<int>(src.cols * f)), std::max(1, static_cast<int>(src.rows * f))},
               0, 0, cv::INTER_AREA);
  }
  return out;
}

}  // namespace

std::string component_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "component_%02d.png", index);
  return buf;
}

std::vector<unsigned char> to_gray8(const RowMatrix& m, bool log1p_scale) {
  std::vector<double> v(m.data(), m.data() + m.size());
  if (log1p_scale && !v.empty()) {
    // Relative to the maximum, so the display does not depend on how NMF
    // happened to split scale between W and H.
    const double top = *std::max_element(v.begin(), v.end());
    const double gain = top > 0.0 ? kLogGain / top : 0.0;
    for (double& x : v) x = std::log1p(gain * std::max(x, 0.0));
  }
  std::vector<unsigned char> out(v.size(), 128);
  if (v.empty()) return out;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double a = *lo, range = *hi - *lo;
  if (!(range > 0.0) || !std::isfinite(range)) return out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<unsigned char>(std::lround(255.0 * (v[i] - a) / range));
  }
  return out;
}

ScreePlotLayout render_scree_plot(std::span<const double> variance_ratio, std::span<const int> candidates,
                                  int auto_k, const std::filesystem::path& path) {
  ScreePlotLayout layout;
  layout.width = 720;
  layout.height = 480;
  const int left = 80, right = 24, top = 48, bottom = 56;
  const int pw = layout.width - left - right, ph = layout.height - top - bottom;
  cv::Mat img(layout.height, layout.width, CV_8UC3, cv::Scalar(255, 255, 255));

  const int m = static_cast<int>(variance_ratio.size());
  int e_lo = -1, e_hi = 0;
  if (m > 0) {
    const auto [mn, mx] = std::minmax_element(variance_ratio.begin(), variance_ratio.end());
    e_lo = static_cast<int>(std::floor(std::log10(*mn)));
    e_hi = static_cast<int>(std::ceil(std::log10(*mx)));
    if (e_hi <= e_lo) e_hi = e_lo + 1;
  }
  auto ypix = [&](double log_v) {
    return top + static_cast<int>(std::lround((e_hi - log_v) / (e_hi - e_lo) * ph));
  };
  auto xpix = [&](int component) {
    return left + static_cast<int>(std::lround((component - 0.5) / std::max(m, 1) * pw));
  };

  for (int e = e_lo; e <= e_hi; ++e) {
    const int y = ypix(e);
    cv::line(img, {left, y}, {left + pw, y}, kGrid, 1, cv::LINE_8);
    put_text(img, decade_label(e), left - 8 - text_width(decade_label(e)), y + 5);
  }
  cv::rectangle(img, {left, top}, {left + pw, top + ph}, kBlack, 1, cv::LINE_8);
  const int tick_every = m > 20 ? 5 : 1;
  for (int c = 1; c <= m; ++c) {
    if (c % tick_every != 0 && c != 1) continue;
    const int x = xpix(c);
    cv::line(img, {x, top + ph}, {x, top + ph + 5}, kBlack, 1, cv::LINE_8);
    const std::string s = std::to_string(c);
    put_text(img, s, x - text_width(s) / 2, top + ph + 20);
  }
  put_text(img, "component", left + pw / 2 - text_width("component") / 2, layout.height - 12);
  put_text(img, "variance ratio", 8, 20);

  for (int c = 1; c <= m; ++c) {
    const PixelPoint p{xpix(c), ypix(std::log10(variance_ratio[c - 1]))};
    layout.points.push_back(p);
    cv::circle(img, {p.x, p.y}, 4, kPoint, cv::FILLED, cv::LINE_8);
  }
  for (int c : candidates) {
    if (c < 1 || c > m) continue;
    const PixelPoint p = layout.points[c - 1];
    cv::circle(img, {p.x, p.y}, 9, kMark, 2, cv::LINE_8);
    put_text(img, std::to_string(c), p.x + 8, p.y - 10, 0.4, kMark);
    layout.marked.push_back(c);
  }

  std::string title = "PCA scree plot";
  if (!candidates.empty()) title += ", auto k = " + std::to_string(auto_k);
  put_text(img, title, left + pw / 2 - text_width(title, 0.55) / 2, 32, 0.55);
  if (candidates.empty()) {
    layout.warning = true;
    const std::string warn = "warning: no elbow candidate found, k defaults to 1";
    put_text(img, warn, left + pw - text_width(warn) - 8, top + 20, 0.45, kMark);
  }
  save_png(img, path);
  return layout;
}

void render_component_panel(const RowMatrix& map, const RowMatrix& factor, int index,
                            const std::string& caption, const std::optional<PeakInfo>& peak,
                            const std::filesystem::path& path) {
  constexpr int box = 256, pad = 16, header = 36, footer = 44;
  cv::Mat img(header + box + footer, 3 * pad + 2 * box, CV_8UC3, cv::Scalar(255, 255, 255));

  cv::Mat left, right;
  cv::cvtColor(fit_box(gray_mat(map, false), box), left, cv::COLOR_GRAY2BGR);
  cv::Mat spec = fit_box(gray_mat(factor, true), box);
  cv::cvtColor(spec, right, cv::COLOR_GRAY2BGR);
  if (peak && factor.rows() > 0) {
    const double s = static_cast<double>(spec.cols) / factor.cols();
    const int c = static_cast<int>(factor.cols() / 2);
    const cv::Point at(static_cast<int>((c + peak->offset_x + 0.5) * s),
                       static_cast<int>((c + peak->offset_y + 0.5) * s));
    cv::circle(right, at, 7, kMark, 1, cv::LINE_8);
  }
  left.copyTo(img(cv::Rect(pad, header, left.cols, left.rows)));
  right.copyTo(img(cv::Rect(2 * pad + box, header, right.cols, right.rows)));

  char title[64];
  std::snprintf(title, sizeof title, "component %02d", index);
  put_text(img, std::string(title) + ": loading", pad, 24);
  put_text(img, "factor (log1p)", 2 * pad + box, 24);
  put_text(img, caption, pad, header + box + 28, 0.42);
  save_png(img, path);
}

std::vector<std::filesystem::path> render_component_panels(const std::vector<RowMatrix>& maps,
                                                           const std::vector<RowMatrix>& factors,
                                                           const std::vector<std::string>& captions,
                                                           const std::vector<std::optional<PeakInfo>>& peaks,
                                                           const std::filesystem::path& dir) {
  if (maps.size() != factors.size() || maps.size() != captions.size() || maps.size() != peaks.size()) {
    throw GeometryError("component panels: maps, factors, captions and peaks differ in count");
  }
  std::vector<std::filesystem::path> paths;
  for (std::size_t j = 0; j < maps.size(); ++j) {
    const int index = static_cast<int>(j) + 1;
    paths.push_back(dir / component_file_name(index));
    render_component_panel(maps[j], factors[j], index, captions[j], peaks[j], paths.back());
  }
  return paths;
}

void render_sweep_plot(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  constexpr int width = 560, height = 380, left = 64, right = 24, top = 44, bottom = 56;
  const int pw = width - left - right, ph = height - top - bottom;
  cv::Mat img(height, width, CV_8UC3, cv::Scalar(255, 255, 255));

  std::vector<const SweepRow*> ok;
  for (const auto& r : rows) {
    if (r.ok) ok.push_back(&r);
  }
  int kmax = 1;
  double lmin = 0.0, lmax = 1.0;
  if (!ok.empty()) {
    lmin = lmax = std::log2(ok.front()->elemsize);
    for (const auto* r : ok) {
      kmax = std::max(kmax, r->auto_k);
      lmin = std::min(lmin, std::log2(r->elemsize));
      lmax = std::max(lmax, std::log2(r->elemsize));
    }
    if (lmax <= lmin) {
      lmin -= 0.5;
      lmax += 0.5;
    }
  }
  const int ktop = kmax + 1;
  auto xpix = [&](int size) {
    return left + static_cast<int>(std::lround((std::log2(size) - lmin) / (lmax - lmin) * pw));
  };
  auto ypix = [&](int k) { return top + ph - static_cast<int>(std::lround(static_cast<double>(k) / ktop * ph)); };

  for (int k = 0; k <= ktop; ++k) {
    const int y = ypix(k);
    cv::line(img, {left, y}, {left + pw, y}, kGrid, 1, cv::LINE_8);
    put_text(img, std::to_string(k), left - 10 - text_width(std::to_string(k)), y + 5);
  }
  cv::rectangle(img, {left, top}, {left + pw, top + ph}, kBlack, 1, cv::LINE_8);
  for (std::size_t i = 0; i < ok.size(); ++i) {
    const cv::Point p(xpix(ok[i]->elemsize), ypix(ok[i]->auto_k));
    if (i > 0) cv::line(img, {xpix(ok[i - 1]->elemsize), ypix(ok[i - 1]->auto_k)}, p, kPoint, 2, cv::LINE_8);
    cv::circle(img, p, 5, kPoint, cv::FILLED, cv::LINE_8);
    const std::string s = std::to_string(ok[i]->elemsize);
    put_text(img, s, p.x - text_width(s) / 2, top + ph + 20);
  }
  put_text(img, "elemsize (px)", left + pw / 2 - text_width("elemsize (px)") / 2, height - 12);
  put_text(img, "auto k from scree plot", left, 28, 0.55);
  save_png(img, path);
}

}  // namespace locfft
