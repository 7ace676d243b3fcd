#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "locfft/errors.hpp"
#include "locfft/image_io.hpp"
#include "locfft/plots.hpp"
#include "locfft/report.hpp"
#include "schema_check.hpp"

using namespace locfft;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "locfft_test_report" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json load_schema() { return nlohmann::json::parse(slurp(LOCFFT_SCHEMA)); }

PeakInfo sample_peak(std::optional<double> pixel_nm) {
  PeakInfo p;
  p.offset_x = 0;
  p.offset_y = 16;
  p.radius_bins = 16.0;
  p.angle_deg = 90.0;
  p.spacing_window_px = 8.0;
  p.spacing_nm = pixel_nm ? std::optional<double>(8.0 * *pixel_nm) : std::nullopt;
  p.peak_value = 1234.5;
  p.isotropy_ratio = 7.25;
  return p;
}

RunReport sample_report(std::optional<double> pixel_nm) {
  RunReport r;
  r.tool_version = tool_version();
  r.input_path = "sample.tif";
  r.input_width = r.analysed_width = 512;
  r.input_height = r.analysed_height = 384;
  r.pixel_size_nm = pixel_nm;
  r.pixel_size_source = pixel_nm ? "flag" : "none";
  r.config.inputs = {"sample.tif"};
  r.grid_nx = 7;
  r.grid_ny = 5;
  r.n_windows = 35;
  r.variance_ratio = {0.9, 0.05, 0.03, 0.01, 0.005};
  r.candidates = {3};
  r.auto_k = 3;
  r.k = 2;
  r.k_source = "override";
  r.nmf_iterations = 12;
  r.nmf_converged = true;
  r.objective_trace = {10.0, 5.0, 4.0};
  ComponentReport c1{1, 2.5, sample_peak(pixel_nm), ""};
  ComponentReport c2{2, 1.0, std::nullopt, "factor spectrum has no energy outside the DC exclusion disc"};
  r.components = {c1, c2};
  SweepRow ok_row{64, true, 35, 3, {3}, ""};
  SweepRow bad_row{1024, false, 0, 1, {}, "elemsize 1024 exceeds image width 512"};
  r.sweep = {ok_row, bad_row};
  r.timings = {{"load", 0.1}, {"nmf", 1.5}};
  return r;
}

cv::Mat read_png(const fs::path& p) {
  cv::Mat m = cv::imread(p.string(), cv::IMREAD_UNCHANGED);
  EXPECT_FALSE(m.empty()) << p;
  return m;
}

}  // namespace

TEST(TiffStack, RoundTripAndPageCount) {
  const fs::path dir = fresh_dir("stack");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  for (int k : {1, 3, 7}) {
    std::vector<RowMatrix> pages;
    for (int j = 0; j < k; ++j) {
      RowMatrix m(9, 13);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(u(rng));
      pages.push_back(m);
    }
    write_tiff_stack(pages, dir / "s.tif");
    const auto back = read_tiff_stack(dir / "s.tif");
    ASSERT_EQ(back.size(), static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) EXPECT_TRUE((back[j].array() == pages[j].array()).all());
  }
}

TEST(TiffStack, SingleHalfPixel) {
  const fs::path dir = fresh_dir("half");
  write_tiff_stack({RowMatrix::Constant(1, 1, 0.5)}, dir / "h.tif");
  const auto back = read_tiff_stack(dir / "h.tif");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0](0, 0), 0.5);
}

TEST(TiffStack, Errors) {
  EXPECT_THROW(write_tiff_stack({}, fresh_dir("err") / "x.tif"), ParameterError);
  RowMatrix bad = RowMatrix::Zero(2, 2);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(write_tiff_stack({bad}, fresh_dir("err") / "x.tif"), ParameterError);
  EXPECT_THROW(write_tiff_stack({RowMatrix::Zero(2, 2)}, "/nonexistent/dir/x.tif"), IoError);
}

TEST(ScreePlot, ThirtyPointsMonotone) {
  const fs::path dir = fresh_dir("scree");
  std::vector<double> r;
  for (int i = 0; i < 30; ++i) r.push_back(0.5 * std::pow(0.7, i));
  const std::vector<int> cands{4, 9};
  const ScreePlotLayout layout = render_scree_plot(r, cands, 4, dir / "scree.png");
  ASSERT_EQ(layout.points.size(), 30u);
  EXPECT_EQ(layout.marked, cands);
  EXPECT_FALSE(layout.warning);
  for (std::size_t i = 1; i < layout.points.size(); ++i) {
    EXPECT_GT(layout.points[i].x, layout.points[i - 1].x);
    EXPECT_GT(layout.points[i].y, layout.points[i - 1].y);
  }
  const cv::Mat img = read_png(dir / "scree.png");
  ASSERT_EQ(img.cols, layout.width);
  ASSERT_EQ(img.rows, layout.height);
  for (const auto& p : layout.points) {
    const cv::Vec3b px = img.at<cv::Vec3b>(p.y, p.x);
    EXPECT_EQ(px, cv::Vec3b(160, 80, 20)) << p.x << "," << p.y;
  }
}

TEST(ScreePlot, WarningWithoutCandidates) {
  const fs::path dir = fresh_dir("scree_warn");
  const std::vector<double> r{0.5, 0.25, 0.125, 0.0625};
  const ScreePlotLayout layout = render_scree_plot(r, std::vector<int>{}, 1, dir / "scree.png");
  EXPECT_TRUE(layout.warning);
  EXPECT_TRUE(layout.marked.empty());
  // The warning text is drawn in the ring colour, but no point carries a ring.
  const cv::Mat img = read_png(dir / "scree.png");
  int red = 0;
  for (const auto& p : layout.points) {
    for (int y = p.y - 12; y <= p.y + 12; ++y) {
      for (int x = p.x - 12; x <= p.x + 12; ++x) red += img.at<cv::Vec3b>(y, x) == cv::Vec3b(40, 40, 220);
    }
  }
  EXPECT_EQ(red, 0);
}

TEST(ScreePlot, GoldenFile) {
  const fs::path dir = fresh_dir("golden");
  std::vector<double> r;
  for (int i = 0; i < 30; ++i) r.push_back(i < 3 ? std::pow(10.0, -i) : 1e-3 * std::pow(0.8, i - 3));
  render_scree_plot(r, std::vector<int>{3}, 3, dir / "scree.png");
  const fs::path golden = fs::path(LOCFFT_TEST_DATA) / "scree_golden.png";
  if (std::getenv("LOCFFT_UPDATE_GOLDEN")) fs::copy_file(dir / "scree.png", golden, fs::copy_options::overwrite_existing);
  ASSERT_TRUE(fs::exists(golden)) << "run once with LOCFFT_UPDATE_GOLDEN=1 and review " << golden;
  const cv::Mat a = read_png(dir / "scree.png"), b = read_png(golden);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(cv::norm(a, b, cv::NORM_INF), 0.0);
}

TEST(Panels, OneFilePerComponent) {
  const fs::path dir = fresh_dir("panels");
  std::vector<RowMatrix> maps, factors;
  std::vector<std::string> captions;
  std::vector<std::optional<PeakInfo>> peaks;
  for (int j = 0; j < 3; ++j) {
    maps.push_back(RowMatrix::Random(5, 7).cwiseAbs());
    RowMatrix f = RowMatrix::Zero(32, 32);
    f(16, 16 + 4 + j) = 1.0;
    factors.push_back(f);
    captions.push_back("component " + std::to_string(j + 1));
    peaks.push_back(std::nullopt);
  }
  const auto files = render_component_panels(maps, factors, captions, peaks, dir);
  ASSERT_EQ(files.size(), 3u);
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(files[j].filename(), component_file_name(j + 1));
    EXPECT_TRUE(fs::exists(files[j]));
  }
  EXPECT_EQ(component_file_name(12), "component_12.png");
  captions.pop_back();
  EXPECT_THROW(render_component_panels(maps, factors, captions, peaks, dir), GeometryError);
}

TEST(Panels, ConstantMapIsUniform) {
  for (bool log_scale : {false, true}) {
    for (double v : {0.0, 3.0, 1e300}) {
      const auto g = to_gray8(RowMatrix::Constant(4, 6, v), log_scale);
      for (unsigned char b : g) ASSERT_EQ(b, 128) << v;
    }
  }
  const fs::path dir = fresh_dir("constant");
  render_component_panel(RowMatrix::Constant(6, 6, 2.0), RowMatrix::Constant(16, 16, 1.0), 1, "flat", std::nullopt,
                         dir / "p.png");
  EXPECT_FALSE(read_png(dir / "p.png").empty());
}

TEST(Panels, LinearScaleSpansFullRange) {
  RowMatrix m(1, 3);
  m << -2.0, 0.0, 2.0;
  EXPECT_EQ(to_gray8(m, false), (std::vector<unsigned char>{0, 128, 255}));
}

TEST(Annotation, MatchesJsonValues) {
  const RunReport r = sample_report(1.805);
  const auto j = nlohmann::json::parse(report_json(r));
  const auto& c = j["components"][0];
  EXPECT_EQ(c["annotation"].get<std::string>(), format_peak(r.components[0].peak));
  char expect[160];
  std::snprintf(expect, sizeof expect, "r = %.2f bins, angle = %.1f deg, spacing = %.2f px / %.2f nm",
                c["peak"]["radius_bins"].get<double>(), c["peak"]["angle_deg"].get<double>(),
                c["peak"]["spacing_px"].get<double>(), c["peak"]["spacing_nm"].get<double>());
  EXPECT_EQ(c["annotation"].get<std::string>(), expect);
  EXPECT_EQ(j["components"][1]["annotation"].get<std::string>(), format_peak(std::nullopt));
  EXPECT_TRUE(j["components"][1]["peak"].is_null());
}

TEST(Annotation, MissingPixelSize) {
  const RunReport r = sample_report(std::nullopt);
  const auto j = nlohmann::json::parse(report_json(r));
  EXPECT_FALSE(j["components"][0]["peak"].contains("spacing_nm"));
  EXPECT_FALSE(j["input"].contains("pixel_size_nm"));
  EXPECT_NE(j["components"][0]["annotation"].get<std::string>().find("n/a"), std::string::npos);
  const fs::path dir = fresh_dir("nopixel");
  write_report(r, dir);
  const std::string html = slurp(dir / "report.html");
  EXPECT_NE(html.find("<td>n/a</td>"), std::string::npos);
  EXPECT_EQ(format_spacing_nm(std::nullopt), "n/a");
  EXPECT_EQ(format_spacing_nm(14.444), "14.44 nm");
}

TEST(ReportJson, ValidatesAgainstSchema) {
  const auto schema = load_schema();
  for (auto px : {std::optional<double>(1.805), std::optional<double>()}) {
    const auto doc = nlohmann::json::parse(report_json(sample_report(px)));
    const auto errors = schema_check::validate(schema, doc);
    EXPECT_TRUE(errors.empty()) << errors.front();
  }
}

TEST(ReportJson, SchemaRejectsBrokenDocuments) {
  const auto schema = load_schema();
  auto doc = nlohmann::json::parse(report_json(sample_report(1.0)));
  auto missing = doc;
  missing.erase("nmf");
  EXPECT_FALSE(schema_check::validate(schema, missing).empty());
  auto extra = doc;
  extra["grid"]["surprise"] = 1;
  EXPECT_FALSE(schema_check::validate(schema, extra).empty());
  auto bad_peak = doc;
  bad_peak["components"][0]["peak"]["angle_deg"] = 200.0;
  EXPECT_FALSE(schema_check::validate(schema, bad_peak).empty());
  auto bad_type = doc;
  bad_type["nmf"]["k"] = "two";
  EXPECT_FALSE(schema_check::validate(schema, bad_type).empty());
}

TEST(ReportJson, StableExceptVolatileFields) {
  RunReport a = sample_report(2.0), b = sample_report(2.0);
  b.timings = {{"load", 9.0}};
  EXPECT_EQ(report_json(a), report_json(a));
  auto ja = nlohmann::ordered_json::parse(report_json(a));
  auto jb = nlohmann::ordered_json::parse(report_json(b));
  EXPECT_NE(ja, jb);
  for (const auto& f : volatile_report_fields()) {
    ja.erase(f);
    jb.erase(f);
  }
  EXPECT_EQ(ja.dump(), jb.dump());
  const auto listed = nlohmann::json::parse(report_json(a))["volatile_fields"];
  EXPECT_EQ(listed.get<std::vector<std::string>>(), volatile_report_fields());
}

TEST(ReportJson, EchoesConfig) {
  RunReport r = sample_report(1.0);
  r.config.elemsize = 96;
  r.config.components = 7;
  r.config.sweep = {16, 32};
  r.config.out_dir = "elsewhere";
  const auto j = nlohmann::json::parse(report_json(r));
  EXPECT_EQ(j["config"]["elemsize"], 96);
  EXPECT_EQ(j["config"]["components"], 7);
  EXPECT_EQ(j["config"]["sweep"], nlohmann::json::array({16, 32}));
  EXPECT_EQ(j["config"]["out"], "elsewhere");
  EXPECT_TRUE(j["config"]["pixel_size_nm"].is_null());
  EXPECT_EQ(j["scree"]["variance_ratio"].size(), r.variance_ratio.size());
  EXPECT_EQ(j["nmf"]["objective_initial"], 10.0);
  EXPECT_EQ(j["nmf"]["objective_final"], 4.0);
}

TEST(WriteReport, HtmlEmbedsImages) {
  const fs::path dir = fresh_dir("html");
  const RunReport r = sample_report(1.805);
  render_scree_plot(r.variance_ratio, r.candidates, r.auto_k, dir / "scree.png");
  write_report(r, dir);
  const std::string html = slurp(dir / "report.html");
  EXPECT_NE(html.find("data:image/png;base64,"), std::string::npos);
  EXPECT_NE(html.find(format_peak(r.components[0].peak)), std::string::npos);
  EXPECT_NE(html.find("exceeds image width"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
}

TEST(SweepCsv, RowsAndFailures) {
  const fs::path dir = fresh_dir("csv");
  const RunReport r = sample_report(1.0);
  write_sweep_csv(r.sweep, dir / "sweep.csv");
  const std::string csv = slurp(dir / "sweep.csv");
  EXPECT_EQ(csv, "elemsize,n_windows,auto_k,candidates,status\n64,35,3,3,ok\n"
                 "1024,0,1,,elemsize 1024 exceeds image width 512\n");
  render_sweep_plot(r.sweep, dir / "sweep.png");
  EXPECT_FALSE(read_png(dir / "sweep.png").empty());
}

TEST(BatchIndex, LinksEachReport) {
  const fs::path dir = fresh_dir("index");
  std::vector<BatchEntry> e{{"a.png", "a", true, 0, 2, 1.0, ""},
                            {"b.png", "b", true, 0, 3, 1.5, ""},
                            {"c.png", "", false, 1, 0, 0.1, "load: TIFF: bad magic number 0"}};
  write_batch_index(e, dir / "index.html");
  const std::string html = slurp(dir / "index.html");
  EXPECT_NE(html.find("href=\"a/report.html\""), std::string::npos);
  EXPECT_NE(html.find("href=\"b/report.html\""), std::string::npos);
  EXPECT_EQ(html.find("c/report.html"), std::string::npos);
  EXPECT_NE(html.find("bad magic number"), std::string::npos);
}
