#include "locfft/cli.hpp"

#include <omp.h>

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "locfft/pipeline.hpp"

namespace locfft {

ParsedArgs parse_args(int argc, const char* const* argv) {
  ParsedArgs out;
  RunConfig& c = out.config;
  std::string out_dir = c.out_dir.string();

  CLI::App app{"Local FFT + PCA + NMF analysis of microscope images"};
  app.set_version_flag("--version", tool_version());
  app.set_config("--config", "", "Flat key = value file; command-line flags take precedence");
  app.add_option("inputs", c.inputs, "Image files or glob patterns")->required();
  app.add_option("--elemsize", c.elemsize, "Window side in pixels")->capture_default_str();
  app.add_option("--xstep", c.xstep, "Horizontal window step in pixels")->capture_default_str();
  app.add_option("--ystep", c.ystep, "Vertical window step in pixels")->capture_default_str();
  app.add_option("--components", c.components, "Number of NMF components (default: auto from the scree plot)");
  app.add_option("--n-scree", c.n_scree, "Principal components kept for the scree plot")->capture_default_str();
  app.add_flag("--scree-smooth", c.scree_smooth, "3-point smoothing of the log scree before elbow search");
  app.add_flag("--rescale-2048", c.rescale_2048, "Bilinear rescale to width 2048 before analysis");
  app.add_option("--pixel-size-nm", c.pixel_size_nm, "Physical pixel size; overrides the file's value");
  app.add_option("--max-iter", c.max_iter, "NMF iteration cap")->capture_default_str();
  app.add_option("--tol", c.tol, "NMF relative objective decrease for convergence")->capture_default_str();
  app.add_option("--dc-exclusion", c.dc_exclusion, "Peak search ignores bins within this radius of DC")
      ->capture_default_str();
  app.add_option("--isotropy-threshold", c.isotropy_threshold, "Ring max/mean below this marks a peak isotropic")
      ->capture_default_str();
  app.add_option("--sweep", c.sweep, "Window sizes for an elemsize sweep, e.g. 16,32,64,128,256,512")
      ->delimiter(',');
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", c.threads, "Worker threads (0: all cores)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    out.exit_code = rc == 0 ? 0 : 1;
    return out;
  }
  c.out_dir = out_dir;
  return out;
}

int run_cli(int argc, const char* const* argv) {
  ParsedArgs args = parse_args(argc, argv);
  if (args.exit_code) return *args.exit_code;
  const RunConfig& cfg = args.config;
  try {
    validate(cfg);
  } catch (const Error& e) {
    std::cerr << "locfft: " << e.what() << "\n";
    return 1;
  }
  const int threads = resolved_threads(cfg);
  omp_set_num_threads(threads);
  Eigen::setNbThreads(threads);

  BatchSummary summary;
  try {
    summary = run_batch(cfg);
  } catch (const Error& e) {
    std::cerr << "locfft: " << e.what() << "\n";
    return 1;
  }
  for (const auto& e : summary.entries) {
    if (e.ok) {
      std::printf("ok    %s  k=%d  %.2f s  -> %s\n", e.input.c_str(), e.k, e.seconds,
                  (cfg.out_dir / e.report_dir).string().c_str());
    } else {
      std::printf("FAIL  %s  %.2f s  %s\n", e.input.c_str(), e.seconds, e.error.c_str());
    }
  }
  std::fflush(stdout);
  return summary.exit_code;
}

}  // namespace locfft
