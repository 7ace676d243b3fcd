#include "locfft/pipeline.hpp"

#include <glob.h>
#include <omp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <thread>

#include <Eigen/Core>

#include "locfft/characterize.hpp"
#include "locfft/image_io.hpp"
#include "locfft/nmf.hpp"
#include "locfft/pca.hpp"
#include "locfft/plots.hpp"
#include "locfft/window_fft.hpp"

namespace locfft {
namespace {

using Clock = std::chrono::steady_clock;

// Runs `fn` as stage `name`, recording its wall time and turning library
// errors into StageError.
template <class Fn>
auto stage(RunReport& report, const char* name, Fn&& fn) {
  const auto t0 = Clock::now();
  auto record = [&] {
    report.timings.push_back({name, std::chrono::duration<double>(Clock::now() - t0).count()});
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record();
    } else {
      auto result = fn();
      record();
      return result;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::bad_alloc&) {
    throw StageError(name, "out of memory", 1);
  } catch (const Error& e) {
    throw StageError(name, e.what(), exit_code_for(e));
  }
}

}  // namespace

int exit_code_for(const std::exception& e) noexcept {
  if (const auto* s = dynamic_cast<const StageError*>(&e)) return s->exit_code();
  if (dynamic_cast<const NumericalError*>(&e)) return 2;
  return 1;
}

void validate(const RunConfig& cfg) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
  };
  require(cfg.elemsize >= 8, "elemsize must be >= 8");
  require(cfg.xstep >= 1 && cfg.ystep >= 1, "xstep and ystep must be >= 1");
  require(!cfg.components || *cfg.components >= 1, "components must be >= 1");
  require(cfg.n_scree >= 1, "n-scree must be >= 1");
  require(cfg.max_iter >= 0, "max-iter must be >= 0");
  require(cfg.tol >= 0.0, "tol must be >= 0");
  require(!cfg.pixel_size_nm || *cfg.pixel_size_nm > 0.0, "pixel-size-nm must be > 0");
  require(cfg.dc_exclusion >= 1.0, "dc-exclusion must be >= 1");
  require(cfg.isotropy_threshold > 0.0, "isotropy-threshold must be > 0");
  require(cfg.threads >= 0, "threads must be >= 0");
  for (int s : cfg.sweep) require(s >= 8, "sweep sizes must be >= 8");
  std::vector<int> sorted = cfg.sweep;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "sweep sizes must be distinct");
}

int resolved_threads(const RunConfig& cfg) { return cfg.threads > 0 ? cfg.threads : omp_get_num_procs(); }

RunReport run_single(const RunConfig& cfg, const std::filesystem::path& input,
                     const std::filesystem::path& out_dir) {
  RunReport report;
  stage(report, "config", [&] { validate(cfg); });
  report.timings.clear();
  report.tool_version = tool_version();
  report.input_path = input.generic_string();
  report.config = cfg;

  GrayImage img = stage(report, "load", [&] { return load_image(input); });
  report.input_width = img.width;
  report.input_height = img.height;
  if (cfg.pixel_size_nm) {
    img.pixel_size_nm = cfg.pixel_size_nm;
    report.pixel_size_source = "flag";
  } else if (img.pixel_size_nm) {
    report.pixel_size_source = "file";
  }
  if (cfg.rescale_2048) {
    img = stage(report, "rescale", [&] { return rescale_width(img, kCanonicalWidth); });
  }
  report.analysed_width = img.width;
  report.analysed_height = img.height;
  report.pixel_size_nm = img.pixel_size_nm;

  const WindowGrid grid =
      stage(report, "grid", [&] { return plan_grid(img.width, img.height, cfg.elemsize, cfg.xstep, cfg.ystep); });
  report.grid_nx = grid.nx();
  report.grid_ny = grid.ny();
  report.n_windows = grid.n_windows();

  SpectrumStack stack = stage(report, "spectra", [&] { return build_dataset(img, grid); });

  PcaOptions pca_opts;
  pca_opts.n_keep = cfg.n_scree;
  pca_opts.smooth_scree = cfg.scree_smooth;
  {
    const ScreeData scree = stage(report, "pca", [&] { return fit_pca(stack, pca_opts); });
    report.variance_ratio = scree.variance_ratio;
    report.candidates = scree.candidates;
    report.auto_k = scree.auto_k;
    report.auto_k_fallback = scree.auto_k_fallback;
    report.pca_exact = scree.exact;
  }
  report.k = cfg.components.value_or(report.auto_k);
  report.k_source = cfg.components ? "override" : "auto";

  NmfOptions nmf_opts;
  nmf_opts.max_iter = cfg.max_iter;
  nmf_opts.tol = cfg.tol;
  const Decomposition dec =
      stage(report, "nmf", [&] { return order_components(nmf_fit(stack.X, report.k, nmf_opts)); });
  report.nmf_iterations = dec.iterations_run;
  report.nmf_converged = dec.converged;
  report.objective_trace = dec.objective_trace;
  stack.X.resize(0, 0);

  PeakOptions peak_opts;
  peak_opts.dc_exclusion_radius = cfg.dc_exclusion;
  peak_opts.isotropy_threshold = cfg.isotropy_threshold;
  const ComponentImages images = stage(report, "characterize", [&] {
    ComponentImages out = reshape_outputs(dec, grid);
    const auto energy = component_energy(dec);
    for (int j = 0; j < dec.k; ++j) {
      ComponentReport c;
      c.index = j + 1;
      c.energy = energy[j];
      try {
        c.peak = find_peak(out.factors[j], peak_opts, img.pixel_size_nm);
      } catch (const DegenerateError& e) {
        c.peak_error = e.what();
      }
      report.components.push_back(std::move(c));
    }
    return out;
  });

  if (!cfg.sweep.empty()) {
    report.sweep = stage(report, "sweep", [&] {
      return sweep_elemsize(img, cfg.sweep, cfg.xstep, cfg.ystep, pca_opts);
    });
  }

  stage(report, "write", [&] {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    write_tiff_stack(images.maps, out_dir / "loadings.tif");
    write_tiff_stack(images.factors, out_dir / "factors.tif");
    render_scree_plot(report.variance_ratio, report.candidates, report.auto_k, out_dir / "scree.png");
    std::vector<std::string> captions;
    std::vector<std::optional<PeakInfo>> peaks;
    for (const auto& c : report.components) {
      captions.push_back(format_peak(c.peak));
      peaks.push_back(c.peak);
    }
    render_component_panels(images.maps, images.factors, captions, peaks, out_dir);
    if (!report.sweep.empty()) {
      write_sweep_csv(report.sweep, out_dir / "sweep.csv");
      render_sweep_plot(report.sweep, out_dir / "sweep.png");
    }
  });
  stage(report, "report", [&] { write_report(report, out_dir); });
  return report;
}

RunReport run_single(const RunConfig& cfg, const std::filesystem::path& input) {
  return run_single(cfg, input, cfg.out_dir / report_dir_names({input}).front());
}

std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& patterns) {
  std::vector<std::filesystem::path> out;
  for (const auto& p : patterns) {
    if (std::filesystem::exists(p)) {
      out.emplace_back(p);
      continue;
    }
    glob_t g{};
    const int rc = ::glob(p.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
    if (rc != 0) throw ParameterError("no input matches '" + p + "'");
  }
  return out;
}

std::vector<std::string> report_dir_names(const std::vector<std::filesystem::path>& inputs) {
  std::map<std::string, int> seen;
  std::vector<std::string> names;
  for (const auto& in : inputs) {
    std::string stem = in.stem().string();
    if (stem.empty()) stem = "input";
    const int n = ++seen[stem];
    names.push_back(n == 1 ? stem : stem + "_" + std::to_string(n));
  }
  return names;
}

BatchSummary run_batch(const RunConfig& cfg) {
  validate(cfg);
  const auto inputs = expand_inputs(cfg.inputs);
  if (inputs.empty()) throw ParameterError("no inputs given");
  const auto names = report_dir_names(inputs);

  BatchSummary summary;
  summary.entries.resize(inputs.size());
  const int threads = resolved_threads(cfg);
  const int workers = std::clamp(static_cast<int>(inputs.size()), 1, threads);
  // Kernels are thread-count independent, so splitting threads between
  // concurrent inputs does not change any output.
  const int inner = std::max(1, threads / workers);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    omp_set_num_threads(inner);
    for (std::size_t i = next++; i < inputs.size(); i = next++) {
      BatchEntry& e = summary.entries[i];
      e.input = inputs[i].generic_string();
      const auto t0 = Clock::now();
      try {
        const RunReport r = run_single(cfg, inputs[i], cfg.out_dir / names[i]);
        e.ok = true;
        e.k = r.k;
        e.report_dir = names[i];
      } catch (const std::exception& err) {
        e.error = err.what();
        e.exit_code = exit_code_for(err);
      }
      e.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  for (const auto& e : summary.entries) summary.exit_code = std::max(summary.exit_code, e.exit_code);
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create " + cfg.out_dir.string() + ": " + ec.message());
  write_batch_index(summary.entries, cfg.out_dir / "index.html");
  return summary;
}

}  // namespace locfft
