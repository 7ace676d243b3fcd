#include "locfft/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "locfft/errors.hpp"
#include "locfft/image_io.hpp"
#include "locfft/plots.hpp"
#include "locfft/tiff.hpp"

#ifndef LOCFFT_VERSION_STRING
#define LOCFFT_VERSION_STRING "0.0.0"
#endif

namespace locfft {
namespace {

using ojson = nlohmann::ordered_json;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

template <class T>
ojson optional_json(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

ojson peak_json(const PeakInfo& p) {
  ojson j;
  j["offset_x"] = p.offset_x;
  j["offset_y"] = p.offset_y;
  j["radius_bins"] = p.radius_bins;
  j["angle_deg"] = p.angle_deg;
  j["spacing_px"] = p.spacing_window_px;
  if (p.spacing_nm) j["spacing_nm"] = *p.spacing_nm;
  j["peak_value"] = p.peak_value;
  j["isotropy_ratio"] = p.isotropy_ratio;
  j["isotropic"] = p.isotropic;
  return j;
}

ojson config_json(const RunConfig& c) {
  ojson j;
  j["inputs"] = c.inputs;
  j["elemsize"] = c.elemsize;
  j["xstep"] = c.xstep;
  j["ystep"] = c.ystep;
  j["rescale_2048"] = c.rescale_2048;
  j["components"] = optional_json(c.components);
  j["n_scree"] = c.n_scree;
  j["scree_smooth"] = c.scree_smooth;
  j["max_iter"] = c.max_iter;
  j["tol"] = c.tol;
  j["pixel_size_nm"] = optional_json(c.pixel_size_nm);
  j["dc_exclusion"] = c.dc_exclusion;
  j["isotropy_threshold"] = c.isotropy_threshold;
  j["out"] = c.out_dir.generic_string();
  j["sweep"] = c.sweep;
  j["threads"] = c.threads;
  return j;
}

ojson sweep_row_json(const SweepRow& r) {
  ojson j;
  j["elemsize"] = r.elemsize;
  j["ok"] = r.ok;
  j["n_windows"] = r.n_windows;
  j["auto_k"] = r.auto_k;
  j["candidates"] = r.candidates;
  if (!r.ok) j["error"] = r.error;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string base64(const std::vector<unsigned char>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string embedded_png(const std::filesystem::path& path, const std::string& alt) {
  if (!std::filesystem::exists(path)) return "<p>(" + html_escape(alt) + " not rendered)</p>";
  return "<img alt=\"" + html_escape(alt) + "\" src=\"data:image/png;base64," + base64(read_file_bytes(path)) +
         "\">";
}

constexpr const char* kStyle =
    "body{font-family:sans-serif;margin:2em;max-width:70em}"
    "table{border-collapse:collapse;margin:1em 0}"
    "td,th{border:1px solid #bbb;padding:.2em .6em;text-align:left}"
    "th{background:#eee}img{display:block;margin:.5em 0}.fail{color:#b00}";

std::string html_head(const std::string& title) {
  return "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>" + html_escape(title) +
         "</title>\n<style>" + kStyle + "</style>\n</head>\n<body>\n";
}

}  // namespace

const char* tool_version() { return LOCFFT_VERSION_STRING; }

const std::vector<std::string>& volatile_report_fields() {
  static const std::vector<std::string> fields{"timings_s"};
  return fields;
}

std::string format_spacing_nm(const std::optional<double>& nm) {
  return nm ? fixed(*nm, 2) + " nm" : "n/a";
}

std::string format_peak(const std::optional<PeakInfo>& peak) {
  if (!peak) return "no peak outside the DC disc";
  std::string s = "r = " + fixed(peak->radius_bins, 2) + " bins, angle = " + fixed(peak->angle_deg, 1) +
                  " deg, spacing = " + fixed(peak->spacing_window_px, 2) + " px / " +
                  format_spacing_nm(peak->spacing_nm);
  if (peak->isotropic) s += ", ring";
  return s;
}

std::string report_json(const RunReport& r) {
  ojson j;
  j["tool"] = "locfft";
  j["tool_version"] = r.tool_version;

  ojson input;
  input["path"] = r.input_path;
  input["width"] = r.input_width;
  input["height"] = r.input_height;
  input["analysed_width"] = r.analysed_width;
  input["analysed_height"] = r.analysed_height;
  if (r.pixel_size_nm) input["pixel_size_nm"] = *r.pixel_size_nm;
  input["pixel_size_source"] = r.pixel_size_source;
  j["input"] = input;

  j["config"] = config_json(r.config);

  ojson grid;
  grid["elemsize"] = r.config.elemsize;
  grid["xstep"] = r.config.xstep;
  grid["ystep"] = r.config.ystep;
  grid["nx"] = r.grid_nx;
  grid["ny"] = r.grid_ny;
  grid["n_windows"] = r.n_windows;
  j["grid"] = grid;

  ojson scree;
  scree["n_computed"] = r.variance_ratio.size();
  scree["variance_ratio"] = r.variance_ratio;
  scree["candidates"] = r.candidates;
  scree["auto_k"] = r.auto_k;
  scree["auto_k_fallback"] = r.auto_k_fallback;
  scree["solver"] = r.pca_exact ? "exact" : "krylov";
  j["scree"] = scree;

  ojson nmf;
  nmf["k"] = r.k;
  nmf["k_source"] = r.k_source;
  nmf["iterations"] = r.nmf_iterations;
  nmf["converged"] = r.nmf_converged;
  nmf["objective_initial"] = r.objective_trace.empty() ? 0.0 : r.objective_trace.front();
  nmf["objective_final"] = r.objective_trace.empty() ? 0.0 : r.objective_trace.back();
  nmf["objective_trace"] = r.objective_trace;
  j["nmf"] = nmf;

  ojson comps = ojson::array();
  std::vector<std::string> panels;
  for (const auto& c : r.components) {
    ojson cj;
    cj["index"] = c.index;
    cj["energy"] = c.energy;
    cj["peak"] = c.peak ? peak_json(*c.peak) : ojson(nullptr);
    if (!c.peak) cj["peak_error"] = c.peak_error;
    cj["annotation"] = format_peak(c.peak);
    comps.push_back(cj);
    panels.push_back(component_file_name(c.index));
  }
  j["components"] = comps;

  ojson sweep = ojson::array();
  for (const auto& row : r.sweep) sweep.push_back(sweep_row_json(row));
  j["sweep"] = sweep;

  ojson outputs;
  outputs["loadings"] = "loadings.tif";
  outputs["factors"] = "factors.tif";
  outputs["scree"] = "scree.png";
  outputs["panels"] = panels;
  outputs["html"] = "report.html";
  if (!r.sweep.empty()) {
    outputs["sweep_csv"] = "sweep.csv";
    outputs["sweep_plot"] = "sweep.png";
  }
  j["outputs"] = outputs;

  j["volatile_fields"] = volatile_report_fields();
  ojson timings;
  for (const auto& t : r.timings) timings[t.stage] = t.seconds;
  j["timings_s"] = timings;
  return j.dump(2) + "\n";
}

void write_tiff_stack(const std::vector<RowMatrix>& images, const std::filesystem::path& path) {
  if (images.empty()) throw ParameterError("write_tiff_stack: no images");
  std::vector<std::vector<float>> buffers;
  std::vector<tiff::FloatPage> pages;
  buffers.reserve(images.size());
  for (const auto& m : images) {
    if (!m.allFinite()) throw ParameterError("write_tiff_stack: non-finite value");
    buffers.emplace_back(m.data(), m.data() + m.size());
    pages.push_back({static_cast<int>(m.cols()), static_cast<int>(m.rows()), buffers.back()});
  }
  const std::string description =
      "ImageJ=1.11a\nimages=" + std::to_string(images.size()) + "\nslices=" + std::to_string(images.size()) + "\n";
  write_file_bytes(path, tiff::encode_float_stack(pages, description));
}

std::vector<RowMatrix> read_tiff_stack(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  std::vector<RowMatrix> out;
  for (const auto& p : tiff::decode(bytes)) {
    out.push_back(Eigen::Map<const RowMatrix>(p.samples.data(), p.height, p.width));
  }
  return out;
}

void write_report(const RunReport& r, const std::filesystem::path& dir) {
  write_text(dir / "report.json", report_json(r));

  std::ostringstream h;
  h << html_head("locfft report: " + r.input_path);
  h << "<h1>Local FFT analysis</h1>\n";
  h << "<table>\n";
  auto row = [&](const std::string& k, const std::string& v) {
    h << "<tr><th>" << html_escape(k) << "</th><td>" << html_escape(v) << "</td></tr>\n";
  };
  row("input", r.input_path);
  row("image size", std::to_string(r.input_width) + " x " + std::to_string(r.input_height) + " px");
  if (r.analysed_width != r.input_width) {
    row("analysed size", std::to_string(r.analysed_width) + " x " + std::to_string(r.analysed_height) + " px");
  }
  row("pixel size", r.pixel_size_nm ? fixed(*r.pixel_size_nm, 4) + " nm (" + r.pixel_size_source + ")" : "n/a");
  row("elemsize", std::to_string(r.config.elemsize) + " px");
  row("steps", std::to_string(r.config.xstep) + " x " + std::to_string(r.config.ystep) + " px");
  row("window grid", std::to_string(r.grid_nx) + " x " + std::to_string(r.grid_ny) + " = " +
                         std::to_string(r.n_windows) + " windows");
  std::string cands;
  for (int c : r.candidates) cands += (cands.empty() ? "" : ", ") + std::to_string(c);
  row("scree candidates", cands.empty() ? "none (k defaults to 1)" : cands);
  row("components", std::to_string(r.k) + " (" + r.k_source + ")");
  row("NMF iterations", std::to_string(r.nmf_iterations) + (r.nmf_converged ? ", converged" : ", iteration cap"));
  if (!r.objective_trace.empty()) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.6g -> %.6g", r.objective_trace.front(), r.objective_trace.back());
    row("objective", buf);
  }
  row("version", r.tool_version);
  h << "</table>\n";

  h << "<h2>Scree plot</h2>\n" << embedded_png(dir / "scree.png", "scree plot") << "\n";

  h << "<h2>Components</h2>\n<table>\n<tr><th>#</th><th>radius (bins)</th><th>angle (deg)</th>"
       "<th>spacing (px)</th><th>spacing (nm)</th><th>ring</th></tr>\n";
  for (const auto& c : r.components) {
    h << "<tr><td>" << c.index << "</td>";
    if (c.peak) {
      h << "<td>" << fixed(c.peak->radius_bins, 2) << "</td><td>" << fixed(c.peak->angle_deg, 1) << "</td><td>"
        << fixed(c.peak->spacing_window_px, 2) << "</td><td>" << html_escape(format_spacing_nm(c.peak->spacing_nm))
        << "</td><td>" << (c.peak->isotropic ? "yes" : "no") << "</td>";
    } else {
      h << "<td colspan=\"5\">" << html_escape(c.peak_error) << "</td>";
    }
    h << "</tr>\n";
  }
  h << "</table>\n";
  for (const auto& c : r.components) {
    h << "<h3>Component " << c.index << "</h3>\n<p>" << html_escape(format_peak(c.peak)) << "</p>\n"
      << embedded_png(dir / component_file_name(c.index), "component " + std::to_string(c.index)) << "\n";
  }

  if (!r.sweep.empty()) {
    h << "<h2>Window size sweep</h2>\n<table>\n<tr><th>elemsize</th><th>windows</th><th>auto k</th>"
         "<th>candidates</th></tr>\n";
    for (const auto& s : r.sweep) {
      std::string c;
      for (int v : s.candidates) c += (c.empty() ? "" : ", ") + std::to_string(v);
      h << "<tr><td>" << s.elemsize << "</td>";
      if (s.ok) {
        h << "<td>" << s.n_windows << "</td><td>" << s.auto_k << "</td><td>" << c << "</td>";
      } else {
        h << "<td colspan=\"3\" class=\"fail\">" << html_escape(s.error) << "</td>";
      }
      h << "</tr>\n";
    }
    h << "</table>\n" << embedded_png(dir / "sweep.png", "sweep plot") << "\n";
  }
  h << "<p>Data: <a href=\"loadings.tif\">loadings.tif</a>, <a href=\"factors.tif\">factors.tif</a>, "
       "<a href=\"report.json\">report.json</a></p>\n</body>\n</html>\n";
  write_text(dir / "report.html", h.str());
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "elemsize,n_windows,auto_k,candidates,status\n";
  for (const auto& r : rows) {
    std::string c;
    for (int v : r.candidates) c += (c.empty() ? "" : " ") + std::to_string(v);
    std::string status = r.ok ? "ok" : r.error;
    for (char& ch : status) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << r.elemsize << ',' << r.n_windows << ',' << r.auto_k << ',' << c << ',' << status << '\n';
  }
  write_text(path, out.str());
}

void write_batch_index(const std::vector<BatchEntry>& entries, const std::filesystem::path& path) {
  std::ostringstream h;
  h << html_head("locfft batch");
  h << "<h1>Batch summary</h1>\n<table>\n<tr><th>input</th><th>status</th><th>k</th><th>time (s)</th></tr>\n";
  for (const auto& e : entries) {
    h << "<tr><td>";
    if (e.ok) {
      h << "<a href=\"" << html_escape(e.report_dir) << "/report.html\">" << html_escape(e.input) << "</a>";
    } else {
      h << html_escape(e.input);
    }
    h << "</td><td" << (e.ok ? ">ok" : " class=\"fail\">" + html_escape(e.error)) << "</td><td>"
      << (e.ok ? std::to_string(e.k) : "") << "</td><td>" << fixed(e.seconds, 2) << "</td></tr>\n";
  }
  h << "</table>\n</body>\n</html>\n";
  write_text(path, h.str());
}

}  // namespace locfft
