// SPDX-License-Identifier: Apache-2.0
#include "cycfuse/cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "cycfuse/checkpoint.hpp"
#include "cycfuse/config.hpp"
#include "cycfuse/cube.hpp"
#include "cycfuse/degradation.hpp"
#include "cycfuse/error.hpp"
#include "cycfuse/interp.hpp"
#include "cycfuse/metrics.hpp"
#include "cycfuse/synthetic.hpp"
#include "cycfuse/trainer.hpp"

namespace cycfuse {

namespace fs = std::filesystem;
using nlohmann::json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json RunManifest::to_json() const {
  return {{"schema_version", kManifestSchemaVersion},
          {"library_version", kLibraryVersion},
          {"command", command},
          {"seed", seed},
          {"config", config},
          {"started_utc", started_utc},
          {"finished_utc", finished_utc},
          {"artifacts", artifacts}};
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

void finish_manifest(RunManifest& m, const fs::path& dir) {
  m.finished_utc = utc_timestamp();
  for (const auto& a : m.artifacts) {
    if (!fs::exists(dir / a)) throw IoError("artifact missing after write: " + a);
  }
  m.artifacts.push_back("manifest.json");
  write_text(dir / "manifest.json", m.to_json().dump(2) + "\n");
}

// Both files of a saved cube, relative to its directory.
void add_cube_artifacts(RunManifest& m, const std::string& stem) {
  m.artifacts.push_back(stem + ".hsc.json");
  m.artifacts.push_back(stem + ".hsc.bin");
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf;
  auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

// Maps library errors to the documented exit codes. `shape_code` lets a
// command treat shape mismatches as usage errors.
template <typename F>
int guarded(const std::string& command, std::ostream& err, F&& body, int shape_code = kExitData) {
  try {
    return body();
  } catch (const DivergenceError& e) {
    err << command << ": " << e.what() << "; last finite iteration " << e.last_finite_iter() << "\n";
    return kExitDivergence;
  } catch (const ConfigError& e) {
    err << command << ": config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << command << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const ModeError& e) {
    err << command << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const ShapeError& e) {
    err << command << ": shape error: " << e.what() << "\n";
    return shape_code;
  } catch (const Error& e) {
    err << command << ": " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << command << ": " << e.what() << "\n";
    return kExitData;
  }
}

// CLI11 consumes arguments from the back of the vector.
int parse_args(CLI::App& app, const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               bool& done) {
  std::vector<std::string> rev(args.rbegin(), args.rend());
  done = false;
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    done = true;
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << app.get_name() << ": " << e.what() << "\n";
    done = true;
    return kExitUsage;
  }
  return kExitOk;
}

void require_power_of_two_scale(int scale) {
  if (scale < 2 || (scale & (scale - 1)) != 0) {
    throw ConfigError("scale must be a power of two >= 2, got " + std::to_string(scale));
  }
}

}  // namespace

int cmd_simulate(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate an LrHSI/HrMSI pair from a ground-truth cube", "simulate"};
  std::string gt_path, srf_path, psf_path, out_dir;
  int scale = 0;
  std::optional<double> snr;
  std::uint64_t seed = 0;
  app.add_option("--gt", gt_path, "ground-truth cube header")->required();
  app.add_option("--srf", srf_path, "SRF CSV (l rows x L columns)")->required();
  app.add_option("--scale", scale, "spatial ratio S")->required();
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--noise-snr", snr, "additive Gaussian noise SNR in dB");
  app.add_option("--seed", seed, "noise seed");
  app.add_option("--psf", psf_path, "PSF CSV (S x S); default is the block average");
  bool done = false;
  if (int rc = parse_args(app, args, out, err, done); done) return rc;

  return guarded("simulate", err, [&] {
    RunManifest manifest;
    manifest.command = "simulate";
    manifest.started_utc = utc_timestamp();
    manifest.seed = seed;
    require_power_of_two_scale(scale);
    const HsiCube gt = load_cube(cube_header_path(gt_path));
    const SrfMatrix srf = load_srf_csv(srf_path);
    const PsfKernel psf = psf_path.empty() ? make_block_average_kernel(scale) : load_psf_csv(psf_path);
    if (psf.scale() != scale) throw ConfigError("PSF size does not match --scale");

    const SimulatedPair pair = simulate_pair(gt, psf, srf, snr, seed);
    const fs::path dir(out_dir);
    ensure_dir(dir);
    save_cube(pair.lr_hsi, dir / "lr_hsi");
    save_cube(pair.hr_msi, dir / "hr_msi");
    add_cube_artifacts(manifest, "lr_hsi");
    add_cube_artifacts(manifest, "hr_msi");
    manifest.config = {{"gt", fs::absolute(gt_path).generic_string()},
                       {"srf", fs::absolute(srf_path).generic_string()},
                       {"psf", psf_path.empty() ? json(nullptr) : json(fs::absolute(psf_path).generic_string())},
                       {"scale", scale},
                       {"noise_snr_db", snr ? json(*snr) : json(nullptr)}};
    finish_manifest(manifest, dir);
    out << "wrote " << (dir / "lr_hsi.hsc.json").string() << " and " << (dir / "hr_msi.hsc.json").string()
        << "\n";
    return int{kExitOk};
  });
}

namespace {

struct RunInputs {
  HsiCube lr_hsi;
  HsiCube hr_msi;
  std::optional<HsiCube> ground_truth;
  std::optional<KnownDegradation> known;
};

RunInputs load_run_inputs(const ExperimentConfig& cfg) {
  std::optional<HsiCube> gt;
  if (cfg.ground_truth) gt = load_cube(cube_header_path(*cfg.ground_truth));

  std::optional<PsfKernel> psf;
  std::optional<SrfMatrix> srf;
  if (cfg.psf_csv) psf = load_psf_csv(*cfg.psf_csv);
  if (cfg.srf_csv) srf = load_srf_csv(*cfg.srf_csv);
  if (psf && psf->scale() != cfg.scale) throw ConfigError("PSF size does not match scale");

  if (cfg.lr_hsi) {
    HsiCube y = load_cube(cube_header_path(*cfg.lr_hsi));
    HsiCube z = load_cube(cube_header_path(*cfg.hr_msi));
    if (z.rows() != y.rows() * cfg.scale || z.cols() != y.cols() * cfg.scale) {
      throw ShapeError("hr_msi is not scale x lr_hsi spatially");
    }
    std::optional<KnownDegradation> known;
    if (psf && srf) known = KnownDegradation{*psf, *srf};
    return {std::move(y), std::move(z), std::move(gt), std::move(known)};
  }

  if (!srf) srf = make_gaussian_srf(*cfg.msi_bands, gt->bands());
  if (!psf) psf = make_block_average_kernel(cfg.scale);
  SimulatedPair pair = simulate_pair(*gt, *psf, *srf, cfg.noise_snr_db, cfg.seed);
  return {std::move(pair.lr_hsi), std::move(pair.hr_msi), std::move(gt), KnownDegradation{*psf, *srf}};
}

}  // namespace

int cmd_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fuse an LrHSI/HrMSI pair", "run"};
  std::string config_path, mode, psf_path, srf_path, out_dir;
  bool no_cycle = false;
  std::optional<std::uint64_t> seed;
  long log_every = 1000;
  app.add_option("--config", config_path, "experiment config JSON")->required();
  app.add_option("--mode", mode, "blind | noblind | baseline");
  app.add_flag("--no-cycle", no_cycle, "drop the cycle-consistency term");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--psf", psf_path, "PSF CSV to inject (noblind)");
  app.add_option("--srf", srf_path, "SRF CSV to inject (noblind)");
  app.add_option("--out", out_dir, "override the output directory");
  app.add_option("--log-every", log_every, "progress line interval in iterations (0 = silent)");
  bool done = false;
  if (int rc = parse_args(app, args, out, err, done); done) return rc;

  return guarded("run", err, [&] {
    RunManifest manifest;
    manifest.command = "run";
    manifest.started_utc = utc_timestamp();

    ExperimentConfig cfg = parse_config(config_path);
    if (!mode.empty()) cfg.mode = parse_run_mode(mode);
    if (no_cycle) cfg.train.use_cycle = false;
    if (seed) cfg.seed = *seed;
    if (!psf_path.empty()) cfg.psf_csv = fs::absolute(psf_path);
    if (!srf_path.empty()) cfg.srf_csv = fs::absolute(srf_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.validate();
    manifest.config = serialize_config(cfg);
    manifest.seed = cfg.seed;

    const fs::path dir = cfg.output_dir;
    ensure_dir(dir);
    RunInputs in = load_run_inputs(cfg);

    std::optional<HsiCube> fused;
    if (cfg.mode == RunMode::baseline) {
      fused = bicubic_baseline(in.lr_hsi, cfg.scale);
    } else {
      const TrainConfig tc = cfg.train_config();
      const Architecture arch = cfg.architecture(in.lr_hsi.bands(), in.hr_msi.bands());
      ProgressFn progress;
      if (log_every > 0) {
        progress = [&](Phase p, long it, const LossBreakdown& l) {
          if (it % log_every == 0) {
            err << (p == Phase::pretrain ? "pretrain " : "train ") << it << " loss " << l.total << "\n";
          }
        };
      }
      FusionResult res = run_fusion(in.lr_hsi, in.hr_msi, tc, arch, in.known, progress);
      fused = std::move(res.fused);
      write_history_csv(res.history, dir / "history.csv");
      manifest.artifacts.push_back("history.csv");
      save_checkpoint(res.params, dir / "checkpoint.ckpt",
                      {{"mode", to_string(cfg.mode)}, {"seed", cfg.seed}, {"use_cycle", cfg.train.use_cycle}});
      manifest.artifacts.push_back("checkpoint.ckpt");
    }
    const HsiCube named(fused->bands(), fused->rows(), fused->cols(),
                        std::vector<float>(fused->data().begin(), fused->data().end()),
                        in.lr_hsi.wavelengths_nm(), "fused");
    save_cube(named, dir / "fused");
    add_cube_artifacts(manifest, "fused");

    if (in.ground_truth) {
      const MetricsReport report = evaluate(*in.ground_truth, named, cfg.scale);
      write_report(report, dir / "metrics.json");
      manifest.artifacts.push_back("metrics.json");
      out << summary_line(report) << "\n";
    }
    finish_manifest(manifest, dir);
    out << "wrote " << dir.string() << "\n";
    return int{kExitOk};
  });
}

int cmd_evaluate(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Score a fused cube against ground truth", "evaluate"};
  std::string gt_path, est_path, out_path;
  int scale = 0;
  app.add_option("--gt", gt_path, "ground-truth cube header")->required();
  app.add_option("--est", est_path, "estimated cube header")->required();
  app.add_option("--scale", scale, "spatial ratio S (for ERGAS)")->required();
  app.add_option("--out", out_path, "report JSON path")->required();
  bool done = false;
  if (int rc = parse_args(app, args, out, err, done); done) return rc;

  return guarded(
      "evaluate", err,
      [&] {
        if (scale < 1) throw ArgumentError("--scale must be positive");
        const HsiCube gt = load_cube(cube_header_path(gt_path));
        const HsiCube est = load_cube(cube_header_path(est_path));
        const MetricsReport report = evaluate(gt, est, scale);
        const fs::path p(out_path);
        if (p.has_parent_path()) ensure_dir(p.parent_path());
        write_report(report, p);
        out << summary_line(report) << "\n";
        return int{kExitOk};
      },
      kExitUsage);
}

namespace {

struct Rgb {
  unsigned char r, g, b;
};

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h, Rgb{255, 255, 255}) {}

  void set(int x, int y, Rgb c) {
    if (x >= 0 && x < w_ && y >= 0 && y < h_) px_[static_cast<std::size_t>(y) * w_ + x] = c;
  }

  void line(int x0, int y0, int x1, int y1, Rgb c) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int e = dx + dy;
    for (;;) {
      set(x0, y0, c);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * e;
      if (e2 >= dy) e += dy, x0 += sx;
      if (e2 <= dx) e += dx, y0 += sy;
    }
  }

  void save_ppm(const fs::path& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f << "P6\n" << w_ << " " << h_ << "\n255\n";
    f.write(reinterpret_cast<const char*>(px_.data()), static_cast<std::streamsize>(px_.size() * 3));
  }

 private:
  int w_, h_;
  std::vector<Rgb> px_;
};

// RMSE-vs-band curves, one colour per report; axes only, no text.
void render_rmse_plot(const std::vector<std::vector<double>>& curves, const fs::path& path) {
  constexpr int W = 640, H = 400, L = 50, R = 20, T = 20, B = 40;
  static constexpr std::array<Rgb, 6> palette{
      {{31, 119, 180}, {214, 39, 40}, {44, 160, 44}, {255, 127, 14}, {148, 103, 189}, {23, 190, 207}}};
  Canvas c(W, H);
  const Rgb axis{0, 0, 0}, grid{220, 220, 220};
  double ymax = 0.0;
  for (const auto& cv : curves) {
    for (double v : cv) ymax = std::max(ymax, v);
  }
  if (ymax <= 0.0) ymax = 1.0;
  for (int k = 1; k <= 4; ++k) {
    const int y = H - B - k * (H - B - T) / 4;
    c.line(L, y, W - R, y, grid);
  }
  c.line(L, T, L, H - B, axis);
  c.line(L, H - B, W - R, H - B, axis);
  for (std::size_t s = 0; s < curves.size(); ++s) {
    const auto& cv = curves[s];
    const int n = static_cast<int>(cv.size());
    auto px = [&](int b) { return n > 1 ? L + b * (W - L - R) / (n - 1) : L; };
    auto py = [&](double v) { return H - B - static_cast<int>(std::lround(v / ymax * (H - B - T))); };
    for (int b = 0; b < n; ++b) {
      if (b + 1 < n) c.line(px(b), py(cv[b]), px(b + 1), py(cv[b + 1]), palette[s % palette.size()]);
      for (int d = -2; d <= 2; ++d) c.set(px(b) + d, py(cv[b]), palette[s % palette.size()]);
    }
  }
  c.save_ppm(path);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

int cmd_report(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compare metric reports", "report"};
  std::vector<std::string> reports;
  std::string out_dir, wl_cube;
  app.add_option("--reports", reports, "report JSON files, one column each")->required();
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--wavelengths-from", wl_cube, "cube header whose wavelengths label the bands");
  bool done = false;
  if (int rc = parse_args(app, args, out, err, done); done) return rc;

  return guarded("report", err, [&] {
    RunManifest manifest;
    manifest.command = "report";
    manifest.started_utc = utc_timestamp();
    manifest.config = {{"reports", reports}};

    std::vector<MetricsReport> loaded;
    for (const auto& r : reports) loaded.push_back(read_report(r));
    const std::size_t bands = loaded.front().rmse_per_band.size();
    for (std::size_t i = 1; i < loaded.size(); ++i) {
      if (loaded[i].rmse_per_band.size() != bands) {
        throw ArgumentError("band count mismatch: " + reports[i] + " has " +
                            std::to_string(loaded[i].rmse_per_band.size()) + " bands, expected " +
                            std::to_string(bands));
      }
    }
    std::optional<std::vector<double>> wl;
    if (!wl_cube.empty()) {
      wl = load_cube(cube_header_path(wl_cube)).wavelengths_nm();
      if (wl && wl->size() != bands) throw ArgumentError("wavelength count does not match the reports");
    }

    // Column labels: file stems, widened with the parent directory on clashes.
    std::vector<std::string> labels;
    std::map<std::string, int> seen;
    for (const auto& r : reports) seen[fs::path(r).stem().string()]++;
    for (const auto& r : reports) {
      const fs::path p(r);
      std::string label = p.stem().string();
      if (seen[label] > 1 && p.has_parent_path()) label = p.parent_path().filename().string() + "/" + label;
      labels.push_back(label);
    }

    const fs::path dir(out_dir);
    ensure_dir(dir);
    std::string csv = "band";
    if (wl) csv += ",wavelength_nm";
    for (const auto& l : labels) csv += "," + csv_field(l);
    csv += "\n";
    for (std::size_t b = 0; b < bands; ++b) {
      csv += std::to_string(b);
      if (wl) csv += "," + fmt((*wl)[b]);
      for (const auto& rep : loaded) csv += "," + fmt(rep.rmse_per_band[b]);
      csv += "\n";
    }
    write_text(dir / "rmse_per_band.csv", csv);
    manifest.artifacts.push_back("rmse_per_band.csv");

    std::vector<std::vector<double>> curves;
    for (const auto& rep : loaded) curves.push_back(rep.rmse_per_band);
    render_rmse_plot(curves, dir / "rmse_per_band.ppm");
    manifest.artifacts.push_back("rmse_per_band.ppm");

    std::string table = "report,psnr_db,sam_deg,ergas,ssim\n";
    for (std::size_t i = 0; i < loaded.size(); ++i) {
      const auto& r = loaded[i];
      table += csv_field(labels[i]) + "," + fmt(r.psnr_db) + "," + fmt(r.sam_deg) + "," + fmt(r.ergas) + "," +
               fmt(r.ssim) + "\n";
    }
    write_text(dir / "metrics_table.csv", table);
    manifest.artifacts.push_back("metrics_table.csv");
    finish_manifest(manifest, dir);
    out << "wrote " << dir.string() << "\n";
    return int{kExitOk};
  });
}

int cmd_synth(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Write a synthetic blob scene and a Gaussian SRF", "synth"};
  BlobSceneSpec spec;
  std::string out_dir;
  std::uint64_t seed = 7;
  int msi_bands = 4;
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--bands", spec.bands, "hyperspectral bands L");
  app.add_option("--rows", spec.rows, "rows");
  app.add_option("--cols", spec.cols, "columns");
  app.add_option("--blobs", spec.blobs, "number of blobs");
  app.add_option("--msi-bands", msi_bands, "bands l of the Gaussian SRF");
  app.add_option("--seed", seed, "scene seed");
  bool done = false;
  if (int rc = parse_args(app, args, out, err, done); done) return rc;

  return guarded("synth", err, [&] {
    RunManifest manifest;
    manifest.command = "synth";
    manifest.started_utc = utc_timestamp();
    manifest.seed = seed;
    manifest.config = {{"bands", spec.bands}, {"rows", spec.rows}, {"cols", spec.cols},
                       {"blobs", spec.blobs}, {"msi_bands", msi_bands}};
    if (spec.bands < 1 || spec.rows < 1 || spec.cols < 1 || spec.blobs < 0) {
      throw ArgumentError("scene dimensions must be positive");
    }
    if (msi_bands < 1 || msi_bands >= spec.bands) throw ArgumentError("--msi-bands must lie in [1, bands)");
    const fs::path dir(out_dir);
    ensure_dir(dir);
    save_cube(make_blob_scene(spec, seed), dir / "ground_truth");
    add_cube_artifacts(manifest, "ground_truth");
    save_srf_csv(make_gaussian_srf(msi_bands, spec.bands), dir / "srf.csv");
    manifest.artifacts.push_back("srf.csv");
    finish_manifest(manifest, dir);
    out << "wrote " << dir.string() << "\n";
    return int{kExitOk};
  });
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  static const std::map<std::string, int (*)(const std::vector<std::string>&, std::ostream&, std::ostream&)>
      commands{{"simulate", cmd_simulate}, {"run", cmd_run},     {"evaluate", cmd_evaluate},
               {"report", cmd_report},     {"synth", cmd_synth}};
  const std::string usage =
      "usage: cycfuse <simulate|run|evaluate|report|synth> [options]\n"
      "       cycfuse <command> --help\n";
  if (argc < 2) {
    err << usage;
    return kExitUsage;
  }
  const std::string name = argv[1];
  if (name == "--help" || name == "-h") {
    out << usage;
    return kExitOk;
  }
  if (name == "--version") {
    out << "cycfuse " << kLibraryVersion << "\n";
    return kExitOk;
  }
  auto it = commands.find(name);
  if (it == commands.end()) {
    err << "unknown command '" << name << "'\n" << usage;
    return kExitUsage;
  }
  return it->second(std::vector<std::string>(argv + 2, argv + argc), out, err);
}

}  // namespace cycfuse
