// SPDX-License-Identifier: Apache-2.0
#include "cycfuse/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "cycfuse/error.hpp"

namespace cycfuse {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::blind: return "blind";
    case RunMode::noblind: return "noblind";
    case RunMode::baseline: return "baseline";
  }
  return "?";
}

RunMode parse_run_mode(const std::string& s) {
  if (s == "blind") return RunMode::blind;
  if (s == "noblind") return RunMode::noblind;
  if (s == "baseline") return RunMode::baseline;
  throw ConfigError("unknown mode '" + s + "' (expected blind, noblind or baseline)");
}

namespace {

bool is_power_of_two(long v) { return v > 0 && (v & (v - 1)) == 0; }

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown config key '" + prefix + it.key() + "'");
  }
}

// Typed read of an optional key; nlohmann type errors become ConfigError
// naming the key.
template <typename T>
bool read(const json& obj, const char* key, T& out, const std::string& prefix) {
  auto it = obj.find(key);
  if (it == obj.end()) return false;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + prefix + key + "' has the wrong type");
  }
  return true;
}

std::optional<fs::path> read_path(const json& obj, const char* key, const fs::path& base) {
  std::string s;
  if (!read(obj, key, s, "")) return std::nullopt;
  if (s.empty()) throw ConfigError("config key '" + std::string(key) + "' is empty");
  fs::path p(s);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

const std::set<std::string> kTopKeys{"ground_truth", "lr_hsi", "hr_msi", "srf_csv", "psf_csv", "output_dir",
                                     "scale", "msi_bands", "widths", "logit_init", "mode", "seed",
                                     "noise_snr_db", "train"};
const std::set<std::string> kTrainKeys{"pretrain_iters", "pretrain_lr", "warmup_iters", "anneal_iters", "max_lr",
                                       "use_cycle", "adam_beta1", "adam_beta2", "adam_eps"};

}  // namespace

void ExperimentConfig::validate() const {
  if (!is_power_of_two(scale) || scale < 2) {
    throw ConfigError("scale must be a power of two >= 2, got " + std::to_string(scale));
  }
  const bool have_gt = ground_truth.has_value();
  const bool have_pair = lr_hsi.has_value() || hr_msi.has_value();
  if (have_pair && !(lr_hsi && hr_msi)) throw ConfigError("lr_hsi and hr_msi must be given together");
  if (!have_gt && !have_pair) throw ConfigError("config needs ground_truth or the lr_hsi/hr_msi pair");
  if (have_gt && !have_pair && !srf_csv && !msi_bands) {
    throw ConfigError("simulating from ground_truth needs srf_csv or msi_bands");
  }
  if (msi_bands && *msi_bands < 1) throw ConfigError("msi_bands must be >= 1");
  if (widths.empty()) throw ConfigError("widths must not be empty");
  for (int w : widths) {
    if (w < 1) throw ConfigError("widths must all be >= 1");
  }
  if (noise_snr_db && !std::isfinite(*noise_snr_db)) throw ConfigError("noise_snr_db must be finite");
  if (mode == RunMode::noblind && !have_gt && !(srf_csv && psf_csv)) {
    throw ConfigError("noblind mode on a precomputed pair needs srf_csv and psf_csv");
  }
  if (output_dir.empty()) throw ConfigError("output_dir is empty");
  train_config().validate();
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig t = train;
  t.seed = seed;
  t.mode = mode == RunMode::noblind ? FusionMode::noblind : FusionMode::blind;
  return t;
}

Architecture ExperimentConfig::architecture(int hsi_bands, int msi_bands_) const {
  Architecture a;
  a.hsi_bands = hsi_bands;
  a.msi_bands = msi_bands_;
  a.scale = scale;
  a.widths = widths;
  a.logit_init = logit_init;
  return a;
}

ExperimentConfig parse_config_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown(j, kTopKeys, "");

  ExperimentConfig cfg;
  cfg.ground_truth = read_path(j, "ground_truth", base_dir);
  cfg.lr_hsi = read_path(j, "lr_hsi", base_dir);
  cfg.hr_msi = read_path(j, "hr_msi", base_dir);
  cfg.srf_csv = read_path(j, "srf_csv", base_dir);
  cfg.psf_csv = read_path(j, "psf_csv", base_dir);
  if (auto out = read_path(j, "output_dir", base_dir)) {
    cfg.output_dir = *out;
  } else if (!base_dir.empty()) {
    cfg.output_dir = (base_dir / cfg.output_dir).lexically_normal();
  }

  read(j, "scale", cfg.scale, "");
  int msi = 0;
  if (read(j, "msi_bands", msi, "")) cfg.msi_bands = msi;
  read(j, "widths", cfg.widths, "");
  std::string s;
  if (read(j, "logit_init", s, "")) {
    if (s == "kaiming") {
      cfg.logit_init = LogitInit::kaiming;
    } else if (s == "uniform") {
      cfg.logit_init = LogitInit::uniform;
    } else {
      throw ConfigError("logit_init must be kaiming or uniform, got '" + s + "'");
    }
  }
  if (read(j, "mode", s, "")) cfg.mode = parse_run_mode(s);
  read(j, "seed", cfg.seed, "");
  double snr = 0.0;
  if (auto it = j.find("noise_snr_db"); it != j.end() && !it->is_null()) {
    read(j, "noise_snr_db", snr, "");
    cfg.noise_snr_db = snr;
  }

  if (auto it = j.find("train"); it != j.end()) {
    const json& t = *it;
    if (!t.is_object()) throw ConfigError("config key 'train' must be an object");
    reject_unknown(t, kTrainKeys, "train.");
    read(t, "pretrain_iters", cfg.train.pretrain_iters, "train.");
    read(t, "pretrain_lr", cfg.train.pretrain_lr, "train.");
    read(t, "warmup_iters", cfg.train.warmup_iters, "train.");
    read(t, "anneal_iters", cfg.train.anneal_iters, "train.");
    read(t, "max_lr", cfg.train.max_lr, "train.");
    read(t, "use_cycle", cfg.train.use_cycle, "train.");
    read(t, "adam_beta1", cfg.train.adam.beta1, "train.");
    read(t, "adam_beta2", cfg.train.adam.beta2, "train.");
    read(t, "adam_eps", cfg.train.adam.eps, "train.");
  }
  cfg.train.seed = cfg.seed;
  cfg.train.mode = cfg.train_config().mode;

  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  ExperimentConfig cfg = parse_config_json(j, fs::absolute(path).parent_path());
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    cfg.output_dir = fs::path(env).lexically_normal();
  }
  return cfg;
}

json serialize_config(const ExperimentConfig& cfg) {
  json j;
  auto put_path = [&](const char* key, const std::optional<fs::path>& p) {
    if (p) j[key] = p->generic_string();
  };
  put_path("ground_truth", cfg.ground_truth);
  put_path("lr_hsi", cfg.lr_hsi);
  put_path("hr_msi", cfg.hr_msi);
  put_path("srf_csv", cfg.srf_csv);
  put_path("psf_csv", cfg.psf_csv);
  j["output_dir"] = cfg.output_dir.generic_string();
  j["scale"] = cfg.scale;
  if (cfg.msi_bands) j["msi_bands"] = *cfg.msi_bands;
  j["widths"] = cfg.widths;
  j["logit_init"] = cfg.logit_init == LogitInit::kaiming ? "kaiming" : "uniform";
  j["mode"] = to_string(cfg.mode);
  j["seed"] = cfg.seed;
  j["noise_snr_db"] = cfg.noise_snr_db ? json(*cfg.noise_snr_db) : json(nullptr);
  j["train"] = {
      {"pretrain_iters", cfg.train.pretrain_iters},
      {"pretrain_lr", cfg.train.pretrain_lr},
      {"warmup_iters", cfg.train.warmup_iters},
      {"anneal_iters", cfg.train.anneal_iters},
      {"max_lr", cfg.train.max_lr},
      {"use_cycle", cfg.train.use_cycle},
      {"adam_beta1", cfg.train.adam.beta1},
      {"adam_beta2", cfg.train.adam.beta2},
      {"adam_eps", cfg.train.adam.eps},
  };
  return j;
}

}  // namespace cycfuse
