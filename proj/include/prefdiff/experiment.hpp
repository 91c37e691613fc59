#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "prefdiff/preference.hpp"
#include "prefdiff/sampler.hpp"

namespace prefdiff {

// Declarative experiment description. Defaults follow the reported training
// setup where one exists; everything else is marked origin=decision in the
// emitted manifest.
struct DiffusionSettings {
  int timesteps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  int epochs = 200;
  double lr = 5e-4;
  int batch = 256;
  std::vector<int> hidden{512, 512};
  int time_embed_dim = 128;
};

struct ClassifierSettings {
  int epochs = 500;
  double lr = 1e-5;
  int batch = 32;
  std::string criterion = "crowding";
  double prune_fraction = 1.0;  // 1 = no pruning; 0.3 matches the pruning variant
  std::string grad_mode = "log";
  int hidden_tail = 512;
  int pairs_per_epoch = 0;  // 0 selects the dataset size
};

struct GuidanceSettings {
  double weight = 10.0;
  int budget = 256;
};

struct ExperimentConfig {
  std::string problem = "zdt2";
  int data_count = 5000;
  std::uint64_t data_seed = 1;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  DiffusionSettings diffusion;
  ClassifierSettings classifier;
  GuidanceSettings guidance;
  std::string out_dir = "runs/default";
  std::string method_label;  // derived when empty
  bool parallel_seeds = false;
  int trajectory_stride = 0;

  std::string label() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

// FNV-1a over the canonical JSON dump. train_hash covers only the fields
// that determine checkpoint contents.
std::string config_hash_hex(const ExperimentConfig& cfg);
std::string train_hash_hex(const ExperimentConfig& cfg);

// field path -> "stated" | "decision" for every numeric default.
nlohmann::json config_origins();

void write_manifest(const ExperimentConfig& cfg, const std::string& command,
                    const nlohmann::json& extra = {});

// Paths inside cfg.out_dir.
std::string dataset_path(const ExperimentConfig& cfg);
std::string denoiser_path(const ExperimentConfig& cfg, std::uint64_t seed);
std::string classifier_path(const ExperimentConfig& cfg, std::uint64_t seed);
std::string designs_path(const ExperimentConfig& cfg, std::uint64_t seed);
std::string report_path(const ExperimentConfig& cfg);

// Commands. Each writes its outputs plus a manifest and throws on error.
void cmd_gen_data(const ExperimentConfig& cfg, bool annotate = false);
void cmd_train(const ExperimentConfig& cfg);

struct SampleCommandOptions {
  bool unconditional = false;
  std::optional<double> weight_override;
  bool force = false;  // skip the checkpoint/config hash check
};
void cmd_sample(const ExperimentConfig& cfg, const SampleCommandOptions& opts = {});

void cmd_evaluate(const ExperimentConfig& cfg);
void cmd_ablate(const ExperimentConfig& cfg, const std::string& mode);  // "w" | "criterion"
void cmd_report(const std::vector<std::string>& report_csvs, const std::string& out_csv);

// Design CSV helpers shared by commands and tests. Columns are
// x0..x{d-1},y0..y{m-1},chain,seed with y = nan until evaluation fills it.
void write_designs_csv(const std::string& path, const OfflineDataset& ds, const Matrix& designs_norm,
                       const std::vector<int>& chain_ids, std::uint64_t seed,
                       const Matrix* objectives = nullptr);
struct DesignsFile {
  Matrix X_raw;
  Matrix Y;  // nan when not yet evaluated
  std::vector<int> chain_ids;
  std::uint64_t seed = 0;
};
DesignsFile read_designs_csv(const std::string& path);

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryRecord>& traj,
                          int dim, int objectives);

}  // namespace prefdiff
