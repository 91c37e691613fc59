#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prefdiff/experiment.hpp"
#include "prefdiff/version.hpp"

namespace {

using prefdiff::ExperimentConfig;

// Flag values land on top of the defaults; a config file, when given,
// overrides flags; the fully resolved config is echoed into the manifest.
struct CliState {
  ExperimentConfig cfg;
  std::string config_file;

  void finalize() {
    if (!config_file.empty()) cfg = prefdiff::load_config_file(config_file, cfg);
  }
};

void add_common_options(CLI::App* cmd, CliState& st) {
  cmd->add_option("--config", st.config_file, "JSON config file (overrides flags)");
  cmd->add_option("--problem", st.cfg.problem, "benchmark name (zdt1..zdt6, dtlz1..dtlz7)");
  cmd->add_option("--n", st.cfg.data_count, "offline dataset size");
  cmd->add_option("--data-seed", st.cfg.data_seed, "dataset generation seed");
  cmd->add_option("--seeds", st.cfg.seeds, "method seeds")->delimiter(',');
  cmd->add_option("--out", st.cfg.out_dir, "output directory");
  cmd->add_option("--T", st.cfg.diffusion.timesteps, "diffusion timesteps");
  cmd->add_option("--beta-start", st.cfg.diffusion.beta_start, "first noise variance");
  cmd->add_option("--beta-end", st.cfg.diffusion.beta_end, "last noise variance");
  cmd->add_option("--denoiser-epochs", st.cfg.diffusion.epochs, "denoiser training epochs");
  cmd->add_option("--denoiser-lr", st.cfg.diffusion.lr, "denoiser learning rate");
  cmd->add_option("--denoiser-batch", st.cfg.diffusion.batch, "denoiser batch size");
  cmd->add_option("--classifier-epochs", st.cfg.classifier.epochs, "classifier training epochs");
  cmd->add_option("--classifier-lr", st.cfg.classifier.lr, "classifier learning rate");
  cmd->add_option("--classifier-batch", st.cfg.classifier.batch, "classifier batch size");
  cmd->add_option("--criterion", st.cfg.classifier.criterion,
                  "diversity criterion: crowding | hypervolume | none");
  cmd->add_option("--prune", st.cfg.classifier.prune_fraction,
                  "keep this top fraction of points for classifier training (1 = off)");
  cmd->add_option("--grad-mode", st.cfg.classifier.grad_mode,
                  "guidance gradient: log | raw");
  cmd->add_option("--w", st.cfg.guidance.weight, "guidance weight");
  cmd->add_option("--budget", st.cfg.guidance.budget, "number of designs to sample");
  cmd->add_option("--method-label", st.cfg.method_label, "method name used in reports");
  cmd->add_flag("--parallel-seeds", st.cfg.parallel_seeds, "run seeds concurrently");
  cmd->add_option("--trajectory-stride", st.cfg.trajectory_stride,
                  "record every k-th intermediate state while sampling (0 = off)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"preference-guided diffusion for offline multi-objective optimization"};
  app.set_version_flag("--version", prefdiff::kVersion);
  app.require_subcommand(1);

  CliState st;
  bool annotate = false;
  prefdiff::SampleCommandOptions sample_opts;
  double w_override = -1.0;
  std::string ablate_mode = "w";
  std::vector<std::string> report_inputs;
  std::string report_out = "ranks.csv";

  auto* gen = app.add_subcommand("gen-data", "generate an offline dataset");
  add_common_options(gen, st);
  gen->add_flag("--annotate", annotate, "append front,crowding columns to the CSV");

  auto* train = app.add_subcommand("train", "train the denoiser and the preference classifier");
  add_common_options(train, st);

  auto* sample = app.add_subcommand("sample", "draw designs via guided reverse diffusion");
  add_common_options(sample, st);
  sample->add_flag("--unconditional", sample_opts.unconditional,
                   "plain ancestral sampling without guidance");
  auto* w_opt = sample->add_option("--w-override", w_override,
                                   "sample with this guidance weight instead of the config value");
  sample->add_flag("--force", sample_opts.force, "skip the checkpoint config-hash check");

  auto* eval = app.add_subcommand("evaluate", "fill objective values and emit metric rows");
  add_common_options(eval, st);

  auto* ablate = app.add_subcommand("ablate", "sweep guidance weight or diversity criterion");
  add_common_options(ablate, st);
  ablate->add_option("--mode", ablate_mode, "w | criterion");

  auto* report = app.add_subcommand("report", "aggregate metric rows into a rank table");
  report->add_option("--inputs", report_inputs, "report CSV files")->delimiter(',')->required();
  report->add_option("--out", report_out, "output CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    st.finalize();
    if (gen->parsed()) {
      prefdiff::cmd_gen_data(st.cfg, annotate);
    } else if (train->parsed()) {
      prefdiff::cmd_train(st.cfg);
    } else if (sample->parsed()) {
      if (w_opt->count() > 0) sample_opts.weight_override = w_override;
      prefdiff::cmd_sample(st.cfg, sample_opts);
    } else if (eval->parsed()) {
      prefdiff::cmd_evaluate(st.cfg);
    } else if (ablate->parsed()) {
      prefdiff::cmd_ablate(st.cfg, ablate_mode);
    } else if (report->parsed()) {
      prefdiff::cmd_report(report_inputs, report_out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
