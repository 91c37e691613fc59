#include "prefdiff/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "prefdiff/metrics.hpp"
#include "prefdiff/version.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace prefdiff {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ExperimentConfig::label() const {
  if (!method_label.empty()) return method_label;
  std::ostringstream s;
  s << "guided_w" << guidance.weight << "_" << classifier.criterion;
  if (classifier.prune_fraction < 1.0) s << "_prune";
  return s.str();
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["problem"] = cfg.problem;
  j["data_count"] = cfg.data_count;
  j["data_seed"] = cfg.data_seed;
  j["seeds"] = cfg.seeds;
  j["diffusion"] = {{"timesteps", cfg.diffusion.timesteps},
                    {"beta_start", cfg.diffusion.beta_start},
                    {"beta_end", cfg.diffusion.beta_end},
                    {"epochs", cfg.diffusion.epochs},
                    {"lr", cfg.diffusion.lr},
                    {"batch", cfg.diffusion.batch},
                    {"hidden", cfg.diffusion.hidden},
                    {"time_embed_dim", cfg.diffusion.time_embed_dim}};
  j["classifier"] = {{"epochs", cfg.classifier.epochs},
                     {"lr", cfg.classifier.lr},
                     {"batch", cfg.classifier.batch},
                     {"criterion", cfg.classifier.criterion},
                     {"prune_fraction", cfg.classifier.prune_fraction},
                     {"grad_mode", cfg.classifier.grad_mode},
                     {"hidden_tail", cfg.classifier.hidden_tail},
                     {"pairs_per_epoch", cfg.classifier.pairs_per_epoch}};
  j["guidance"] = {{"weight", cfg.guidance.weight}, {"budget", cfg.guidance.budget}};
  j["out_dir"] = cfg.out_dir;
  j["method_label"] = cfg.method_label;
  j["parallel_seeds"] = cfg.parallel_seeds;
  j["trajectory_stride"] = cfg.trajectory_stride;
  return j;
}

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j, ExperimentConfig base) {
  get_if(j, "problem", base.problem);
  get_if(j, "data_count", base.data_count);
  get_if(j, "data_seed", base.data_seed);
  get_if(j, "seeds", base.seeds);
  if (j.contains("diffusion")) {
    const json& d = j.at("diffusion");
    get_if(d, "timesteps", base.diffusion.timesteps);
    get_if(d, "beta_start", base.diffusion.beta_start);
    get_if(d, "beta_end", base.diffusion.beta_end);
    get_if(d, "epochs", base.diffusion.epochs);
    get_if(d, "lr", base.diffusion.lr);
    get_if(d, "batch", base.diffusion.batch);
    get_if(d, "hidden", base.diffusion.hidden);
    get_if(d, "time_embed_dim", base.diffusion.time_embed_dim);
  }
  if (j.contains("classifier")) {
    const json& c = j.at("classifier");
    get_if(c, "epochs", base.classifier.epochs);
    get_if(c, "lr", base.classifier.lr);
    get_if(c, "batch", base.classifier.batch);
    get_if(c, "criterion", base.classifier.criterion);
    get_if(c, "prune_fraction", base.classifier.prune_fraction);
    get_if(c, "grad_mode", base.classifier.grad_mode);
    get_if(c, "hidden_tail", base.classifier.hidden_tail);
    get_if(c, "pairs_per_epoch", base.classifier.pairs_per_epoch);
  }
  if (j.contains("guidance")) {
    const json& g = j.at("guidance");
    get_if(g, "weight", base.guidance.weight);
    get_if(g, "budget", base.guidance.budget);
  }
  get_if(j, "out_dir", base.out_dir);
  get_if(j, "method_label", base.method_label);
  get_if(j, "parallel_seeds", base.parallel_seeds);
  get_if(j, "trajectory_stride", base.trajectory_stride);
  return base;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  return config_from_json(json::parse(f), std::move(base));
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json train_relevant_json(const ExperimentConfig& cfg) {
  json full = to_json(cfg);
  json j;
  j["problem"] = full["problem"];
  j["data_count"] = full["data_count"];
  j["data_seed"] = full["data_seed"];
  j["diffusion"] = full["diffusion"];
  json c = full["classifier"];
  c.erase("grad_mode");  // sampling-time choice, does not touch checkpoints
  j["classifier"] = c;
  return j;
}

std::uint64_t train_hash(const ExperimentConfig& cfg) { return fnv1a(train_relevant_json(cfg).dump()); }

}  // namespace

std::string config_hash_hex(const ExperimentConfig& cfg) { return hex64(fnv1a(to_json(cfg).dump())); }
std::string train_hash_hex(const ExperimentConfig& cfg) { return hex64(train_hash(cfg)); }

json config_origins() {
  return json{{"problem", "decision"},
              {"data_count", "decision"},
              {"data_seed", "decision"},
              {"seeds", "stated"},
              {"diffusion.timesteps", "decision"},
              {"diffusion.beta_start", "stated"},
              {"diffusion.beta_end", "stated"},
              {"diffusion.epochs", "stated"},
              {"diffusion.lr", "stated"},
              {"diffusion.batch", "decision"},
              {"diffusion.hidden", "stated"},
              {"diffusion.time_embed_dim", "decision"},
              {"classifier.epochs", "stated"},
              {"classifier.lr", "stated"},
              {"classifier.batch", "decision"},
              {"classifier.criterion", "stated"},
              {"classifier.prune_fraction", "decision"},
              {"classifier.grad_mode", "decision"},
              {"classifier.hidden_tail", "stated"},
              {"classifier.pairs_per_epoch", "decision"},
              {"guidance.weight", "stated"},
              {"guidance.budget", "stated"},
              {"trajectory_stride", "decision"}};
}

void write_manifest(const ExperimentConfig& cfg, const std::string& command, const json& extra) {
  fs::create_directories(cfg.out_dir);
  json m;
  m["manifest_version"] = kManifestVersion;
  m["tool_version"] = kVersion;
  m["command"] = command;
  m["config"] = to_json(cfg);
  m["config_hash"] = config_hash_hex(cfg);
  m["train_hash"] = train_hash_hex(cfg);
  m["origins"] = config_origins();
  if (!extra.is_null() && !extra.empty()) m["extra"] = extra;
  std::ofstream f(fs::path(cfg.out_dir) / ("manifest_" + command + ".json"), std::ios::trunc);
  if (!f) throw std::runtime_error("manifest: cannot write in " + cfg.out_dir);
  f << m.dump(2) << "\n";
}

std::string dataset_path(const ExperimentConfig& cfg) {
  return (fs::path(cfg.out_dir) / "dataset.csv").string();
}
std::string denoiser_path(const ExperimentConfig& cfg, std::uint64_t seed) {
  return (fs::path(cfg.out_dir) / ("denoiser_seed" + std::to_string(seed) + ".ckpt")).string();
}
std::string classifier_path(const ExperimentConfig& cfg, std::uint64_t seed) {
  return (fs::path(cfg.out_dir) /
          ("classifier_" + cfg.classifier.criterion + "_seed" + std::to_string(seed) + ".ckpt"))
      .string();
}
std::string designs_path(const ExperimentConfig& cfg, std::uint64_t seed) {
  return (fs::path(cfg.out_dir) / ("designs_seed" + std::to_string(seed) + ".csv")).string();
}
std::string report_path(const ExperimentConfig& cfg) {
  return (fs::path(cfg.out_dir) / "report.csv").string();
}

namespace {

const Problem& require_problem(const ExperimentConfig& cfg) {
  const Problem* p = find_problem(cfg.problem);
  if (!p) throw std::runtime_error("unknown problem '" + cfg.problem + "'");
  return *p;
}

OfflineDataset load_dataset_checked(const ExperimentConfig& cfg) {
  const std::string path = dataset_path(cfg);
  if (!fs::exists(path))
    throw std::runtime_error("missing dataset " + path + " (run gen-data first)");
  return load_dataset(path);
}

// Runs fn(seed) for every seed, optionally concurrently. Each unit of work
// is self-contained and single-threaded, so concurrency changes nothing but
// wall time.
void for_each_seed(const ExperimentConfig& cfg, const std::function<void(std::uint64_t)>& fn) {
  std::exception_ptr first_error = nullptr;
  const int n = static_cast<int>(cfg.seeds.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (cfg.parallel_seeds)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      fn(cfg.seeds[i]);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

DenoiserConfig denoiser_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  DenoiserConfig dc;
  dc.hidden = cfg.diffusion.hidden;
  dc.time_embed_dim = cfg.diffusion.time_embed_dim;
  dc.epochs = cfg.diffusion.epochs;
  dc.lr = cfg.diffusion.lr;
  dc.batch = cfg.diffusion.batch;
  dc.seed = seed;
  return dc;
}

ClassifierConfig classifier_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  ClassifierConfig cc;
  cc.hidden_tail = cfg.classifier.hidden_tail;
  cc.time_embed_dim = cfg.diffusion.time_embed_dim;
  cc.epochs = cfg.classifier.epochs;
  cc.lr = cfg.classifier.lr;
  cc.batch = cfg.classifier.batch;
  cc.criterion = parse_criterion(cfg.classifier.criterion);
  cc.pairs_per_epoch = cfg.classifier.pairs_per_epoch;
  cc.seed = seed;
  return cc;
}

DiffusionSchedule schedule_of(const ExperimentConfig& cfg) {
  return linear_schedule(cfg.diffusion.timesteps, cfg.diffusion.beta_start, cfg.diffusion.beta_end);
}

}  // namespace

void cmd_gen_data(const ExperimentConfig& cfg, bool annotate) {
  const Problem& problem = require_problem(cfg);
  fs::create_directories(cfg.out_dir);
  OfflineDataset ds = generate_dataset(problem, cfg.data_count, cfg.data_seed);
  save_dataset(ds, dataset_path(cfg), annotate);
  write_manifest(cfg, "gen-data", {{"dataset", dataset_path(cfg)}, {"annotated", annotate}});
}

void cmd_train(const ExperimentConfig& cfg) {
  OfflineDataset ds = load_dataset_checked(cfg);
  const DiffusionSchedule sched = schedule_of(cfg);
  const std::uint64_t ckpt_hash = fnv1a(train_relevant_json(cfg).dump());

  OfflineDataset classifier_ds = ds;
  if (cfg.classifier.prune_fraction < 1.0)
    classifier_ds = prune_top_fraction(ds, cfg.classifier.prune_fraction);
  classifier_ds.front_assignment();  // compute once, shared by every seed

  for_each_seed(cfg, [&](std::uint64_t seed) {
    DenoiserResult den = train_denoiser(ds, sched, denoiser_config(cfg, seed));
    save_model(den.model, denoiser_path(cfg, seed), ckpt_hash);
    {
      std::ofstream log(fs::path(cfg.out_dir) / ("denoiser_log_seed" + std::to_string(seed) + ".csv"),
                        std::ios::trunc);
      log << "epoch,train_loss,val_loss\n";
      for (const auto& e : den.log)
        log << e.epoch << "," << format_g17(e.train_loss) << "," << format_g17(e.val_loss) << "\n";
    }

    ClassifierResult clf = train_preference(classifier_ds, sched, classifier_config(cfg, seed));
    save_model(clf.model, classifier_path(cfg, seed), ckpt_hash);
    {
      std::ofstream log(
          fs::path(cfg.out_dir) / ("classifier_log_seed" + std::to_string(seed) + ".csv"),
          std::ios::trunc);
      log << "epoch,train_loss,val_loss,val_accuracy_t1\n";
      for (const auto& e : clf.log)
        log << e.epoch << "," << format_g17(e.train_loss) << "," << format_g17(e.val_loss) << ","
            << format_g17(e.val_accuracy) << "\n";
    }
  });
  write_manifest(cfg, "train");
}

void write_designs_csv(const std::string& path, const OfflineDataset& ds, const Matrix& designs_norm,
                       const std::vector<int>& chain_ids, std::uint64_t seed,
                       const Matrix* objectives) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("designs: cannot open " + path + " for writing");
  for (int j = 0; j < ds.dim; ++j) f << (j ? ",x" : "x") << j;
  for (int j = 0; j < ds.objectives; ++j) f << ",y" << j;
  f << ",chain,seed\n";
  for (int i = 0; i < designs_norm.rows; ++i) {
    const std::vector<double> raw = ds.denormalize_design(designs_norm.row(i));
    for (int j = 0; j < ds.dim; ++j) f << (j ? "," : "") << format_g17(raw[j]);
    for (int j = 0; j < ds.objectives; ++j)
      f << "," << (objectives ? format_g17((*objectives)(i, j)) : "nan");
    f << "," << (chain_ids.empty() ? i : chain_ids[i]) << "," << seed << "\n";
  }
  if (!f) throw std::runtime_error("designs: write failed for " + path);
}

DesignsFile read_designs_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("designs: cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("designs: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  int d = 0, m = 0;
  {
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> header;
    while (std::getline(ss, field, ',')) header.push_back(field);
    std::size_t i = 0;
    while (i < header.size() && header[i] == "x" + std::to_string(i)) ++i;
    d = static_cast<int>(i);
    std::size_t j = 0;
    while (i + j < header.size() && header[i + j] == "y" + std::to_string(j)) ++j;
    m = static_cast<int>(j);
    if (d == 0 || m == 0 || header.size() != i + j + 2 || header[i + j] != "chain" ||
        header[i + j + 1] != "seed")
      throw std::runtime_error("designs: malformed header in " + path);
  }

  DesignsFile out;
  std::vector<double> xs, ys;
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (static_cast<int>(fields.size()) != d + m + 2)
      throw std::runtime_error("designs: line " + std::to_string(line_no) + ": expected " +
                               std::to_string(d + m + 2) + " fields");
    for (int j = 0; j < d; ++j) xs.push_back(std::strtod(fields[j].c_str(), nullptr));
    for (int j = 0; j < m; ++j) ys.push_back(std::strtod(fields[d + j].c_str(), nullptr));
    out.chain_ids.push_back(std::stoi(fields[d + m]));
    out.seed = std::stoull(fields[d + m + 1]);
  }
  const int n = static_cast<int>(out.chain_ids.size());
  out.X_raw = Matrix(n, d);
  out.X_raw.data = std::move(xs);
  out.Y = Matrix(n, m);
  out.Y.data = std::move(ys);
  return out;
}

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryRecord>& traj,
                          int dim, int objectives) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("trajectory: cannot open " + path + " for writing");
  f << "t,chain";
  for (int j = 0; j < dim; ++j) f << ",x" << j;
  for (int j = 0; j < objectives; ++j) f << ",y" << j;
  f << "\n";
  for (const auto& rec : traj) {
    f << rec.t << "," << rec.chain;
    for (double v : rec.design_raw) f << "," << format_g17(v);
    for (double v : rec.objectives) f << "," << format_g17(v);
    f << "\n";
  }
}

void cmd_sample(const ExperimentConfig& cfg, const SampleCommandOptions& opts) {
  OfflineDataset ds = load_dataset_checked(cfg);
  ds.front_assignment();
  const DiffusionSchedule sched = schedule_of(cfg);
  const std::uint64_t expect_hash = fnv1a(train_relevant_json(cfg).dump());
  const Problem* problem = find_problem(cfg.problem);
  if (cfg.trajectory_stride > 0 && problem == nullptr)
    throw std::runtime_error("trajectory recording needs a known problem evaluator");

  std::vector<double> max_shifts(cfg.seeds.size(), 0.0);
  for_each_seed(cfg, [&](std::uint64_t seed) {
    LoadedModel den = load_model(denoiser_path(cfg, seed));
    if (!opts.force && den.config_hash != expect_hash)
      throw std::runtime_error(
          "checkpoint " + denoiser_path(cfg, seed) +
          " was trained under a different config (rerun train or pass --force)");

    Matrix designs;
    std::vector<int> chain_ids;
    std::vector<TrajectoryRecord> trajectory;
    if (opts.unconditional) {
      SampleOptions so;
      so.count = cfg.guidance.budget;
      so.seed = seed;
      designs = unconditional_sample(den.model, sched, so);
    } else {
      LoadedModel clf = load_model(classifier_path(cfg, seed));
      if (!opts.force && clf.config_hash != expect_hash)
        throw std::runtime_error(
            "checkpoint " + classifier_path(cfg, seed) +
            " was trained under a different config (rerun train or pass --force)");
      GuidanceConfig gc;
      gc.weight = opts.weight_override.value_or(cfg.guidance.weight);
      gc.grad_mode = parse_grad_mode(cfg.classifier.grad_mode);
      gc.count = cfg.guidance.budget;
      gc.seed = seed;
      gc.trajectory_stride = cfg.trajectory_stride;
      SampleResult res = guided_sample(den.model, clf.model, sched, ds, gc, problem);
      designs = std::move(res.designs);
      chain_ids = std::move(res.chain_ids);
      trajectory = std::move(res.trajectory);
      for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
        if (cfg.seeds[i] == seed) max_shifts[i] = res.max_guidance_shift;
      if (!res.aborted_chains.empty())
        std::fprintf(stderr, "warning: seed %llu: %zu chains aborted\n",
                     static_cast<unsigned long long>(seed), res.aborted_chains.size());
    }
    write_designs_csv(designs_path(cfg, seed), ds, designs, chain_ids, seed);
    if (cfg.trajectory_stride > 0 && !opts.unconditional)
      write_trajectory_csv(
          (fs::path(cfg.out_dir) / ("trajectory_seed" + std::to_string(seed) + ".csv")).string(),
          trajectory, ds.dim, ds.objectives);
  });
  json extra;
  extra["unconditional"] = opts.unconditional;
  if (opts.weight_override) extra["weight_override"] = *opts.weight_override;
  if (!opts.unconditional) extra["max_guidance_shift_per_seed"] = max_shifts;
  write_manifest(cfg, "sample", extra);
}

namespace {

struct SeedMetrics {
  std::uint64_t seed = 0;
  double hypervolume = 0.0;
  double delta_spread = std::numeric_limits<double>::quiet_NaN();
};

SeedMetrics evaluate_designs_file(const ExperimentConfig& cfg, const OfflineDataset& ds,
                                  const Problem& problem, const std::string& designs_file) {
  DesignsFile df = read_designs_csv(designs_file);
  Matrix Y(df.X_raw.rows, ds.objectives);
  for (int i = 0; i < df.X_raw.rows; ++i) {
    const auto y = evaluate(problem, df.X_raw.row(i));
    std::copy(y.begin(), y.end(), Y.row(i).begin());
  }
  // Rewrite the file with the objective columns filled in.
  Matrix designs_norm(df.X_raw.rows, ds.dim);
  for (int i = 0; i < df.X_raw.rows; ++i) {
    const auto xn = ds.normalize_design(df.X_raw.row(i));
    std::copy(xn.begin(), xn.end(), designs_norm.row(i).begin());
  }
  write_designs_csv(designs_file, ds, designs_norm, df.chain_ids, df.seed, &Y);

  const NormalizedObjectives norm = normalize_objectives(Y, ds.obj_stats);
  const std::vector<double> ref = hv_reference_point(ds.objectives);

  SeedMetrics sm;
  sm.seed = df.seed;
  sm.hypervolume = hypervolume(norm.values, ref);
  Matrix extremes;
  if (!problem.front_extremes.empty()) {
    extremes = Matrix(problem.front_extremes.rows, problem.front_extremes.cols);
    for (int e = 0; e < extremes.rows; ++e) {
      const auto ne = normalize_objective_row(problem.front_extremes.row(e), ds.obj_stats);
      std::copy(ne.begin(), ne.end(), extremes.row(e).begin());
    }
  }
  const auto spread = delta_spread(norm.values, extremes.empty() ? nullptr : &extremes);
  if (spread) sm.delta_spread = *spread;
  return sm;
}

void append_metric_rows(std::ofstream& f, const std::string& task, const std::string& method,
                        const SeedMetrics& sm) {
  f << task << "," << method << "," << sm.seed << ",hypervolume," << format_g17(sm.hypervolume)
    << "\n";
  if (std::isfinite(sm.delta_spread))
    f << task << "," << method << "," << sm.seed << ",delta_spread," << format_g17(sm.delta_spread)
      << "\n";
  else
    f << task << "," << method << "," << sm.seed << ",delta_spread,missing\n";
}

}  // namespace

void cmd_evaluate(const ExperimentConfig& cfg) {
  OfflineDataset ds = load_dataset_checked(cfg);
  const Problem* problem = find_problem(ds.problem_name);
  if (!problem)
    throw std::runtime_error("dataset has no known problem evaluator ('" + ds.problem_name +
                             "'); cannot evaluate generated designs");

  std::ofstream report(report_path(cfg), std::ios::trunc);
  if (!report) throw std::runtime_error("report: cannot open " + report_path(cfg));
  report << "task,method,seed,metric,value\n";

  // Dataset reference row: hypervolume of the observed non-dominated set.
  {
    const NormalizedObjectives norm = normalize_objectives(ds.Y, ds.obj_stats);
    const std::vector<double> ref = hv_reference_point(ds.objectives);
    SeedMetrics sm;
    sm.seed = ds.seed;
    sm.hypervolume = hypervolume(norm.values, ref);
    const auto spread = delta_spread(norm.values, nullptr);
    sm.delta_spread = spread ? *spread : std::numeric_limits<double>::quiet_NaN();
    append_metric_rows(report, cfg.problem, "dataset_best", sm);
  }

  std::vector<SeedMetrics> all;
  for (std::uint64_t seed : cfg.seeds) {
    const std::string path = designs_path(cfg, seed);
    if (!fs::exists(path))
      throw std::runtime_error("missing designs file " + path + " (run sample first)");
    SeedMetrics sm = evaluate_designs_file(cfg, ds, *problem, path);
    append_metric_rows(report, cfg.problem, cfg.label(), sm);
    all.push_back(sm);
  }

  double hv_mean = 0.0, hv_sq = 0.0, sp_mean = 0.0, sp_sq = 0.0;
  int sp_n = 0;
  for (const auto& sm : all) {
    hv_mean += sm.hypervolume;
    hv_sq += sm.hypervolume * sm.hypervolume;
    if (std::isfinite(sm.delta_spread)) {
      sp_mean += sm.delta_spread;
      sp_sq += sm.delta_spread * sm.delta_spread;
      ++sp_n;
    }
  }
  const int n = static_cast<int>(all.size());
  hv_mean /= n;
  const double hv_sd = n > 1 ? std::sqrt(std::max(0.0, (hv_sq - n * hv_mean * hv_mean) / (n - 1))) : 0.0;
  json extra;
  extra["hypervolume_mean"] = hv_mean;
  extra["hypervolume_sd"] = hv_sd;
  if (sp_n > 0) {
    sp_mean /= sp_n;
    const double sp_sd =
        sp_n > 1 ? std::sqrt(std::max(0.0, (sp_sq - sp_n * sp_mean * sp_mean) / (sp_n - 1))) : 0.0;
    extra["delta_spread_mean"] = sp_mean;
    extra["delta_spread_sd"] = sp_sd;
  }
  write_manifest(cfg, "evaluate", extra);
  std::printf("%s %s: hypervolume %.4f +- %.4f over %d seeds\n", cfg.problem.c_str(),
              cfg.label().c_str(), hv_mean, hv_sd, n);
}

void cmd_ablate(const ExperimentConfig& cfg, const std::string& mode) {
  OfflineDataset ds = load_dataset_checked(cfg);
  ds.front_assignment();
  const DiffusionSchedule sched = schedule_of(cfg);
  const Problem* problem = find_problem(ds.problem_name);
  if (!problem) throw std::runtime_error("ablate: dataset has no known problem evaluator");
  const std::uint64_t expect_hash = fnv1a(train_relevant_json(cfg).dump());

  const std::string out_csv =
      (fs::path(cfg.out_dir) / ("ablation_" + mode + ".csv")).string();
  std::ofstream out(out_csv, std::ios::trunc);
  if (!out) throw std::runtime_error("ablate: cannot open " + out_csv);

  if (mode == "w") {
    out << "w,seed,hypervolume,delta_spread\n";
    const std::vector<double> weights{0.0, 5.0, 10.0, 20.0, 50.0};
    for (double w : weights) {
      for (std::uint64_t seed : cfg.seeds) {
        LoadedModel den = load_model(denoiser_path(cfg, seed));
        LoadedModel clf = load_model(classifier_path(cfg, seed));
        if (den.config_hash != expect_hash || clf.config_hash != expect_hash)
          throw std::runtime_error("ablate: checkpoints do not match the current config");
        GuidanceConfig gc;
        gc.weight = w;
        gc.grad_mode = parse_grad_mode(cfg.classifier.grad_mode);
        gc.count = cfg.guidance.budget;
        gc.seed = seed;
        SampleResult res = guided_sample(den.model, clf.model, sched, ds, gc);
        const std::string path =
            (fs::path(cfg.out_dir) /
             ("designs_w" + std::to_string(static_cast<int>(w)) + "_seed" + std::to_string(seed) +
              ".csv"))
                .string();
        write_designs_csv(path, ds, res.designs, res.chain_ids, seed);
        SeedMetrics sm = evaluate_designs_file(cfg, ds, *problem, path);
        out << format_g17(w) << "," << seed << "," << format_g17(sm.hypervolume) << ","
            << format_g17(sm.delta_spread) << "\n";
      }
    }
  } else if (mode == "criterion") {
    out << "criterion,seed,hypervolume,delta_spread\n";
    OfflineDataset classifier_ds = ds;
    if (cfg.classifier.prune_fraction < 1.0)
      classifier_ds = prune_top_fraction(ds, cfg.classifier.prune_fraction);
    classifier_ds.front_assignment();
    for (const std::string crit : {"crowding", "hypervolume", "none"}) {
      ExperimentConfig variant = cfg;
      variant.classifier.criterion = crit;
      for (std::uint64_t seed : cfg.seeds) {
        LoadedModel den = load_model(denoiser_path(cfg, seed));
        if (den.config_hash != expect_hash)
          throw std::runtime_error("ablate: checkpoints do not match the current config");
        ClassifierResult clf = train_preference(classifier_ds, sched, classifier_config(variant, seed));
        save_model(clf.model, classifier_path(variant, seed),
                   fnv1a(train_relevant_json(variant).dump()));
        GuidanceConfig gc;
        gc.weight = cfg.guidance.weight;
        gc.grad_mode = parse_grad_mode(cfg.classifier.grad_mode);
        gc.count = cfg.guidance.budget;
        gc.seed = seed;
        SampleResult res = guided_sample(den.model, clf.model, sched, ds, gc);
        const std::string path =
            (fs::path(cfg.out_dir) / ("designs_" + crit + "_seed" + std::to_string(seed) + ".csv"))
                .string();
        write_designs_csv(path, ds, res.designs, res.chain_ids, seed);
        SeedMetrics sm = evaluate_designs_file(cfg, ds, *problem, path);
        out << crit << "," << seed << "," << format_g17(sm.hypervolume) << ","
            << format_g17(sm.delta_spread) << "\n";
      }
    }
  } else {
    throw std::runtime_error("ablate: unknown mode '" + mode + "' (expected w or criterion)");
  }
  write_manifest(cfg, "ablate-" + mode, {{"output", out_csv}});
}

void cmd_report(const std::vector<std::string>& report_csvs, const std::string& out_csv) {
  // Gather mean metric per (task, method) across seeds.
  struct Key {
    std::string task, method, metric;
    bool operator<(const Key& o) const {
      return std::tie(task, method, metric) < std::tie(o.task, o.method, o.metric);
    }
  };
  std::map<Key, std::pair<double, int>> sums;
  for (const auto& path : report_csvs) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("report: cannot open " + path);
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string task, method, seed, metric, value;
      std::getline(ss, task, ',');
      std::getline(ss, method, ',');
      std::getline(ss, seed, ',');
      std::getline(ss, metric, ',');
      std::getline(ss, value, ',');
      if (value == "missing") continue;
      auto& acc = sums[{task, method, metric}];
      acc.first += std::strtod(value.c_str(), nullptr);
      acc.second += 1;
    }
  }
  std::vector<MethodTaskMean> hv_stats, spread_stats;
  for (const auto& [key, acc] : sums) {
    const double mean = acc.first / acc.second;
    if (key.metric == "hypervolume")
      hv_stats.push_back({key.task, key.method, mean});
    else if (key.metric == "delta_spread")
      spread_stats.push_back({key.task, key.method, mean});
  }
  const auto hv_ranks = average_ranks(hv_stats, /*higher_is_better=*/true);
  const auto spread_ranks = average_ranks(spread_stats, /*higher_is_better=*/false);

  std::ofstream out(out_csv, std::ios::trunc);
  if (!out) throw std::runtime_error("report: cannot open " + out_csv);
  out << "method,hypervolume_rank,delta_spread_rank\n";
  for (const auto& r : hv_ranks) {
    double spread_rank = std::numeric_limits<double>::quiet_NaN();
    for (const auto& s : spread_ranks)
      if (s.method == r.method) spread_rank = s.average_rank;
    out << r.method << "," << format_g17(r.average_rank) << ","
        << (std::isfinite(spread_rank) ? format_g17(spread_rank) : "missing") << "\n";
  }
}

}  // namespace prefdiff
