#include "highway_rl/harness/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "highway_rl/csv.hpp"
#include "highway_rl/ddqn/collect.hpp"
#include "highway_rl/ddqn/training.hpp"
#include "highway_rl/errors.hpp"
#include "highway_rl/harness/manifest.hpp"
#include "highway_rl/mdrnn/driving_log.hpp"
#include "highway_rl/mdrnn/rollout.hpp"
#include "highway_rl/mdrnn/training.hpp"
#include "highway_rl/seeding.hpp"

namespace highway_rl::harness {

namespace fs = std::filesystem;

namespace {

// Seed streams for stages that are not a training run.
enum Stream : std::uint64_t { kCollectStream = 11, kMdrnnStream, kSweepStream };

struct ManifestBuilder {
  RunManifest m;
  fs::path dir;

  ManifestBuilder(const StageContext& ctx, std::string command) : dir(ctx.out) {
    m.command = std::move(command);
    m.seed = ctx.seed;
    m.config = to_json(ctx.cfg);
    m.started = utc_timestamp();
    fs::create_directories(dir);
  }
  void input(const fs::path& p) { m.inputs.push_back(describe_file(p)); }
  void output(const std::string& name) { m.outputs.push_back(describe_file(dir / name, dir)); }
  void finish() {
    m.finished = utc_timestamp();
    write_manifest(dir, m);
  }
};

void check_predictor_compatible(const mdrnn::MdRnn& model, const ExperimentConfig& cfg, const fs::path& path) {
  if (!(model.normalizer() == cfg.scenario.normalizer()))
    throw FormatError(path.string() + ": predictor normalization differs from the scenario");
  if (model.horizon() != static_cast<std::size_t>(cfg.predictor.k))
    throw FormatError(path.string() + ": predictor horizon k=" + std::to_string(model.horizon()) +
                      " but config has predictor.k=" + std::to_string(cfg.predictor.k));
  if (!model.trained()) throw FormatError(path.string() + ": predictor checkpoint is untrained");
}

ddqn::QNetwork load_checkpoint(const fs::path& path) {
  verify_artifact(path);
  return ddqn::QNetwork::load(path);
}

std::string label_for(const fs::path& run) {
  fs::path p = run.lexically_normal();
  if (p.filename().empty()) p = p.parent_path();
  return p.filename().string();
}

std::optional<fs::path> sweep_file(const fs::path& run) {
  for (const fs::path& p : {run / "sweep.csv", run / "sweep" / "sweep.csv"})
    if (fs::exists(p)) return p;
  return std::nullopt;
}

}  // namespace

void stage_train(const StageContext& ctx, const std::optional<fs::path>& predictor) {
  ManifestBuilder mb(ctx, predictor ? "train-safe" : "train-baseline");
  const sim::Highway env(ctx.cfg.scenario);

  std::optional<mdrnn::MdRnn> model;
  if (predictor) {
    verify_artifact(*predictor);
    model = mdrnn::MdRnn::load(*predictor);
    check_predictor_compatible(*model, ctx.cfg, *predictor);
    mb.input(*predictor);
  }

  ddqn::TrainingHooks hooks;
  if (model) {
    const auto norm = env.normalizer();
    const bool greedy = ctx.cfg.predictor.rollout_actions == mdrnn::RolloutActions::GreedyPolicy;
    const mdrnn::MdRnn& mdl = *model;
    hooks.make_lookahead = [&mdl, norm, greedy](const ddqn::QNetwork& online) {
      mdrnn::ActionPolicy policy;
      if (greedy)
        policy = [&online, norm](const sim::AffordanceVector& raw) {
          return ddqn::greedy_action(online.values(norm.normalize(raw)));
        };
      return std::make_unique<mdrnn::MdRnnLookahead>(mdl, std::move(policy));
    };
  }
  const ddqn::TrainingResult res = ddqn::run_training(env, ctx.cfg.agent, ctx.cfg.protocol, ctx.seed, hooks);

  nlohmann::ordered_json extra;
  extra["seed"] = ctx.seed;
  extra["episodes"] = ctx.cfg.protocol.episodes;
  if (model) extra["predictor_m"] = model->components();
  res.q.save(ctx.out / "q.json", extra);
  ddqn::write_metrics_csv(ctx.out / "metrics.csv", res.metrics);
  ddqn::write_eval_csv(ctx.out / "eval.csv", res.evaluations);
  for (const char* f : {"q.json", "metrics.csv", "eval.csv"}) mb.output(f);
  mb.finish();

  int collisions = 0;
  for (const auto& m : res.metrics) collisions += m.collisions;
  ctx.log << mb.m.command << " seed " << ctx.seed << ": " << res.metrics.size() << " episodes, " << res.total_steps
          << " steps, " << collisions << " collisions";
  if (!res.evaluations.empty()) ctx.log << ", final eval return " << format_double(res.evaluations.back().summary.mean_return);
  ctx.log << " -> " << ctx.out.string() << '\n';
}

void stage_collect(const StageContext& ctx, const fs::path& checkpoint, int episodes) {
  if (episodes < 0) throw ConfigError("collect: episodes must be >= 0");
  ManifestBuilder mb(ctx, "collect");
  const ddqn::QNetwork q = load_checkpoint(checkpoint);
  mb.input(checkpoint);
  const sim::Highway env(ctx.cfg.scenario);
  const mdrnn::DrivingLog log = ddqn::collect_driving_data(env, q, episodes, ctx.cfg.predictor.collect_epsilon,
                                                           derive_seed(ctx.seed, kCollectStream));
  mdrnn::write_driving_log(ctx.out / "driving_log.csv", log);
  mb.output("driving_log.csv");
  mb.finish();
  if (episodes == 0) ctx.log << "warning: collect ran 0 episodes; the driving log is empty\n";
  const std::size_t pairs = log.size() - log.episodes().size();
  ctx.log << "collect seed " << ctx.seed << ": " << log.episodes().size() << " episodes, " << log.size()
          << " records, " << pairs << " transition pairs -> " << (ctx.out / "driving_log.csv").string() << '\n';
}

void stage_train_mdrnn(const StageContext& ctx, const fs::path& log_path) {
  verify_artifact(log_path);
  const mdrnn::DrivingLog log = mdrnn::read_driving_log(log_path);
  if (log.empty()) throw ConfigError(log_path.string() + ": driving log is empty");
  ManifestBuilder mb(ctx, "train-mdrnn");
  mb.input(log_path);
  const auto& pc = ctx.cfg.predictor;
  mdrnn::MdRnn model(static_cast<std::size_t>(pc.m), static_cast<std::size_t>(pc.hidden),
                     static_cast<std::size_t>(pc.k), pc.sigma_floor, ctx.cfg.scenario.normalizer());
  model.init(derive_seed(ctx.seed, kMdrnnStream));
  const mdrnn::TrainReport report = mdrnn::train_offline(model, log, pc, derive_seed(ctx.seed, kMdrnnStream, 1));
  model.save(ctx.out / "mdrnn.json");
  {
    CsvWriter w(ctx.out / "nll.csv");
    w.header({"epoch", "train_nll", "heldout_nll"});
    for (const auto& e : report.epochs) {
      w.field(e.epoch).field(e.train_nll).field(e.heldout_nll);
      w.end_row();
    }
  }
  mb.output("mdrnn.json");
  mb.output("nll.csv");
  mb.finish();
  const auto& last = report.epochs.back();
  ctx.log << "train-mdrnn seed " << ctx.seed << ": m=" << pc.m << ", " << report.train_pairs << " train / "
          << report.heldout_pairs << " held-out pairs, final NLL " << format_double(last.train_nll) << " / "
          << format_double(last.heldout_nll) << " -> " << ctx.out.string() << '\n';
}

void stage_evaluate(const StageContext& ctx, const fs::path& checkpoint, const std::vector<int>& counts, int trials) {
  if (trials < 0) throw ConfigError("evaluate: trials must be >= 0");
  for (int n : counts)
    if (n < 0) throw ConfigError("evaluate: vehicle counts must be >= 0");
  ManifestBuilder mb(ctx, "evaluate");
  const ddqn::QNetwork q = load_checkpoint(checkpoint);
  mb.input(checkpoint);
  const sim::Highway env(ctx.cfg.scenario);
  {
  CsvWriter w(ctx.out / "sweep.csv");
  w.header({"vehicles", "trials", "collisions", "mean_return", "mean_steps"});
  if (trials == 0) {
    ctx.log << "warning: evaluate ran 0 trials; the sweep is empty\n";
  } else {
    for (int n : counts) {
      const auto s = ddqn::evaluate_policy(env, q, trials, derive_seed(ctx.seed, kSweepStream, static_cast<std::uint64_t>(n)), n);
      w.field(n).field(trials).field(s.collisions).field(s.mean_return).field(s.mean_steps);
      w.end_row();
      ctx.log << "evaluate seed " << ctx.seed << ": " << n << " vehicles, " << s.collisions << "/" << trials
              << " collisions\n";
    }
  }
  }
  mb.output("sweep.csv");
  mb.finish();
}

void stage_compare(const std::vector<fs::path>& runs, const fs::path& out, std::ostream& log) {
  if (runs.size() < 2) throw ConfigError("compare: need at least two run directories");
  std::vector<std::string> labels;
  std::vector<CsvTable> curves;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path eval = runs[i] / "eval.csv";
    if (!fs::exists(eval)) throw ConfigError("compare: " + eval.string() + " not found");
    verify_artifact(eval);
    curves.push_back(read_csv(eval));
    std::string label = label_for(runs[i]);
    if (std::find(labels.begin(), labels.end(), label) != labels.end()) label += "_" + std::to_string(i);
    labels.push_back(label);
  }
  const auto& grid = curves.front();
  for (std::size_t i = 1; i < curves.size(); ++i) {
    bool same = curves[i].rows.size() == grid.rows.size();
    for (std::size_t r = 0; same && r < grid.rows.size(); ++r)
      same = curves[i].number(r, "episode") == grid.number(r, "episode");
    if (!same) throw ConfigError("compare: " + runs[i].string() + " has a different evaluation grid");
  }

  fs::create_directories(out);
  std::vector<std::string> header = {"episode"};
  header.insert(header.end(), labels.begin(), labels.end());
  {
    CsvWriter w(out / "compare_curves.csv");
    w.header(header);
    for (std::size_t r = 0; r < grid.rows.size(); ++r) {
      w.field(grid.number(r, "episode"));
      for (const auto& c : curves) w.field(c.number(r, "mean_return"));
      w.end_row();
    }
  }

  std::ostringstream table;
  table << std::left << std::setw(10) << "episode";
  for (const auto& l : labels) table << std::setw(16) << l;
  table << '\n';
  for (std::size_t r = 0; r < grid.rows.size(); ++r) {
    table << std::setw(10) << grid.rows[r][grid.column("episode")];
    for (const auto& c : curves) {
      std::ostringstream cell;  // the CSV keeps full precision; the table only needs to be readable
      cell << std::fixed << std::setprecision(2) << c.number(r, "mean_return");
      table << std::setw(16) << cell.str();
    }
    table << '\n';
  }

  std::vector<CsvTable> sweeps;
  for (const auto& run : runs)
    if (auto f = sweep_file(run)) sweeps.push_back(read_csv(*f));
  if (sweeps.size() == runs.size()) {
    bool same = true;
    for (const auto& s : sweeps) {
      same = same && s.rows.size() == sweeps.front().rows.size();
      for (std::size_t r = 0; same && r < s.rows.size(); ++r)
        same = s.number(r, "vehicles") == sweeps.front().number(r, "vehicles");
    }
    if (!same) throw ConfigError("compare: collision sweeps use different vehicle counts");
    std::vector<std::string> sh = {"vehicles"};
    sh.insert(sh.end(), labels.begin(), labels.end());
    CsvWriter w(out / "compare_sweep.csv");
    w.header(sh);
    table << '\n' << std::setw(10) << "vehicles";
    for (const auto& l : labels) table << std::setw(16) << l;
    table << '\n';
    for (std::size_t r = 0; r < sweeps.front().rows.size(); ++r) {
      w.field(sweeps.front().number(r, "vehicles"));
      table << std::setw(10) << sweeps.front().rows[r][sweeps.front().column("vehicles")];
      for (const auto& s : sweeps) {
        w.field(s.number(r, "collisions"));
        table << std::setw(16) << s.rows[r][s.column("collisions")];
      }
      w.end_row();
      table << '\n';
    }
  }
  log << table.str();
}

void stage_pipeline(const StageContext& ctx) {
  const fs::path base = ctx.out;
  auto sub = [&](const std::string& name) { return StageContext{ctx.cfg, ctx.seed, base / name, ctx.log}; };

  stage_train(sub("baseline"), std::nullopt);
  stage_evaluate(sub("baseline/sweep"), base / "baseline" / "q.json", ctx.cfg.sweep.counts, ctx.cfg.sweep.trials);
  stage_collect(sub("collect"), base / "baseline" / "q.json", ctx.cfg.predictor.collect_episodes);

  std::vector<int> mixtures = {1};
  if (ctx.cfg.predictor.m != 1) mixtures.push_back(ctx.cfg.predictor.m);
  std::vector<fs::path> runs = {base / "baseline"};
  for (int m : mixtures) {
    ExperimentConfig cfg = ctx.cfg;
    cfg.predictor.m = m;
    const std::string tag = "m" + std::to_string(m);
    const StageContext mctx{cfg, ctx.seed, base / ("mdrnn_" + tag), ctx.log};
    stage_train_mdrnn(mctx, base / "collect" / "driving_log.csv");
    const StageContext sctx{cfg, ctx.seed, base / ("safe_" + tag), ctx.log};
    stage_train(sctx, base / ("mdrnn_" + tag) / "mdrnn.json");
    const StageContext ectx{cfg, ctx.seed, base / ("safe_" + tag) / "sweep", ctx.log};
    stage_evaluate(ectx, base / ("safe_" + tag) / "q.json", cfg.sweep.counts, cfg.sweep.trials);
    runs.push_back(base / ("safe_" + tag));
  }
  stage_compare(runs, base / "compare", ctx.log);
}

unsigned fanout_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HIGHWAY_RL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<unsigned>(v);
  }
  return n;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"train-baseline", "collect",  "train-mdrnn", "train-safe",
                                                 "evaluate",       "compare",  "pipeline"};
  return names;
}

namespace {

fs::path expand_seed(const fs::path& p, std::uint64_t seed) {
  std::string s = p.string();
  const std::string key = "{seed}";
  for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos))
    s.replace(pos, key.size(), std::to_string(seed));
  return s;
}

int exit_code_for(std::exception_ptr e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    err << "configuration error: " << x.what() << '\n';
    return kExitConfig;
  } catch (const FormatError& x) {
    err << "artifact error: " << x.what() << '\n';
    return kExitArtifact;
  } catch (const fs::filesystem_error& x) {
    err << "artifact error: " << x.what() << '\n';
    return kExitArtifact;
  } catch (const TrainingError& x) {
    err << "training error: " << x.what() << '\n';
    return kExitTraining;
  } catch (const std::exception& x) {
    err << "error: " << x.what() << '\n';
    return kExitTraining;
  }
}

const fs::path& require(const std::optional<fs::path>& p, const char* flag, const std::string& command) {
  if (!p) throw ConfigError(command + ": " + flag + " is required");
  return *p;
}

}  // namespace

int run_command(const std::string& command, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    err << "usage error: unknown command '" << command << "'\n";
    return kExitConfig;
  }
  try {
    ExperimentConfig cfg = opts.config ? load_experiment(*opts.config, opts.overrides) : default_experiment(opts.overrides);

    if (command == "compare") {
      stage_compare(opts.runs, opts.out.value_or(fs::path(cfg.output_dir) / "compare"), out);
      return kExitOk;
    }

    if (opts.episodes) {
      if (*opts.episodes < 0) throw ConfigError("--episodes: must be >= 0");
      if (command == "collect") {
        cfg.predictor.collect_episodes = *opts.episodes;
      } else if (command == "train-baseline" || command == "train-safe" || command == "pipeline") {
        cfg.protocol.episodes = *opts.episodes;
      } else {
        throw ConfigError("--episodes does not apply to " + command);
      }
    }
    if (opts.trials) cfg.sweep.trials = *opts.trials;
    if (opts.counts) cfg.sweep.counts = *opts.counts;
    cfg.validate();

    std::vector<std::uint64_t> seeds = opts.seed ? std::vector<std::uint64_t>{*opts.seed}
                                       : !opts.seeds.empty() ? opts.seeds
                                                             : cfg.seeds;
    const fs::path base = opts.out.value_or(fs::path(cfg.output_dir) / command);

    auto run_one = [&](std::uint64_t seed, std::ostream& log) {
      // Several seeds share one output root unless the path already names the seed.
      const bool templated = base.string().find("{seed}") != std::string::npos;
      const fs::path dir = seeds.size() > 1 && !templated ? base / ("seed_" + std::to_string(seed)) : base;
      const StageContext ctx{cfg, seed, expand_seed(dir, seed), log};
      auto path = [&](const std::optional<fs::path>& p, const char* flag) {
        return expand_seed(require(p, flag, command), seed);
      };
      if (command == "train-baseline") {
        stage_train(ctx, std::nullopt);
      } else if (command == "train-safe") {
        stage_train(ctx, path(opts.predictor, "--predictor"));
      } else if (command == "collect") {
        stage_collect(ctx, path(opts.checkpoint, "--checkpoint"), cfg.predictor.collect_episodes);
      } else if (command == "train-mdrnn") {
        stage_train_mdrnn(ctx, path(opts.log, "--log"));
      } else if (command == "evaluate") {
        stage_evaluate(ctx, path(opts.checkpoint, "--checkpoint"), cfg.sweep.counts, cfg.sweep.trials);
      } else {
        stage_pipeline(ctx);
      }
    };

    if (seeds.size() == 1) {
      run_one(seeds.front(), out);
      return kExitOk;
    }

    std::vector<std::ostringstream> logs(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::size_t next = 0;
    std::mutex mu;
    auto worker = [&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard lock(mu);
          if (next >= seeds.size()) return;
          i = next++;
        }
        try {
          run_one(seeds[i], logs[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const unsigned n_threads = std::min<unsigned>(fanout_threads(), static_cast<unsigned>(seeds.size()));
    if (n_threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    int code = kExitOk;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      out << logs[i].str();
      if (errors[i]) {
        err << "seed " << seeds[i] << ": ";
        const int c = exit_code_for(errors[i], err);
        if (code == kExitOk) code = c;
      }
    }
    return code;
  } catch (...) {
    return exit_code_for(std::current_exception(), err);
  }
}

}  // namespace highway_rl::harness
