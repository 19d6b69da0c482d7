#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>
#include <json.hpp>

#include "suglg/inference.hpp"
#include "suglg/io.hpp"
#include "suglg/model.hpp"
#include "suglg/sampler.hpp"

namespace suglg {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct UsageError : Error {
  using Error::Error;
};

struct Flags {
  std::string config;
  std::string model;
  std::uint64_t seed = 0;
  long iters = 0;
  long burnin = 0;
  long thin = 0;
  std::string out;
  std::string preset;
  std::string input;
  std::string holdout;
  std::string new_locations;
  std::vector<int> grid;
  Index censor_count = 0;
  double outlier_shift = 0.0;
  bool save_lambda = false;
};

struct FlagOptions {
  CLI::Option* model = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* iters = nullptr;
  CLI::Option* burnin = nullptr;
  CLI::Option* thin = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* preset = nullptr;
  CLI::Option* input = nullptr;
  CLI::Option* holdout = nullptr;
  CLI::Option* new_locations = nullptr;
  CLI::Option* grid = nullptr;
  CLI::Option* censor_count = nullptr;
  CLI::Option* outlier_shift = nullptr;
  CLI::Option* save_lambda = nullptr;
};

void add_common(CLI::App* sub, Flags& f, FlagOptions& o) {
  sub->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  o.model = sub->add_option("--model", f.model, "GAUS, SUG, GLG or SUGLG");
  o.seed = sub->add_option("--seed", f.seed, "random seed (required here or in the config)");
  o.iters = sub->add_option("--iters", f.iters, "total sweeps");
  o.burnin = sub->add_option("--burnin", f.burnin, "burn-in sweeps");
  o.thin = sub->add_option("--thin", f.thin, "thinning interval");
  o.out = sub->add_option("--out", f.out, "output directory");
  o.preset = sub->add_option("--preset", f.preset, "quick or paper chain lengths")
                 ->check(CLI::IsMember({"quick", "paper"}));
}

void add_input(CLI::App* sub, Flags& f, FlagOptions& o) {
  o.input = sub->add_option("--input", f.input, "dataset CSV, or 'rainfall' for the embedded data");
  o.save_lambda = sub->add_flag("--save-lambda", f.save_lambda, "add lambda columns to chain.csv");
}

RunConfig resolve(const Flags& f, const FlagOptions& o) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = load_run_config(f.config);
  if (o.preset && o.preset->count()) {
    const ChainConfig base = f.preset == "paper" ? ChainConfig::paper() : ChainConfig::quick();
    cfg.chain.length = base.length;
    cfg.chain.burn_in = base.burn_in;
    cfg.chain.thin = base.thin;
  }
  if (o.model && o.model->count()) cfg.chain.kind = parse_model_kind(f.model);
  if (o.seed && o.seed->count()) {
    cfg.chain.seed = f.seed;
    cfg.seed_set = true;
  }
  if (o.iters && o.iters->count()) cfg.chain.length = f.iters;
  if (o.burnin && o.burnin->count()) cfg.chain.burn_in = f.burnin;
  if (o.thin && o.thin->count()) cfg.chain.thin = f.thin;
  if (o.out && o.out->count()) cfg.output = f.out;
  if (o.input && o.input->count()) cfg.input = f.input;
  if (o.holdout && o.holdout->count()) cfg.holdout = f.holdout;
  if (o.new_locations && o.new_locations->count()) cfg.new_locations = f.new_locations;
  if (o.grid && o.grid->count()) {
    cfg.grid_nx = f.grid.at(0);
    cfg.grid_ny = f.grid.at(1);
  }
  if (o.censor_count && o.censor_count->count()) cfg.censor_count = f.censor_count;
  if (o.outlier_shift && o.outlier_shift->count()) cfg.outlier_shift = f.outlier_shift;
  if (o.save_lambda && o.save_lambda->count()) cfg.save_lambda = true;
  if (!cfg.seed_set) throw UsageError("a seed is required (--seed or \"seed\" in the config)");
  cfg.chain.validate();
  fs::create_directories(cfg.output);
  return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.output) / name).string(); }

SpatialDataset load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw UsageError("an input dataset is required (--input)");
  if (cfg.input != "rainfall" && !fs::exists(cfg.input)) throw UsageError("input '" + cfg.input + "' does not exist");
  return read_dataset(cfg.input);
}

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ArgumentError("cannot open '" + path + "' for writing");
  f << j.dump(2) << '\n';
}

ChainOutput fit_and_write(const RunConfig& cfg, const SpatialDataset& ds, std::ostream& log) {
  log << "fitting " << to_string(cfg.chain.kind) << " to " << ds.size() << " sites (" << cfg.chain.length
      << " sweeps)\n";
  ChainOutput chain = run_chain(ds, cfg.chain);
  write_chain_csv(out_path(cfg, "chain.csv"), chain, ds, cfg.save_lambda);
  write_summary_json(out_path(cfg, "summary.json"), chain, cfg.chain);
  if (!chain.censored.empty()) {
    const auto cens = predict_censored(chain, ds);
    std::ofstream f(out_path(cfg, "censored.csv"), std::ios::binary);
    f << "id,x,y,mean,sd,q2.5,q50,q97.5\n";
    for (std::size_t j = 0; j < cens.size(); ++j) {
      const auto& p = cens[j];
      f << ds.ids[chain.censored[j]] << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
        << format_double(p.mean) << ',' << format_double(p.sd) << ',' << format_double(p.q025) << ','
        << format_double(p.q50) << ',' << format_double(p.q975) << '\n';
    }
  }
  return chain;
}

std::pair<Locations, Vector> load_holdout(const std::string& path) {
  const CsvTable t = read_csv_table(path);
  if (t.header.size() != 3 || t.header[0] != "x" || t.header[1] != "y" || t.header[2] != "value")
    throw FormatError("hold-out file must have columns x,y,value", 1);
  Locations l(t.values.rows(), 2);
  l.col(0) = t.values.col(0);
  l.col(1) = t.values.col(1);
  return {l, t.values.col(2)};
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  Rng rng(cfg.chain.seed);
  const DesignRealization sim = simulate_design(rng, cfg.chain.kind, cfg.censor_count, cfg.outlier_shift);
  write_dataset(out_path(cfg, "dataset.csv"), sim.dataset);
  write_latent_csv(out_path(cfg, "latent.csv"), sim.dataset, sim.latent);
  std::ofstream h(out_path(cfg, "holdout.csv"), std::ios::binary);
  h << "x,y,value\n";
  for (Index i = 0; i < sim.holdout.rows(); ++i)
    h << format_double(sim.holdout(i, 0)) << ',' << format_double(sim.holdout(i, 1)) << ','
      << format_double(sim.holdout_values[i]) << '\n';
  log << "simulated " << sim.dataset.size() << " sites (" << sim.dataset.censored_indices().size()
      << " censored) and " << sim.holdout.rows() << " hold-out points\n";
  return 0;
}

int cmd_fit(const RunConfig& cfg, std::ostream& log) {
  fit_and_write(cfg, load_input(cfg), log);
  return 0;
}

int cmd_predict(const RunConfig& cfg, std::ostream& log) {
  const SpatialDataset ds = load_input(cfg);
  const Locations where =
      cfg.new_locations.empty() ? prediction_grid(ds.coords, cfg.grid_nx, cfg.grid_ny) : read_locations(cfg.new_locations);
  const ChainOutput chain = fit_and_write(cfg, ds, log);
  Rng rng(cfg.chain.seed + 1);
  write_predictions_csv(out_path(cfg, "predictions.csv"), predict(rng, chain, ds, where));
  return 0;
}

int cmd_compare(const RunConfig& cfg, std::ostream& log) {
  const SpatialDataset ds = load_input(cfg);
  std::pair<Locations, Vector> hold;
  if (!cfg.holdout.empty()) hold = load_holdout(cfg.holdout);
  json models = json::array();
  std::string best_dic, best_lpml, best_rmse;
  double min_dic = std::numeric_limits<double>::infinity();
  double max_lpml = -std::numeric_limits<double>::infinity();
  double min_rmse = std::numeric_limits<double>::infinity();
  for (ModelKind kind : kAllKinds) {
    ChainConfig c = cfg.chain;
    c.kind = kind;
    log << "fitting " << to_string(kind) << '\n';
    const ChainOutput chain = run_chain(ds, c);
    const DicResult d = dic(chain, ds);
    const LpmlResult l = lpml(chain, ds);
    json m{{"model", to_string(kind)}, {"dic", d.dic}, {"pd", d.pd}, {"dbar", d.dbar}, {"lpml", l.lpml}};
    if (!l.diagnostic.empty()) m["lpml_diagnostic"] = l.diagnostic;
    if (d.dic < min_dic) min_dic = d.dic, best_dic = to_string(kind);
    if (l.lpml > max_lpml) max_lpml = l.lpml, best_lpml = to_string(kind);
    if (!cfg.holdout.empty()) {
      Rng rng(c.seed + 1);
      const double r = rmse(predict(rng, chain, ds, hold.first), hold.second);
      m["rmse"] = r;
      if (r < min_rmse) min_rmse = r, best_rmse = to_string(kind);
    } else {
      m["rmse"] = nullptr;
    }
    models.push_back(m);
  }
  json j{{"models", models}, {"best_dic", best_dic}, {"best_lpml", best_lpml}};
  j["best_rmse"] = best_rmse.empty() ? json(nullptr) : json(best_rmse);
  write_json(out_path(cfg, "comparison.json"), j);
  return 0;
}

int cmd_sensitivity(const RunConfig& cfg, std::ostream& log) {
  const SpatialDataset ds = load_input(cfg);
  const std::vector<Hyperparams> alts = cfg.alternates.empty() ? default_alternates() : cfg.alternates;
  log << "fitting benchmark prior\n";
  const ChainOutput bench = run_chain(ds, cfg.chain);
  std::vector<ChainOutput> runs;
  for (std::size_t a = 0; a < alts.size(); ++a) {
    ChainConfig c = cfg.chain;
    c.hyper = alts[a];
    log << "fitting alternate " << (a + 1) << " of " << alts.size() << '\n';
    runs.push_back(run_chain(ds, c));
  }
  const auto mrc = sensitivity(bench, runs);
  std::ofstream f(out_path(cfg, "sensitivity.csv"), std::ios::binary);
  f << "parameter,mrc\n";
  for (const auto& name : parameter_names(cfg.chain.kind, ds.design.cols()))
    f << name << ',' << format_double(mrc.at(name)) << '\n';
  return 0;
}

int cmd_outliers(const RunConfig& cfg, std::ostream& log) {
  const SpatialDataset ds = load_input(cfg);
  if (!is_mixture(cfg.chain.kind))
    throw KindError("outliers: model " + to_string(cfg.chain.kind) + " has no mixing field");
  const ChainOutput chain = fit_and_write(cfg, ds, log);
  const Vector score = outlier_scores(chain);
  std::vector<Index> order(score.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return score[a] < score[b]; });
  std::vector<Index> rank(score.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = static_cast<Index>(r + 1);
  std::ofstream f(out_path(cfg, "outliers.csv"), std::ios::binary);
  f << "id,x,y,lambda_mean,rank\n";
  for (Index i = 0; i < ds.size(); ++i)
    f << ds.ids[i] << ',' << format_double(ds.coords(i, 0)) << ',' << format_double(ds.coords(i, 1)) << ','
      << format_double(score[i]) << ',' << rank[i] << '\n';
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian spatial models for skewed, heavy-tailed and censored data", "suglg"};
  app.require_subcommand(1);
  Flags f;
  std::map<std::string, FlagOptions> opts;
  std::map<std::string, std::function<int(const RunConfig&, std::ostream&)>> handlers = {
      {"simulate", cmd_simulate}, {"fit", cmd_fit}, {"predict", cmd_predict}, {"compare", cmd_compare},
      {"sensitivity", cmd_sensitivity}, {"outliers", cmd_outliers}};
  const std::map<std::string, std::string> about = {
      {"simulate", "simulate the 97-site design with a hold-out lattice"},
      {"fit", "run the sampler and write chain.csv and summary.json"},
      {"predict", "fit, then predict at new locations or on a grid"},
      {"compare", "fit all four model kinds and write comparison.json"},
      {"sensitivity", "refit under alternative priors and write sensitivity.csv"},
      {"outliers", "fit and write per-site posterior mean lambda"}};
  for (const auto& [name, _] : handlers) {
    CLI::App* sub = app.add_subcommand(name, about.at(name));
    FlagOptions& o = opts[name];
    add_common(sub, f, o);
    if (name == "simulate") {
      o.censor_count = sub->add_option("--censor-count", f.censor_count, "number of values to left-censor");
      o.outlier_shift = sub->add_option("--outlier-shift", f.outlier_shift, "shift added at the outlier sites");
    } else {
      add_input(sub, f, o);
    }
    if (name == "compare") o.holdout = sub->add_option("--holdout", f.holdout, "x,y,value CSV for RMSE");
    if (name == "predict") {
      o.new_locations = sub->add_option("--new-locations", f.new_locations, "x,y CSV of prediction sites");
      o.grid = sub->add_option("--grid", f.grid, "prediction grid size NX NY")->expected(2);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const RunConfig cfg = resolve(f, opts.at(name));
    return handlers.at(name)(cfg, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace suglg
