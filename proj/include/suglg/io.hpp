#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "suglg/inference.hpp"
#include "suglg/sampler.hpp"

namespace suglg {

/// Shortest round-tripping text for a double: 17 significant digits,
/// "+inf"/"-inf" for infinities.
std::string format_double(double v);

/// Parses a CSV number; accepts "inf", "+inf", "-inf". Throws FormatError.
double parse_double(const std::string& field, long line);

/// Reads `id,x,y,value,cens_lo,cens_hi`. Exact rows leave the censor columns
/// empty; censored rows leave `value` empty.
SpatialDataset read_dataset(std::istream& in);
SpatialDataset read_dataset(const std::string& path);
void write_dataset(std::ostream& out, const SpatialDataset& ds);
void write_dataset(const std::string& path, const SpatialDataset& ds);

/// Reads `x,y` rows (header required).
Locations read_locations(const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

/// Numeric CSV with a header row.
CsvTable read_csv_table(const std::string& path);

void write_chain_csv(const std::string& path, const ChainOutput& chain, const SpatialDataset& ds,
                     bool save_lambda);
void write_summary_json(const std::string& path, const ChainOutput& chain, const ChainConfig& cfg);
void write_predictions_csv(const std::string& path, const std::vector<PredictionResult>& preds);
void write_latent_csv(const std::string& path, const SpatialDataset& ds, const LatentRecord& latent);

/// Everything a CLI run needs; loaded from JSON, then overridden by flags.
struct RunConfig {
  ChainConfig chain;
  bool seed_set = false;
  std::string input;  // dataset CSV, or "rainfall" for the embedded data
  std::string output = ".";
  std::string new_locations;
  int grid_nx = 20;
  int grid_ny = 20;
  std::string holdout;
  Index censor_count = 17;
  double outlier_shift = 2.0;
  bool save_lambda = false;
  std::vector<Hyperparams> alternates;
};

/// Applies the keys of a JSON object to `cfg`. Unknown keys are an error.
void apply_config_json(RunConfig& cfg, const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// Hyperparameter sets varied in the prior-sensitivity experiment: each
/// alternate moves every hyperparameter group to one of its two
/// alternative values at once.
std::vector<Hyperparams> default_alternates();

}  // namespace suglg
