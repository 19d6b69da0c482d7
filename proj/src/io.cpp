#include "suglg/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "suglg/rainfall.hpp"

namespace suglg {

namespace {

using json = nlohmann::json;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open '" + path + "' for writing");
  return out;
}

json stats_json(const Vector& draws) {
  const PredictionResult s = summarize_draws(0.0, 0.0, draws);
  return json{{"mean", s.mean}, {"sd", s.sd}, {"q2.5", s.q025}, {"q50", s.q50}, {"q97.5", s.q975}};
}

void apply_hyper(Hyperparams& h, const json& j) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    double* slot = k == "c0" ? &h.c0 : k == "c1" ? &h.c1 : k == "c2" ? &h.c2 : k == "c3" ? &h.c3
                 : k == "c4" ? &h.c4 : k == "c5" ? &h.c5 : k == "c6" ? &h.c6 : k == "c7" ? &h.c7
                 : k == "c8" ? &h.c8 : k == "c9" ? &h.c9 : nullptr;
    if (slot == nullptr) throw ArgumentError("config: unknown hyperparameter '" + k + "'");
    *slot = it.value().get<double>();
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& raw, long line) {
  const std::string f = trim(raw);
  if (f == "inf" || f == "+inf" || f == "Inf" || f == "+Inf") return std::numeric_limits<double>::infinity();
  if (f == "-inf" || f == "-Inf") return -std::numeric_limits<double>::infinity();
  const char* b = f.data();
  const char* e = f.data() + f.size();
  if (b != e && *b == '+') ++b;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (f.empty() || ec != std::errc() || ptr != e) throw FormatError("not a number: '" + f + "'", line);
  return v;
}

SpatialDataset read_dataset(std::istream& in) {
  std::string line;
  long lineno = 1;
  if (!std::getline(in, line)) throw FormatError("empty file", lineno);
  const auto head = split_csv(line);
  const std::vector<std::string> expected = {"id", "x", "y", "value", "cens_lo", "cens_hi"};
  std::vector<std::string> got;
  for (const auto& h : head) got.push_back(trim(h));
  if (!got.empty() && got[0].rfind("\xEF\xBB\xBF", 0) == 0) got[0] = got[0].substr(3);
  if (got != expected) throw FormatError("header must be id,x,y,value,cens_lo,cens_hi", lineno);

  std::vector<std::string> ids;
  std::vector<double> xs, ys, vals;
  std::vector<CensorInterval> ivs;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 6) throw FormatError("expected 6 fields, found " + std::to_string(f.size()), lineno);
    const bool has_value = !trim(f[3]).empty();
    const bool has_lo = !trim(f[4]).empty();
    const bool has_hi = !trim(f[5]).empty();
    ids.push_back(trim(f[0]));
    xs.push_back(parse_double(f[1], lineno));
    ys.push_back(parse_double(f[2], lineno));
    if (has_value && (has_lo || has_hi))
      throw FormatError("row has both a value and censoring bounds", lineno);
    if (has_value) {
      const double v = parse_double(f[3], lineno);
      if (!std::isfinite(v)) throw FormatError("exact value must be finite", lineno);
      vals.push_back(v);
      ivs.push_back(CensorInterval{});
    } else {
      if (!has_lo && !has_hi) throw FormatError("row has neither a value nor censoring bounds", lineno);
      CensorInterval iv;
      if (has_lo) iv.lo = parse_double(f[4], lineno);
      if (has_hi) iv.hi = parse_double(f[5], lineno);
      if (!(iv.lo < iv.hi)) throw FormatError("censoring interval needs lo < hi", lineno);
      vals.push_back(std::numeric_limits<double>::quiet_NaN());
      ivs.push_back(iv);
    }
  }
  const Index n = static_cast<Index>(ids.size());
  if (n == 0) throw FormatError("no data rows", lineno);
  SpatialDataset ds;
  ds.coords.resize(n, 2);
  ds.values.resize(n);
  for (Index i = 0; i < n; ++i) {
    ds.coords(i, 0) = xs[i];
    ds.coords(i, 1) = ys[i];
    ds.values[i] = vals[i];
  }
  ds.design = Matrix::Ones(n, 1);
  ds.intervals = std::move(ivs);
  ds.ids = std::move(ids);
  ds.validate();
  return ds;
}

SpatialDataset read_dataset(const std::string& path) {
  if (path == "rainfall") return embedded_rainfall();
  auto in = open_in(path);
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const SpatialDataset& ds) {
  out << "id,x,y,value,cens_lo,cens_hi\n";
  for (Index i = 0; i < ds.size(); ++i) {
    const std::string id = ds.ids.empty() ? std::to_string(i + 1) : ds.ids[i];
    out << id << ',' << format_double(ds.coords(i, 0)) << ',' << format_double(ds.coords(i, 1)) << ',';
    if (ds.is_censored(i))
      out << ',' << format_double(ds.intervals[i].lo) << ',' << format_double(ds.intervals[i].hi) << '\n';
    else
      out << format_double(ds.values[i]) << ",,\n";
  }
}

void write_dataset(const std::string& path, const SpatialDataset& ds) {
  auto out = open_out(path);
  write_dataset(out, ds);
}

CsvTable read_csv_table(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  long lineno = 1;
  if (!std::getline(in, line)) throw FormatError("empty file", lineno);
  CsvTable t;
  for (const auto& h : split_csv(line)) t.header.push_back(trim(h));
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != t.header.size())
      throw FormatError("expected " + std::to_string(t.header.size()) + " fields, found " + std::to_string(f.size()),
                        lineno);
    std::vector<double> r;
    for (const auto& x : f) r.push_back(parse_double(x, lineno));
    rows.push_back(std::move(r));
  }
  t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.header.size()));
  for (Index i = 0; i < t.values.rows(); ++i)
    for (Index j = 0; j < t.values.cols(); ++j) t.values(i, j) = rows[i][j];
  return t;
}

Locations read_locations(const std::string& path) {
  const CsvTable t = read_csv_table(path);
  if (t.header.size() < 2 || t.header[0] != "x" || t.header[1] != "y")
    throw FormatError("locations file must start with columns x,y", 1);
  Locations l(t.values.rows(), 2);
  l.col(0) = t.values.col(0);
  l.col(1) = t.values.col(1);
  return l;
}

void write_chain_csv(const std::string& path, const ChainOutput& chain, const SpatialDataset& ds,
                     bool save_lambda) {
  auto out = open_out(path);
  const Index k = chain.params.empty() ? ds.design.cols() : chain.params.front().beta.size();
  const auto names = parameter_names(chain.kind, k);
  out << "draw";
  for (const auto& n : names) out << ',' << n;
  out << ",log_conditional";
  if (save_lambda)
    for (Index i = 0; i < ds.size(); ++i) out << ",lambda_" << (i + 1);
  out << '\n';
  for (Index d = 0; d < chain.size(); ++d) {
    out << (d + 1);
    const Vector v = parameter_vector(chain.params[d], chain.kind);
    for (Index j = 0; j < v.size(); ++j) out << ',' << format_double(v[j]);
    out << ',' << format_double(chain.log_conditional[d]);
    if (save_lambda)
      for (Index i = 0; i < ds.size(); ++i) out << ',' << format_double(chain.lambda(d, i));
    out << '\n';
  }
}

void write_summary_json(const std::string& path, const ChainOutput& chain, const ChainConfig& cfg) {
  json j;
  j["model"] = to_string(chain.kind);
  j["draws"] = chain.size();
  j["length"] = cfg.length;
  j["burnin"] = cfg.burn_in;
  j["thin"] = cfg.thin;
  j["seed"] = cfg.seed;
  json params = json::object();
  if (chain.size() > 0) {
    const Matrix t = parameter_table(chain);
    const auto names = parameter_names(chain.kind, chain.params.front().beta.size());
    for (Index c = 0; c < t.cols(); ++c) params[names[c]] = stats_json(t.col(c));
    params["log_conditional"] = stats_json(chain.log_conditional);
  }
  j["parameters"] = params;
  j["acceptance"] = chain.acceptance;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_predictions_csv(const std::string& path, const std::vector<PredictionResult>& preds) {
  auto out = open_out(path);
  out << "x,y,mean,sd,q2.5,q50,q97.5\n";
  for (const auto& p : preds)
    out << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(p.mean) << ','
        << format_double(p.sd) << ',' << format_double(p.q025) << ',' << format_double(p.q50) << ','
        << format_double(p.q975) << '\n';
}

void write_latent_csv(const std::string& path, const SpatialDataset& ds, const LatentRecord& latent) {
  auto out = open_out(path);
  out << "id,x,y,lambda,u,v,rho,y_true\n";
  for (Index i = 0; i < ds.size(); ++i) {
    out << (ds.ids.empty() ? std::to_string(i + 1) : ds.ids[i]) << ',' << format_double(ds.coords(i, 0)) << ','
        << format_double(ds.coords(i, 1)) << ',' << format_double(latent.lambda[i]) << ','
        << format_double(latent.u[i]) << ',' << format_double(latent.v[i]) << ','
        << format_double(latent.rho[i]) << ',' << format_double(latent.y[i]) << '\n';
  }
}

void apply_config_json(RunConfig& cfg, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what(), 0);
  }
  if (!j.is_object()) throw FormatError("config must be a JSON object", 1);
  try {
    if (j.contains("preset")) {
      const auto p = j["preset"].get<std::string>();
      ChainConfig base = p == "paper" ? ChainConfig::paper() : p == "quick" ? ChainConfig::quick()
                                                             : throw ArgumentError("config: unknown preset '" + p + "'");
      cfg.chain.length = base.length;
      cfg.chain.burn_in = base.burn_in;
      cfg.chain.thin = base.thin;
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const json& v = it.value();
      if (k == "preset") continue;
      if (k == "model") cfg.chain.kind = parse_model_kind(v.get<std::string>());
      else if (k == "seed") {
        cfg.chain.seed = v.get<std::uint64_t>();
        cfg.seed_set = true;
      } else if (k == "iters") cfg.chain.length = v.get<long>();
      else if (k == "burnin") cfg.chain.burn_in = v.get<long>();
      else if (k == "thin") cfg.chain.thin = v.get<long>();
      else if (k == "adapt") cfg.chain.adapt = v.get<bool>();
      else if (k == "u_sweeps") cfg.chain.u_sweeps = v.get<int>();
      else if (k == "orthant_points") cfg.chain.orthant_points = v.get<int>();
      else if (k == "sigma2_mode") {
        const auto m = v.get<std::string>();
        if (m == "conjugate") cfg.chain.sigma2_mode = Sigma2Mode::Conjugate;
        else if (m == "mh") cfg.chain.sigma2_mode = Sigma2Mode::Metropolis;
        else throw ArgumentError("config: sigma2_mode must be conjugate or mh");
      } else if (k == "omega2_mode") {
        const auto m = v.get<std::string>();
        if (m == "mh") cfg.chain.omega2_mode = Omega2Mode::Metropolis;
        else if (m == "gig") cfg.chain.omega2_mode = Omega2Mode::Gig;
        else throw ArgumentError("config: omega2_mode must be mh or gig");
      } else if (k == "hyper") apply_hyper(cfg.chain.hyper, v);
      else if (k == "proposal") {
        auto& p = cfg.chain.proposal;
        for (auto pit = v.begin(); pit != v.end(); ++pit) {
          const std::string& pk = pit.key();
          double* slot = pk == "sigma2" ? &p.sigma2 : pk == "omega2" ? &p.omega2 : pk == "nu" ? &p.nu
                       : pk == "lambda" ? &p.lambda : pk == "theta_w" ? &p.theta_w
                       : pk == "theta_lambda" ? &p.theta_lambda : nullptr;
          if (slot == nullptr) throw ArgumentError("config: unknown proposal scale '" + pk + "'");
          *slot = pit.value().get<double>();
        }
      } else if (k == "input") cfg.input = v.get<std::string>();
      else if (k == "out") cfg.output = v.get<std::string>();
      else if (k == "new_locations") cfg.new_locations = v.get<std::string>();
      else if (k == "grid") {
        cfg.grid_nx = v.at(0).get<int>();
        cfg.grid_ny = v.at(1).get<int>();
      } else if (k == "holdout") cfg.holdout = v.get<std::string>();
      else if (k == "censor_count") cfg.censor_count = v.get<Index>();
      else if (k == "outlier_shift") cfg.outlier_shift = v.get<double>();
      else if (k == "save_lambda") cfg.save_lambda = v.get<bool>();
      else if (k == "alternates") {
        cfg.alternates.clear();
        for (const auto& a : v) {
          Hyperparams h = cfg.chain.hyper;
          apply_hyper(h, a);
          cfg.alternates.push_back(h);
        }
      } else {
        throw ArgumentError("config: unknown key '" + k + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config: wrong value type: ") + e.what());
  }
}

RunConfig load_run_config(const std::string& path) {
  auto in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg;
  apply_config_json(cfg, ss.str());
  return cfg;
}

std::vector<Hyperparams> default_alternates() {
  Hyperparams a;
  a.c0 = 1e2;
  a.c1 = 1e3;
  a.c2 = 1e-4;
  a.c3 = 1e-8;
  a.c4 = 0.7;
  a.c5 = 1.5;
  a.c6 = 0.30;
  a.c7 = 1.0;
  a.c8 = 0.4;
  a.c9 = 0.35;
  Hyperparams b;
  b.c0 = 1e6;
  b.c1 = 1e7;
  b.c2 = 1e-8;
  b.c3 = 1e-4;
  b.c4 = 0.5;
  b.c5 = 0.7;
  b.c6 = 0.75;
  b.c7 = 0.8;
  b.c8 = 1.4;
  b.c9 = 1.60;
  return {a, b};
}

}  // namespace suglg
