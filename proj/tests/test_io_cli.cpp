#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "suglg/io.hpp"
#include "suglg/rainfall.hpp"

using namespace suglg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("suglg_unit_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "suglg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::size_t count_lines(const std::string& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++n;
  return n;
}

const std::string kHeader = "id,x,y,value,cens_lo,cens_hi\n";

}  // namespace

TEST_CASE("parse_double") {
  CHECK(parse_double("1.5", 1) == 1.5);
  CHECK(parse_double("-inf", 1) == -INFINITY);
  CHECK(parse_double("+inf", 1) == INFINITY);
  CHECK(parse_double("Inf", 1) == INFINITY);
  CHECK_THROWS_AS(parse_double("abc", 3), FormatError);
  CHECK_THROWS_AS(parse_double("1.5x", 3), FormatError);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1.61606073, 1e17}) CHECK(parse_double(format_double(v), 1) == v);
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("read_dataset") {
  std::istringstream in(kHeader + "a,0,0,1.5,,\nb,1,0,,-inf,0.2\nc,0,1,0.7,,\n");
  const SpatialDataset ds = read_dataset(in);
  CHECK(ds.size() == 3);
  CHECK(ds.ids[1] == "b");
  CHECK(ds.is_censored(1));
  CHECK(std::isinf(ds.intervals[1].lo));
  CHECK(ds.intervals[1].hi == 0.2);
  CHECK(ds.design.isOnes());
}

TEST_CASE("read_dataset errors carry line numbers") {
  const auto line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_dataset(in);
    } catch (const FormatError& e) {
      return e.line();
    }
    return -1L;
  };
  CHECK(line_of("id,x,y\n") == 1);
  CHECK(line_of(kHeader + "a,0,0,1,,\nb,1,0\n") == 3);
  CHECK(line_of(kHeader + "a,0,0,1,0,2\n") == 2);
  CHECK(line_of(kHeader + "a,0,0,,,\n") == 2);
  CHECK(line_of(kHeader + "a,0,0,,2,1\n") == 2);
  CHECK(line_of(kHeader + "a,0,0,inf,,\n") == 2);
  CHECK(line_of(kHeader + "a,zero,0,1,,\n") == 2);
  CHECK(line_of(kHeader) > 0);
  std::istringstream dup(kHeader + "a,0,0,1,,\nb,0,0,2,,\n");
  CHECK_THROWS_AS(read_dataset(dup), ValidationError);
}

TEST_CASE("dataset write/read round trip") {
  const SpatialDataset ds = embedded_rainfall();
  std::stringstream buf;
  write_dataset(buf, ds);
  const SpatialDataset back = read_dataset(buf);
  CHECK(back.coords == ds.coords);
  CHECK(back.ids == ds.ids);
  for (Index i = 0; i < ds.size(); ++i) {
    CHECK(back.is_censored(i) == ds.is_censored(i));
    if (ds.is_censored(i)) {
      CHECK(back.intervals[i].lo == ds.intervals[i].lo);
      CHECK(back.intervals[i].hi == ds.intervals[i].hi);
    } else {
      CHECK(back.values[i] == ds.values[i]);
    }
  }
}

TEST_CASE("config json") {
  RunConfig cfg;
  apply_config_json(cfg, R"({"model":"glg","seed":5,"iters":300,"burnin":100,"thin":2,
                             "hyper":{"c4":0.3},"proposal":{"nu":0.2},"grid":[4,6],"sigma2_mode":"mh"})");
  CHECK(cfg.chain.kind == ModelKind::Glg);
  CHECK(cfg.seed_set);
  CHECK(cfg.chain.seed == 5);
  CHECK(cfg.chain.length == 300);
  CHECK(cfg.chain.hyper.c4 == 0.3);
  CHECK(cfg.chain.proposal.nu == 0.2);
  CHECK(cfg.grid_ny == 6);
  CHECK(cfg.chain.sigma2_mode == Sigma2Mode::Metropolis);
  CHECK_THROWS_AS(apply_config_json(cfg, R"({"iterations":5})"), ArgumentError);
  CHECK_THROWS_AS(apply_config_json(cfg, R"({"hyper":{"c10":1}})"), ArgumentError);
  CHECK_THROWS_AS(apply_config_json(cfg, R"({"seed":"x"})"), ArgumentError);
  CHECK_THROWS_AS(apply_config_json(cfg, "{"), FormatError);
  CHECK(default_alternates().size() == 2);
}

TEST_CASE("cli exit codes") {
  TempDir dir("codes");
  std::string err;
  CHECK(run({}) == 1);
  CHECK(run({"fit", "--input", "rainfall", "--out", dir.path.string()}, &err) == 1);
  CHECK(err.find("seed") != std::string::npos);
  CHECK(run({"fit", "--bogus"}) == 1);
  CHECK(run({"fit", "--input", dir / "missing.csv", "--seed", "1", "--out", dir.path.string()}) == 1);
  CHECK(run({"fit", "--model", "XYZ", "--input", "rainfall", "--seed", "1", "--out", dir.path.string()}) == 1);
  CHECK(run({"outliers", "--model", "GAUS", "--input", "rainfall", "--seed", "1", "--iters", "30", "--burnin",
             "10", "--thin", "1", "--out", dir.path.string()}) == 2);
}

TEST_CASE("cli simulate and fit") {
  TempDir dir("sim");
  const std::string out = dir.path.string();
  REQUIRE(run({"simulate", "--seed", "4", "--out", out}) == 0);
  CHECK(count_lines(dir / "dataset.csv") == 98);
  CHECK(count_lines(dir / "holdout.csv") == 17);
  CHECK(count_lines(dir / "latent.csv") == 98);
  const SpatialDataset ds = read_dataset(dir / "dataset.csv");
  CHECK(ds.censored_indices().size() == 17);

  REQUIRE(run({"fit", "--input", dir / "dataset.csv", "--seed", "2", "--iters", "60", "--burnin", "20", "--thin",
               "4", "--model", "SUG", "--out", out}) == 0);
  const CsvTable chain = read_csv_table(dir / "chain.csv");
  CHECK(chain.values.rows() == 10);
  CHECK(chain.header.front() == "draw");
  CHECK(count_lines(dir / "censored.csv") == 18);

  std::ifstream js(dir / "summary.json");
  const auto summary = nlohmann::json::parse(js);
  CHECK(summary["model"] == "SUG");
  CHECK(summary["draws"] == 10);
  for (std::size_t c = 1; c < chain.header.size(); ++c) {
    const std::string& name = chain.header[c];
    const Vector col = chain.values.col(static_cast<Index>(c));
    const double mean = col.mean();
    CHECK(summary["parameters"][name]["mean"].get<double>() == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("cli predict writes one row per grid point") {
  TempDir dir("pred");
  REQUIRE(run({"predict", "--input", "rainfall", "--seed", "3", "--iters", "40", "--burnin", "20", "--thin", "2",
               "--model", "GAUS", "--grid", "3", "4", "--out", dir.path.string()}) == 0);
  const CsvTable t = read_csv_table(dir / "predictions.csv");
  CHECK(t.values.rows() == 12);
  CHECK(t.header == std::vector<std::string>{"x", "y", "mean", "sd", "q2.5", "q50", "q97.5"});
  CHECK((t.values.col(3).array() > 0.0).all());
}
