#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "epf/error.hpp"
#include "epf/pipeline.hpp"
#include "epf/synthetic.hpp"

using namespace epf;
namespace fs = std::filesystem;

namespace {

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

// Small enough to run in seconds.
PipelineConfig quick_config() {
  PipelineConfig c;
  c.n_train = 400;
  c.n_test = 120;
  c.ceemdan.ensemble_size = 8;
  c.sae_train.epochs = 3;
  c.train.epochs = 3;
  c.hidden_dim = 6;
  c.trace_length = 24;
  c.threads = 2;
  return c;
}

TimeSeries quick_series() {
  SyntheticSpec spec;
  spec.length = 520;
  return generate_synthetic(spec);
}

struct Run {
  int code;
  std::string output;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(EPF_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string output;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) output += buf;
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("epf_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, DefaultsMatchProtocol) {
  const PipelineConfig c;
  EXPECT_EQ(c.n_train, 28032u);
  EXPECT_EQ(c.n_test, 7008u);
  EXPECT_EQ(c.window, 24u);
  EXPECT_EQ(c.horizons, (std::vector<std::size_t>{3, 6, 9, 12}));
  EXPECT_EQ(c.ceemdan.ensemble_size, 100u);
  EXPECT_EQ(c.pe_threshold, 0.7);
  EXPECT_EQ(c.resolved_sae_dims(false), (std::vector<std::size_t>{24, 16, 12, 8}));
  EXPECT_EQ(c.resolved_sae_dims(true).front(), 48u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParsesAndRoundTrips) {
  const auto c = parse_config(R"({"data": {"n_train": 100, "n_test": 20}, "horizons": [3, 6],
                                  "trace": {"horizon": 6}, "model": {"cells": ["lstm"]}, "seed": 9})");
  EXPECT_EQ(c.n_train, 100u);
  EXPECT_EQ(c.horizons, (std::vector<std::size_t>{3, 6}));
  EXPECT_EQ(c.cells, (std::vector<nn::CellKind>{nn::CellKind::Lstm}));
  EXPECT_EQ(c.seed, 9u);
  const auto again = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(again), config_to_json(c));
  EXPECT_EQ(again.hash(), c.hash());
}

TEST(Config, NegativeLearningRateNamesField) {
  const auto msg = error_of([] { parse_config(R"({"train": {"learning_rate": -0.01}})"); });
  EXPECT_NE(msg.find("train.learning_rate"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyNamesField) {
  const auto msg = error_of([] { parse_config(R"({"ceemdan": {"ensemble": 5}})"); });
  EXPECT_NE(msg.find("ceemdan.ensemble"), std::string::npos) << msg;
}

TEST(Config, TypeErrorsNameField) {
  EXPECT_NE(error_of([] { parse_config(R"({"window": "24"})"); }).find("window"), std::string::npos);
  EXPECT_NE(error_of([] { parse_config(R"({"horizons": [3, -1]})"); }).find("horizons[1]"), std::string::npos);
  EXPECT_NE(error_of([] { parse_config(R"({"model": {"cells": ["rnn"]}})"); }).find("model.cells[0]"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_config(R"({"pe": {"threshold": 1.5}})"); }).find("pe.threshold"), std::string::npos);
  EXPECT_NE(error_of([] { parse_config("{oops"); }).find("invalid JSON"), std::string::npos);
}

TEST(Config, HashIgnoresPathsButNotSettings) {
  PipelineConfig a;
  PipelineConfig b = a;
  b.output_dir = "elsewhere";
  b.threads = 7;
  EXPECT_EQ(a.hash(), b.hash());
  b.seed = a.seed + 1;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Seeds, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, 1), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 1), derive_seed(2, 1));
  EXPECT_EQ(derive_seed(5, 9), derive_seed(5, 9));
}

TEST(Pipeline, PredictionsMatchForecastEntryPoint) {
  auto cfg = quick_config();
  cfg.horizons = {3};
  const auto data = prepare_data(quick_series(), cfg);
  const auto sae = pretrain_sae(data, cfg);
  const auto model = train_model(data, sae, nn::CellKind::Gru, 3, cfg);
  const auto preds = predict_test(model, data);
  // First sample: span [0, 31) of the denoised test series, target at 30 + 3.
  ASSERT_FALSE(preds.target_index.empty());
  EXPECT_EQ(preds.target_index.front(), 33u);
  const std::span<const double> recent(data.test_denoised.series.values.data(), model.input_span());
  EXPECT_NEAR(nn::forecast(model, recent), preds.predicted.front(), 1e-9);
  EXPECT_EQ(preds.actual.front(), data.test_raw.values[33]);
}

TEST(Pipeline, ScalerFitsTrainingSplitOnly) {
  auto cfg = quick_config();
  const auto series = quick_series();
  const auto data = prepare_data(series, cfg);
  const auto [lo, hi] = std::minmax_element(series.values.begin(), series.values.begin() + 400);
  EXPECT_EQ(data.scaler.min(), *lo);
  EXPECT_EQ(data.scaler.max(), *hi);
}

TEST(Pipeline, BenchmarkShapeAndDeterminism) {
  const auto cfg = quick_config();
  const auto series = quick_series();
  const auto a = run_benchmark(series, cfg);
  EXPECT_EQ(a.table.cells.size(), 8u);
  EXPECT_TRUE(a.table.all_ok());
  for (const auto& c : a.table.cells) EXPECT_GE(c.rmse, c.mae);
  ASSERT_EQ(a.trace.size(), 24u);
  EXPECT_TRUE(a.trace.front().gru.has_value());
  EXPECT_TRUE(a.trace.front().lstm.has_value());
  EXPECT_EQ(a.trace.front().timestamp.substr(0, 4), "2019");

  const auto b = run_benchmark(series, cfg);
  EXPECT_EQ(table_to_csv(a.table), table_to_csv(b.table));
  EXPECT_EQ(trace_to_csv(a.trace), trace_to_csv(b.trace));

  const auto dir = scratch_dir("bench");
  write_benchmark(a, dir);
  for (const char* f : {"table.csv", "table.txt", "trace.csv", "denoise_report.json"}) EXPECT_TRUE(fs::exists(dir / f));
  EXPECT_EQ(read_file(dir / "trace.csv").substr(0, 45), "timestamp,actual,predicted_gru,predicted_lstm");
}

TEST(Pipeline, FailingCellIsMarkedAndOthersRun) {
  auto cfg = quick_config();
  cfg.n_test = 40;  // enough for h=3 (needs 34) but not for h=12 (needs 43)
  const auto series = quick_series();
  const auto r = run_benchmark(series, cfg);
  EXPECT_TRUE(r.table.at(0, 0).ok);
  EXPECT_FALSE(r.table.at(0, 3).ok);
  EXPECT_NE(table_to_csv(r.table).find("FAILED"), std::string::npos);
}

TEST(Cli, InvalidConfigExitsWithConfigCode) {
  const auto dir = scratch_dir("cli_config");
  write_file(dir / "bad.json", R"({"train": {"learning_rate": -1}})");
  const auto r = run_cli("benchmark -c " + (dir / "bad.json").string() + " -d /dev/null");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("train.learning_rate"), std::string::npos) << r.output;
}

TEST(Cli, MissingDataExitsWithDataCode) {
  const auto r = run_cli("denoise -d /nonexistent/prices.csv");
  EXPECT_EQ(r.code, 2) << r.output;
}

TEST(Cli, UnknownSubcommandIsConfigError) { EXPECT_EQ(run_cli("frobnicate").code, 1); }

TEST(Cli, DenoiseAndDecomposeAgree) {
  const auto dir = scratch_dir("cli_consistency");
  ASSERT_EQ(run_cli("synth -n 300 -o " + (dir / "s.csv").string()).code, 0);
  write_file(dir / "c.json", R"({"ceemdan": {"ensemble_size": 10}})");
  const std::string common = " -c " + (dir / "c.json").string() + " -d " + (dir / "s.csv").string() + " -o " + dir.string();
  ASSERT_EQ(run_cli("denoise" + common).code, 0);
  ASSERT_EQ(run_cli("decompose" + common).code, 0);

  // First column of the dump is IMF 1.
  std::ifstream dump(dir / "imfs.csv");
  std::string line;
  std::string header;
  std::getline(dump, header);
  EXPECT_EQ(header.substr(0, 5), "imf1,");
  std::vector<double> imf1;
  while (std::getline(dump, line)) imf1.push_back(std::stod(line.substr(0, line.find(','))));
  ASSERT_EQ(imf1.size(), 300u);

  const auto report = nlohmann::json::parse(read_file(dir / "denoise_report.json"));
  EXPECT_EQ(report.at("imfs").at(0).at("permutation_entropy").get<double>(), permutation_entropy(imf1, PeConfig{}));
  // imf1..imfK,residue has K commas.
  EXPECT_EQ(report.at("imfs").size(), static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')));
}

TEST(Cli, TrainThenPredict) {
  const auto dir = scratch_dir("cli_train");
  ASSERT_EQ(run_cli("synth -n 400 -o " + (dir / "s.csv").string()).code, 0);
  write_file(dir / "c.json", R"({"data": {"n_train": 300, "n_test": 100}, "horizons": [3], "model": {"cells": ["gru"]},
                                 "ceemdan": {"ensemble_size": 6}, "sae": {"epochs": 2}, "train": {"epochs": 2}})");
  const std::string cfg = " -c " + (dir / "c.json").string();
  ASSERT_EQ(run_cli("train" + cfg + " -d " + (dir / "s.csv").string() + " -o " + dir.string()).code, 0);
  ASSERT_TRUE(fs::exists(dir / "model_gru_h3.json"));
  const auto r = run_cli("predict" + cfg + " -m " + (dir / "model_gru_h3.json").string() + " -i " +
                         (dir / "s.csv").string() + " -o " + (dir / "pred").string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto out = read_file(dir / "pred" / "forecast.csv");
  EXPECT_EQ(out.substr(0, 16), "target,forecast\n");
  EXPECT_EQ(static_cast<std::size_t>(std::count(out.begin(), out.end(), '\n')), 1u + 400u - 31u + 1u);
}
