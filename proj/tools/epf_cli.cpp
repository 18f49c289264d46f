// epf: command-line front end for the decomposition, denoising and
// forecasting pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "epf/denoise.hpp"
#include "epf/emd.hpp"
#include "epf/error.hpp"
#include "epf/pipeline.hpp"
#include "epf/synthetic.hpp"
#include "epf/timeseries.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kDataError = 2, kNumericError = 3 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string data;
  std::string out;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool with_data = true) {
  cmd->add_option("-c,--config", c.config, "JSON config file");
  cmd->add_option("--seed", c.seed, "Override the master seed");
  if (with_data) cmd->add_option("-d,--data", c.data, "Override the data CSV");
  cmd->add_option("-o,--out", c.out, "Output directory");
  cmd->add_option("-j,--threads", c.threads, "Worker threads (0 = hardware)");
}

epf::PipelineConfig resolve_config(const Common& c) {
  epf::PipelineConfig cfg = c.config.empty() ? epf::PipelineConfig{} : epf::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.data.empty()) cfg.data_path = c.data;
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.threads) cfg.threads = c.threads;
  cfg.validate();
  return cfg;
}

epf::TimeSeries load_data(const epf::PipelineConfig& cfg) {
  if (cfg.data_path.empty()) throw epf::ConfigError("data.path: no input series given (use --data)");
  return epf::load_series(cfg.data_path);
}

// "all" uses the whole series; "train"/"test" use the configured split.
epf::TimeSeries select_part(const epf::TimeSeries& series, const epf::PipelineConfig& cfg, const std::string& part) {
  if (part == "all") return series;
  auto [train, test] = epf::split(series, cfg.n_train, cfg.n_test);
  return part == "train" ? train : test;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw epf::DataError("cannot write '" + path.string() + "'");
  out << text;
}

int run_decompose(const Common& c, const std::string& part) {
  const auto cfg = resolve_config(c);
  const auto series = select_part(load_data(cfg), cfg, part);
  fs::create_directories(cfg.output_dir);
  const auto d = epf::ceemdan_decompose(series.values, epf::ceemdan_for_run(cfg));
  const fs::path path = cfg.output_dir / "imfs.csv";
  epf::write_decomposition(path, d);
  std::printf("%zu IMFs -> %s\n", d.imfs.size(), path.c_str());
  return kOk;
}

int run_denoise(const Common& c, const std::string& part) {
  const auto cfg = resolve_config(c);
  const auto series = select_part(load_data(cfg), cfg, part);
  fs::create_directories(cfg.output_dir);
  const auto result = epf::denoise_series(series, epf::ceemdan_for_run(cfg), cfg.pe, cfg.pe_threshold);
  epf::write_series(cfg.output_dir / "denoised.csv", result.series);
  epf::write_report(cfg.output_dir / "denoise_report.json", result.report);
  std::printf("%zu IMFs, first clean IMF %zu -> %s\n", result.report.imf_count, result.report.first_clean,
              cfg.output_dir.c_str());
  return kOk;
}

std::string model_file(epf::nn::CellKind kind, std::size_t horizon) {
  return std::string("model_") + epf::nn::to_string(kind) + "_h" + std::to_string(horizon) + ".json";
}

int run_train(const Common& c) {
  const auto cfg = resolve_config(c);
  const auto series = load_data(cfg);
  fs::create_directories(cfg.output_dir);

  const auto data = epf::prepare_data(series, cfg);
  epf::write_report(cfg.output_dir / "denoise_report.json", data.train_denoised.report);
  const auto sae = epf::pretrain_sae(data, cfg);
  for (auto kind : cfg.cells) {
    for (auto h : cfg.horizons) {
      const auto model = epf::train_model(data, sae, kind, h, cfg);
      const fs::path path = cfg.output_dir / model_file(kind, h);
      epf::nn::save_model(path, model);
      std::printf("%s h=%zu: %zu epochs, best %zu -> %s\n", epf::model_label(kind).c_str(), h,
                  model.history.train_loss.size(), model.history.best_epoch, path.c_str());
    }
  }
  return kOk;
}

// One forecast per complete trailing span of the input file.
int run_predict(const Common& c, const std::string& model_path, const std::string& input, bool raw) {
  const auto cfg = resolve_config(c);
  const auto model = epf::nn::load_model(model_path);
  auto series = epf::load_series(input);
  const std::size_t span = model.input_span();
  if (series.size() < span) {
    throw epf::DataError("input has " + std::to_string(series.size()) + " values; the model needs " +
                         std::to_string(span));
  }
  if (!raw) series = epf::denoise_series(series, epf::ceemdan_for_run(cfg), cfg.pe, cfg.pe_threshold).series;

  std::string out = "target,forecast\n";
  for (std::size_t end = span; end <= series.size(); ++end) {
    const std::span<const double> recent(series.values.data() + end - span, span);
    std::span<const double> exo;
    if (series.has_exogenous()) exo = {series.exogenous.data() + end - span, span};
    const double value = epf::nn::forecast(model, recent, exo);
    const std::size_t target = end - 1 + model.horizon;
    const auto t = series.time_at(target);
    char buf[64];
    std::snprintf(buf, sizeof buf, ",%.6f\n", value);
    out += (t ? epf::format_timestamp(*t) : std::to_string(target)) + buf;
  }
  if (c.out.empty()) {
    std::cout << out;
  } else {
    fs::create_directories(c.out);
    write_text(fs::path(c.out) / "forecast.csv", out);
  }
  return kOk;
}

int run_benchmark(const Common& c) {
  const auto cfg = resolve_config(c);
  const auto series = load_data(cfg);
  const auto result = epf::run_benchmark(series, cfg);
  epf::write_benchmark(result, cfg.output_dir);
  std::cout << epf::table_to_text(result.table);
  if (!result.table.all_ok()) {
    spdlog::error("some benchmark cells failed; see table.csv");
    return kNumericError;
  }
  return kOk;
}

int run_synth(const epf::SyntheticSpec& spec, const std::string& out) {
  const auto series = epf::generate_synthetic(spec);
  if (out.empty()) throw epf::ConfigError("--out: output file required");
  const fs::path path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  epf::write_series(path, series);
  std::printf("%zu samples -> %s\n", series.size(), out.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("epf"));
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");

  CLI::App app{"Electricity price forecasting: CEEMDAN denoising, SAE features, GRU/LSTM predictors"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  Common common;
  std::string part = "all";

  auto* decompose = app.add_subcommand("decompose", "CEEMDAN decomposition to imfs.csv");
  add_common(decompose, common);
  decompose->add_option("--part", part, "Series part to use")->check(CLI::IsMember({"all", "train", "test"}));

  auto* denoise = app.add_subcommand("denoise", "Denoise a series; writes denoised.csv and denoise_report.json");
  add_common(denoise, common);
  denoise->add_option("--part", part, "Series part to use")->check(CLI::IsMember({"all", "train", "test"}));

  auto* train = app.add_subcommand("train", "Train one model per cell kind and horizon");
  add_common(train, common);

  std::string model_path;
  std::string input;
  bool raw = false;
  auto* predict = app.add_subcommand("predict", "Rolling forecasts over a window file");
  add_common(predict, common, false);
  predict->add_option("-m,--model", model_path, "Saved model")->required();
  predict->add_option("-i,--input", input, "CSV with at least window + sequence_length - 1 values")->required();
  predict->add_flag("--raw", raw, "Input is already denoised");

  auto* bench = app.add_subcommand("benchmark", "Full train/test benchmark; writes table and trace files");
  add_common(bench, common);

  epf::SyntheticSpec spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write the seeded synthetic hourly price series");
  synth->add_option("-n,--length", spec.length, "Number of samples");
  synth->add_option("--seed", spec.seed, "Generator seed");
  synth->add_option("--ar-coefficient", spec.ar_coefficient, "Persistence of the AR(1) component");
  synth->add_option("--ar-sigma", spec.ar_sigma, "Innovation scale of the AR(1) component");
  synth->add_option("--noise-sigma", spec.noise_sigma, "White measurement noise scale");
  synth->add_option("-o,--out", synth_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);

  try {
    if (*decompose) return run_decompose(common, part);
    if (*denoise) return run_denoise(common, part);
    if (*train) return run_train(common);
    if (*predict) return run_predict(common, model_path, input, raw);
    if (*bench) return run_benchmark(common);
    if (*synth) return run_synth(spec, synth_out);
  } catch (const epf::ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return kConfigError;
  } catch (const epf::NumericError& e) {
    spdlog::error("numeric: {}", e.what());
    return kNumericError;
  } catch (const epf::DataError& e) {
    spdlog::error("data: {}", e.what());
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("data: {}", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kDataError;
  }
  return kOk;
}
