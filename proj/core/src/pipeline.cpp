#include "epf/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "epf/error.hpp"
#include "parallel.hpp"

namespace epf {
namespace {

using json = nlohmann::ordered_json;

// Walks one JSON object, remembering which keys were consumed so that
// typos surface as errors instead of silently falling back to defaults.
class FieldReader {
 public:
  FieldReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError(where() + "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    const auto it = object_.find(key);
    if (it == object_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void read(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) {
        throw ConfigError(field(key) + ": expected a non-negative integer");
      }
      out = v->get<std::size_t>();
    }
  }
  void read(const std::string& key, std::uint64_t& out, int) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) {
        throw ConfigError(field(key) + ": expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }
  void read(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
      out = v->get<int>();
    }
  }
  void read(const std::string& key, unsigned& out) {
    std::size_t tmp = out;
    read(key, tmp);
    out = static_cast<unsigned>(tmp);
  }
  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(field(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  void read(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(field(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  void read(const std::string& key, std::vector<std::size_t>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(field(key) + ": expected an array of integers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const auto& e = (*v)[i];
        if (!e.is_number_integer() || e.get<long long>() < 0) {
          throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected a non-negative integer");
        }
        out.push_back(e.get<std::size_t>());
      }
    }
  }

  std::optional<FieldReader> child(const std::string& key) {
    if (const json* v = find(key)) return FieldReader(*v, field(key));
    return std::nullopt;
  }

  void finish() const {
    for (const auto& [key, value] : object_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown setting");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config: " : path_ + ": "; }

  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_train(FieldReader& r, nn::TrainConfig& t) {
  r.read("epochs", t.epochs);
  r.read("batch_size", t.batch_size);
  r.read("learning_rate", t.adam.learning_rate);
  r.read("beta1", t.adam.beta1);
  r.read("beta2", t.adam.beta2);
  r.read("epsilon", t.adam.epsilon);
  r.read("patience", t.patience);
  r.read("validation_fraction", t.validation_fraction);
  r.finish();
}

json train_to_json(const nn::TrainConfig& t) {
  return json{{"epochs", t.epochs},
              {"batch_size", t.batch_size},
              {"learning_rate", t.adam.learning_rate},
              {"beta1", t.adam.beta1},
              {"beta2", t.adam.beta2},
              {"epsilon", t.adam.epsilon},
              {"patience", t.patience},
              {"validation_fraction", t.validation_fraction}};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kCeemdanSeedTag = 1;
constexpr std::uint64_t kSaeSeedTag = 2;

std::uint64_t model_seed_tag(nn::CellKind kind, std::size_t horizon) {
  return 1000 + (kind == nn::CellKind::Gru ? 0 : 100000) + horizon;
}

TimeSeries scaled_copy(const TimeSeries& s, const Scaler& scaler, const std::optional<Scaler>& exo) {
  TimeSeries out = s;
  out.values = scaler.transform(s.values);
  if (exo && s.has_exogenous()) out.exogenous = exo->transform(s.exogenous);
  return out;
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  if (n_train < 2) throw ConfigError("data.n_train: must be >= 2");
  if (window < 1) throw ConfigError("window: must be >= 1");
  if (horizons.empty()) throw ConfigError("horizons: must not be empty");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1) throw ConfigError("horizons[" + std::to_string(i) + "]: must be >= 1");
  }
  if (seq_len < 1) throw ConfigError("sequence_length: must be >= 1");
  ceemdan.validate();
  pe.validate();
  if (!(pe_threshold > 0.0 && pe_threshold <= 1.0)) throw ConfigError("pe.threshold: must be in (0, 1]");
  if (!sae_dims.empty()) {
    if (sae_dims.size() != 4) throw ConfigError("sae.dims: expected 4 entries (input + three hidden)");
    for (std::size_t i = 0; i < sae_dims.size(); ++i) {
      if (sae_dims[i] < 1) throw ConfigError("sae.dims[" + std::to_string(i) + "]: must be >= 1");
    }
  }
  sae_train.validate("sae");
  if (cells.empty()) throw ConfigError("model.cells: must not be empty");
  if (hidden_dim < 1) throw ConfigError("model.hidden_dim: must be >= 1");
  train.validate("train");
  if (std::find(horizons.begin(), horizons.end(), trace_horizon) == horizons.end()) {
    throw ConfigError("trace.horizon: must be one of the configured horizons");
  }
}

std::vector<std::size_t> PipelineConfig::resolved_sae_dims(bool exogenous) const {
  const std::size_t width = exogenous ? 2 * window : window;
  if (sae_dims.empty()) return {width, 16, 12, 8};
  if (sae_dims.front() != width) {
    throw ConfigError("sae.dims[0]: must equal the input width " + std::to_string(width));
  }
  return sae_dims;
}

std::string PipelineConfig::hash() const {
  json j = json::parse(config_to_json(*this));
  j.erase("data");
  j.erase("output_dir");
  j.erase("threads");
  j["ceemdan"].erase("threads");
  j["data_split"] = {n_train, n_test};
  const std::string canonical = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }

  PipelineConfig c;
  FieldReader r(root, "");

  if (auto d = r.child("data")) {
    std::string path;
    d->read("path", path);
    if (!path.empty()) {
      std::filesystem::path p(path);
      c.data_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    d->read("n_train", c.n_train);
    d->read("n_test", c.n_test);
    d->finish();
  }
  r.read("window", c.window);
  r.read("horizons", c.horizons);
  r.read("sequence_length", c.seq_len);

  if (auto ce = r.child("ceemdan")) {
    ce->read("ensemble_size", c.ceemdan.ensemble_size);
    ce->read("noise_scale", c.ceemdan.noise_scale);
    ce->read("max_imfs", c.ceemdan.max_imfs);
    ce->read("threads", c.ceemdan.threads);
    if (auto s = ce->child("sift")) {
      s->read("sd_threshold", c.ceemdan.sift.sd_threshold);
      s->read("max_iterations", c.ceemdan.sift.max_iterations);
      s->read("mean_envelope_tolerance", c.ceemdan.sift.mean_envelope_tolerance);
      s->read("boundary_extrema", c.ceemdan.sift.boundary_extrema);
      s->finish();
    }
    ce->finish();
  }
  if (auto pe = r.child("pe")) {
    pe->read("order", c.pe.order);
    pe->read("delay", c.pe.delay);
    pe->read("threshold", c.pe_threshold);
    pe->finish();
  }
  if (auto sae = r.child("sae")) {
    sae->read("dims", c.sae_dims);
    sae->read("epochs", c.sae_train.epochs);
    sae->read("batch_size", c.sae_train.batch_size);
    sae->read("learning_rate", c.sae_train.adam.learning_rate);
    sae->finish();
  }
  if (auto m = r.child("model")) {
    if (const json* cells = m->find("cells")) {
      if (!cells->is_array()) throw ConfigError("model.cells: expected an array of \"gru\"/\"lstm\"");
      c.cells.clear();
      for (std::size_t i = 0; i < cells->size(); ++i) {
        const auto& e = (*cells)[i];
        if (!e.is_string()) throw ConfigError("model.cells[" + std::to_string(i) + "]: expected a string");
        try {
          c.cells.push_back(nn::cell_kind_from_string(e.get<std::string>()));
        } catch (const ConfigError& err) {
          throw ConfigError("model.cells[" + std::to_string(i) + "]: " + err.what());
        }
      }
    }
    m->read("hidden_dim", c.hidden_dim);
    m->finish();
  }
  if (auto t = r.child("train")) read_train(*t, c.train);
  if (auto tr = r.child("trace")) {
    tr->read("horizon", c.trace_horizon);
    tr->read("offset", c.trace_offset);
    tr->read("length", c.trace_length);
    tr->finish();
  }
  std::string out_dir;
  r.read("output_dir", out_dir);
  if (!out_dir.empty()) {
    std::filesystem::path p(out_dir);
    c.output_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  r.read("seed", c.seed, 0);
  r.read("threads", c.threads);
  r.finish();

  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["data"] = {{"path", c.data_path.string()}, {"n_train", c.n_train}, {"n_test", c.n_test}};
  j["window"] = c.window;
  j["horizons"] = c.horizons;
  j["sequence_length"] = c.seq_len;
  j["ceemdan"] = {{"ensemble_size", c.ceemdan.ensemble_size},
                  {"noise_scale", c.ceemdan.noise_scale},
                  {"max_imfs", c.ceemdan.max_imfs},
                  {"threads", c.ceemdan.threads},
                  {"sift",
                   {{"sd_threshold", c.ceemdan.sift.sd_threshold},
                    {"max_iterations", c.ceemdan.sift.max_iterations},
                    {"mean_envelope_tolerance", c.ceemdan.sift.mean_envelope_tolerance},
                    {"boundary_extrema", c.ceemdan.sift.boundary_extrema}}}};
  j["pe"] = {{"order", c.pe.order}, {"delay", c.pe.delay}, {"threshold", c.pe_threshold}};
  j["sae"] = {{"dims", c.sae_dims},
              {"epochs", c.sae_train.epochs},
              {"batch_size", c.sae_train.batch_size},
              {"learning_rate", c.sae_train.adam.learning_rate}};
  json cells = json::array();
  for (auto k : c.cells) cells.push_back(nn::to_string(k));
  j["model"] = {{"cells", cells}, {"hidden_dim", c.hidden_dim}};
  j["train"] = train_to_json(c.train);
  j["trace"] = {{"horizon", c.trace_horizon}, {"offset", c.trace_offset}, {"length", c.trace_length}};
  j["output_dir"] = c.output_dir.string();
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j.dump(2) + "\n";
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) { return splitmix64(master ^ splitmix64(tag)); }

CeemdanConfig ceemdan_for_run(const PipelineConfig& config) {
  CeemdanConfig ce = config.ceemdan;
  ce.rng_seed = derive_seed(config.seed, kCeemdanSeedTag);
  if (ce.threads == 0) ce.threads = config.threads;
  return ce;
}

std::string model_label(nn::CellKind kind) { return kind == nn::CellKind::Gru ? "ANR-SAE-GRU" : "ANR-SAE-LSTM"; }

PreparedData prepare_data(const TimeSeries& series, const PipelineConfig& config) {
  validate(series);
  PreparedData d;
  std::tie(d.train_raw, d.test_raw) = split(series, config.n_train, config.n_test);
  d.scaler = Scaler::fit(d.train_raw.values);
  if (d.train_raw.has_exogenous()) d.exogenous_scaler = Scaler::fit(d.train_raw.exogenous);

  const CeemdanConfig ce = ceemdan_for_run(config);
  d.train_denoised = denoise_series(d.train_raw, ce, config.pe, config.pe_threshold);
  if (config.n_test > 0) d.test_denoised = denoise_series(d.test_raw, ce, config.pe, config.pe_threshold);

  d.train_inputs = scaled_copy(d.train_denoised.series, d.scaler, d.exogenous_scaler);
  d.train_targets = scaled_copy(d.train_raw, d.scaler, d.exogenous_scaler);
  if (config.n_test > 0) {
    d.test_inputs = scaled_copy(d.test_denoised.series, d.scaler, d.exogenous_scaler);
    d.test_targets = scaled_copy(d.test_raw, d.scaler, d.exogenous_scaler);
  }
  return d;
}

WindowedDataset windows_with_targets(const TimeSeries& inputs, const TimeSeries& targets, std::size_t window,
                                     std::size_t horizon) {
  if (inputs.size() != targets.size()) throw DataError("input and target series differ in length");
  WindowedDataset ds = make_windows(inputs, window, horizon);
  for (std::size_t i = 0; i < ds.size(); ++i) ds.targets[i] = targets.values[i + window + horizon - 1];
  return ds;
}

nn::SaeStack pretrain_sae(const PreparedData& data, const PipelineConfig& config) {
  const auto dims = config.resolved_sae_dims(data.train_inputs.has_exogenous());
  const WindowedDataset windows = make_windows(data.train_inputs, config.window, 1);
  nn::TrainConfig cfg = config.sae_train;
  cfg.seed = derive_seed(config.seed, kSaeSeedTag);
  return nn::build_sae(nn::to_columns(windows.inputs, dims.front()), dims, cfg);
}

nn::ForecastModel train_model(const PreparedData& data, const nn::SaeStack& sae, nn::CellKind kind,
                              std::size_t horizon, const PipelineConfig& config) {
  const WindowedDataset windows = windows_with_targets(data.train_inputs, data.train_targets, config.window, horizon);
  const nn::SequenceDataset sequences = nn::encode_sequences(sae, windows, config.seq_len);
  if (sequences.size() == 0) throw DataError("training split too short for window, horizon and sequence length");

  nn::TrainConfig cfg = config.train;
  cfg.seed = derive_seed(config.seed, model_seed_tag(kind, horizon));
  nn::TrainedPredictor trained = nn::train_forecaster(sequences, kind, config.hidden_dim, cfg);

  nn::ForecastModel model;
  model.sae.dims = sae.dims;
  model.sae.encoders = sae.encoders;
  model.predictor = std::move(trained.weights);
  model.scaler = data.scaler;
  model.exogenous_scaler = data.exogenous_scaler;
  model.window = config.window;
  model.horizon = horizon;
  model.seq_len = config.seq_len;
  model.history = std::move(trained.history);
  model.config_hash = config.hash();
  return model;
}

TestPredictions predict_test(const nn::ForecastModel& model, const PreparedData& data) {
  const std::size_t needed = model.window + model.horizon + model.seq_len - 1;
  if (data.test_inputs.size() < needed) {
    throw DataError("test split has " + std::to_string(data.test_inputs.size()) + " samples; horizon " +
                    std::to_string(model.horizon) + " needs at least " + std::to_string(needed));
  }
  const WindowedDataset windows = windows_with_targets(data.test_inputs, data.test_targets, model.window, model.horizon);
  const nn::SequenceDataset sequences = nn::encode_sequences(model.sae, windows, model.seq_len);

  TestPredictions out;
  for (std::size_t j = 0; j < sequences.size(); ++j) {
    const std::size_t index = j + model.seq_len - 1 + model.window + model.horizon - 1;
    out.target_index.push_back(index);
    out.actual.push_back(data.test_raw.values[index]);
    out.predicted.push_back(model.scaler.inverse(nn::predict(model.predictor, sequences.sequence(j))));
  }
  return out;
}

BenchmarkResult run_benchmark(const TimeSeries& series, const PipelineConfig& config) {
  config.validate();
  if (config.n_test == 0) throw ConfigError("data.n_test: benchmark needs a test split");

  spdlog::info("denoising train ({}) and test ({}) splits", config.n_train, config.n_test);
  const PreparedData data = prepare_data(series, config);
  spdlog::info("train split: {} IMFs, {} noisy", data.train_denoised.report.imf_count,
               data.train_denoised.report.first_clean - 1);

  spdlog::info("pretraining SAE");
  const nn::SaeStack sae = pretrain_sae(data, config);

  const std::size_t n_h = config.horizons.size();
  const std::size_t jobs = config.cells.size() * n_h;
  std::vector<MetricReport> cells(jobs);
  std::vector<std::optional<TestPredictions>> traces(jobs);

  detail::parallel_for(jobs, config.threads, [&](std::size_t job) {
    const nn::CellKind kind = config.cells[job / n_h];
    const std::size_t horizon = config.horizons[job % n_h];
    const std::string label = model_label(kind);
    try {
      const nn::ForecastModel model = train_model(data, sae, kind, horizon, config);
      TestPredictions preds = predict_test(model, data);
      cells[job] = evaluate(label, horizon, preds.actual, preds.predicted);
      spdlog::info("{} h={}: rmse {:.4f} mae {:.4f} (best epoch {})", label, horizon, cells[job].rmse,
                   cells[job].mae, model.history.best_epoch);
      if (horizon == config.trace_horizon) traces[job] = std::move(preds);
    } catch (const std::exception& e) {
      spdlog::error("{} h={} failed: {}", label, horizon, e.what());
      cells[job].model = label;
      cells[job].horizon = horizon;
      cells[job].ok = false;
      cells[job].failure = e.what();
    }
  });

  BenchmarkResult result;
  result.train_report = data.train_denoised.report;
  for (auto k : config.cells) result.table.models.push_back(model_label(k));
  result.table.horizons = config.horizons;
  result.table.cells = std::move(cells);

  // Trace rows at the trace horizon, keyed by test index.
  std::map<std::size_t, TraceRow> rows;
  for (std::size_t job = 0; job < jobs; ++job) {
    if (!traces[job]) continue;
    const nn::CellKind kind = config.cells[job / n_h];
    const auto& p = *traces[job];
    for (std::size_t i = config.trace_offset; i < p.target_index.size() && i < config.trace_offset + config.trace_length;
         ++i) {
      const std::size_t idx = p.target_index[i];
      TraceRow& row = rows[idx];
      if (const auto t = data.test_raw.time_at(idx)) {
        row.timestamp = format_timestamp(*t);
      } else {
        row.timestamp = std::to_string(config.n_train + idx);
      }
      row.actual = p.actual[i];
      (kind == nn::CellKind::Gru ? row.gru : row.lstm) = p.predicted[i];
    }
  }
  for (auto& [idx, row] : rows) result.trace.push_back(std::move(row));
  return result;
}

std::string trace_to_csv(const std::vector<TraceRow>& rows) {
  std::ostringstream out;
  out << "timestamp,actual,predicted_gru,predicted_lstm\n";
  for (const auto& r : rows) {
    out << r.timestamp << ',' << fixed(r.actual) << ',' << (r.gru ? fixed(*r.gru) : "") << ','
        << (r.lstm ? fixed(*r.lstm) : "") << '\n';
  }
  return out.str();
}

void write_benchmark(const BenchmarkResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& content) {
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write '" + (dir / name).string() + "'");
    out << content;
  };
  write("table.csv", table_to_csv(result.table));
  write("table.txt", table_to_text(result.table));
  write("trace.csv", trace_to_csv(result.trace));
  write_report(dir / "denoise_report.json", result.train_report);
}

}  // namespace epf
