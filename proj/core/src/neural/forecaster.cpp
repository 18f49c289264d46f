#include "epf/neural/forecaster.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "epf/error.hpp"
#include "shuffle.hpp"

namespace epf::nn {
namespace {

using json = nlohmann::ordered_json;

double mse_over(const PredictorWeights& w, const SequenceDataset& data, std::size_t from, std::size_t to) {
  double sum = 0.0;
  for (std::size_t j = from; j < to; ++j) {
    const double e = predict(w, data.sequence(j)) - data.target(j);
    sum += e * e;
  }
  return sum / static_cast<double>(to - from);
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) throw DataError("matrix has wrong row count");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError("matrix has wrong column count");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index size) {
  const auto values = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != size) throw DataError("vector has wrong length");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), size);
}

json layer_to_json(const DenseLayer& l) {
  return json{{"activation", to_string(l.activation)},
              {"in", l.in_dim()},
              {"out", l.out_dim()},
              {"weights", matrix_to_json(l.weights)},
              {"bias", vector_to_json(l.bias)}};
}

DenseLayer layer_from_json(const json& j) {
  const auto in = j.at("in").get<Eigen::Index>();
  const auto out = j.at("out").get<Eigen::Index>();
  return DenseLayer{matrix_from_json(j.at("weights"), out, in), vector_from_json(j.at("bias"), out),
                    activation_from_string(j.at("activation").get<std::string>())};
}

json scaler_to_json(const Scaler& s) { return json{{"min", s.min()}, {"max", s.max()}}; }
Scaler scaler_from_json(const json& j) { return Scaler(j.at("min").get<double>(), j.at("max").get<double>()); }

}  // namespace

SequenceDataset encode_sequences(const SaeStack& sae, const WindowedDataset& windows, std::size_t seq_len) {
  if (seq_len < 1) throw DataError("sequence length must be >= 1");
  const Eigen::MatrixXd codes = sae.encode(to_columns(windows.inputs, sae.input_dim()));
  SequenceDataset ds;
  ds.seq_len = seq_len;
  ds.targets = windows.targets;
  ds.codes.reserve(static_cast<std::size_t>(codes.cols()));
  for (Eigen::Index c = 0; c < codes.cols(); ++c) ds.codes.emplace_back(codes.col(c));
  return ds;
}

double predict(const PredictorWeights& w, std::span<const Eigen::VectorXd> sequence) {
  const RecurrentTrace tr = recurrent_forward(w.cell, sequence, Eigen::VectorXd::Zero(w.cell.hidden_dim()));
  return w.head.weights.row(0).dot(tr.final_hidden()) + w.head.bias(0);
}

double accumulate_sample_grad(const PredictorWeights& w, std::span<const Eigen::VectorXd> sequence, double target,
                              double scale, RecurrentGrad& cell_grad, DenseGrad& head_grad) {
  const Eigen::Index H = w.cell.hidden_dim();
  const RecurrentTrace tr = recurrent_forward(w.cell, sequence, Eigen::VectorXd::Zero(H));
  const Eigen::VectorXd& h = tr.final_hidden();
  const double error = w.head.weights.row(0).dot(h) + w.head.bias(0) - target;
  const double dy = scale * 2.0 * error;

  head_grad.weights.row(0) += dy * h.transpose();
  head_grad.bias(0) += dy;

  std::vector<Eigen::VectorXd> d_hidden(sequence.size(), Eigen::VectorXd::Zero(H));
  d_hidden.back() = dy * w.head.weights.row(0).transpose();
  recurrent_backward(w.cell, tr, d_hidden, cell_grad);
  return error * error;
}

TrainedPredictor train_forecaster(const SequenceDataset& data, CellKind kind, std::size_t hidden_dim,
                                  const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t n = data.size();
  if (n == 0) throw DataError("forecaster training set is empty");
  if (hidden_dim < 1) throw ConfigError("model.hidden_dim: must be >= 1");
  const auto input_dim = data.codes.front().size();

  std::size_t n_val = 0;
  if (cfg.patience > 0 && cfg.validation_fraction > 0.0) {
    n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * cfg.validation_fraction));
    if (n_val >= n) n_val = 0;
  }
  const std::size_t n_train = n - n_val;

  Rng init_rng(cfg.seed);
  TrainedPredictor result;
  PredictorWeights& w = result.weights;
  w.cell = RecurrentCellParams::glorot(kind, input_dim, static_cast<Eigen::Index>(hidden_dim), init_rng);
  w.head = DenseLayer::glorot(static_cast<Eigen::Index>(hidden_dim), 1, Activation::Identity, init_rng);

  Adam adam(cfg.adam);
  AdamSlot<Eigen::MatrixXd> s_wi(w.cell.w_input), s_wh(w.cell.w_hidden), s_hw(w.head.weights);
  AdamSlot<Eigen::VectorXd> s_b(w.cell.bias), s_hb(w.head.bias);

  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(detail::shuffle_seed(cfg.seed));

  PredictorWeights best = w;
  double best_metric = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    detail::shuffle(order, shuffle_rng);
    for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
      const std::size_t stop = std::min(n_train, start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      RecurrentGrad g_cell(w.cell);
      DenseGrad g_head(w.head);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t j = order[b];
        accumulate_sample_grad(w, data.sequence(j), data.target(j), scale, g_cell, g_head);
      }
      adam.tick();
      adam.update(w.cell.w_input, g_cell.w_input, s_wi);
      adam.update(w.cell.w_hidden, g_cell.w_hidden, s_wh);
      adam.update(w.cell.bias, g_cell.bias, s_b);
      adam.update(w.head.weights, g_head.weights, s_hw);
      adam.update(w.head.bias, g_head.bias, s_hb);
    }

    const double train_loss = mse_over(w, data, 0, n_train);
    if (!std::isfinite(train_loss)) {
      throw NumericError(std::string(to_string(kind)) + " training diverged at epoch " + std::to_string(epoch) +
                         " (loss " + std::to_string(train_loss) + "); lower the learning rate");
    }
    result.history.train_loss.push_back(train_loss);
    double metric = train_loss;
    if (n_val > 0) {
      metric = mse_over(w, data, n_train, n);
      result.history.validation_loss.push_back(metric);
    }
    if (metric < best_metric) {
      best_metric = metric;
      best = w;
      result.history.best_epoch = epoch;
      stale = 0;
    } else if (n_val > 0 && ++stale >= cfg.patience) {
      break;
    }
  }
  if (result.history.best_epoch > 0) w = std::move(best);
  return result;
}

double forecast(const ForecastModel& model, std::span<const double> recent, std::span<const double> recent_exogenous) {
  if (recent.size() != model.input_span()) {
    throw DataError("forecast needs exactly " + std::to_string(model.input_span()) + " recent values, got " +
                    std::to_string(recent.size()));
  }
  if (model.exogenous_scaler.has_value() != !recent_exogenous.empty()) {
    throw DataError(model.exogenous_scaler ? "model expects an exogenous window" : "model has no exogenous channel");
  }
  if (model.exogenous_scaler && recent_exogenous.size() != recent.size()) {
    throw DataError("exogenous window length must match the price window");
  }

  const std::vector<double> prices = model.scaler.transform(recent);
  std::vector<double> exo;
  if (model.exogenous_scaler) exo = model.exogenous_scaler->transform(recent_exogenous);

  const auto L = static_cast<Eigen::Index>(model.window);
  const auto in_dim = static_cast<Eigen::Index>(model.sae.input_dim());
  Eigen::MatrixXd windows(in_dim, static_cast<Eigen::Index>(model.seq_len));
  for (std::size_t s = 0; s < model.seq_len; ++s) {
    const auto col = static_cast<Eigen::Index>(s);
    windows.col(col).head(L) = Eigen::Map<const Eigen::VectorXd>(prices.data() + s, L);
    if (model.exogenous_scaler) windows.col(col).tail(L) = Eigen::Map<const Eigen::VectorXd>(exo.data() + s, L);
  }
  const Eigen::MatrixXd codes = model.sae.encode(windows);
  std::vector<Eigen::VectorXd> sequence;
  for (Eigen::Index c = 0; c < codes.cols(); ++c) sequence.emplace_back(codes.col(c));
  return model.scaler.inverse(predict(model.predictor, sequence));
}

std::string model_to_json(const ForecastModel& m) {
  json j;
  j["format"] = "epf-forecast-model";
  j["version"] = kModelFormatVersion;
  j["config_hash"] = m.config_hash;
  j["window"] = m.window;
  j["horizon"] = m.horizon;
  j["sequence_length"] = m.seq_len;
  j["scaler"] = scaler_to_json(m.scaler);
  j["exogenous_scaler"] = m.exogenous_scaler ? scaler_to_json(*m.exogenous_scaler) : json(nullptr);

  json encoders = json::array();
  for (const auto& e : m.sae.encoders) encoders.push_back(layer_to_json(e));
  j["sae"] = json{{"dims", m.sae.dims}, {"encoders", std::move(encoders)}};

  const auto& c = m.predictor.cell;
  j["cell"] = json{{"kind", to_string(c.kind)},
                   {"input_dim", c.input_dim()},
                   {"hidden_dim", c.hidden_dim()},
                   {"w_input", matrix_to_json(c.w_input)},
                   {"w_hidden", matrix_to_json(c.w_hidden)},
                   {"bias", vector_to_json(c.bias)}};
  j["head"] = layer_to_json(m.predictor.head);
  j["history"] = json{{"train_loss", m.history.train_loss},
                      {"validation_loss", m.history.validation_loss},
                      {"best_epoch", m.history.best_epoch}};
  return j.dump(1) + "\n";
}

ForecastModel model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "epf-forecast-model") throw DataError("not an epf forecast model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError("model format version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kModelFormatVersion) + ")");
    }
    ForecastModel m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.window = j.at("window").get<std::size_t>();
    m.horizon = j.at("horizon").get<std::size_t>();
    m.seq_len = j.at("sequence_length").get<std::size_t>();
    m.scaler = scaler_from_json(j.at("scaler"));
    if (!j.at("exogenous_scaler").is_null()) m.exogenous_scaler = scaler_from_json(j.at("exogenous_scaler"));

    m.sae.dims = j.at("sae").at("dims").get<std::vector<std::size_t>>();
    for (const auto& e : j.at("sae").at("encoders")) m.sae.encoders.push_back(layer_from_json(e));
    if (m.sae.dims.size() != m.sae.encoders.size() + 1) throw DataError("SAE dims do not match encoder count");
    for (std::size_t k = 0; k < m.sae.encoders.size(); ++k) {
      const auto& e = m.sae.encoders[k];
      if (static_cast<std::size_t>(e.in_dim()) != m.sae.dims[k] || static_cast<std::size_t>(e.out_dim()) != m.sae.dims[k + 1]) {
        throw DataError("SAE encoder " + std::to_string(k + 1) + " does not match its dims");
      }
    }

    const auto& c = j.at("cell");
    const CellKind kind = cell_kind_from_string(c.at("kind").get<std::string>());
    const auto in = c.at("input_dim").get<Eigen::Index>();
    const auto hidden = c.at("hidden_dim").get<Eigen::Index>();
    const Eigen::Index rows = RecurrentCellParams::gates(kind) * hidden;
    m.predictor.cell = RecurrentCellParams{kind, matrix_from_json(c.at("w_input"), rows, in),
                                           matrix_from_json(c.at("w_hidden"), rows, hidden),
                                           vector_from_json(c.at("bias"), rows)};
    m.predictor.head = layer_from_json(j.at("head"));

    const auto& h = j.at("history");
    m.history.train_loss = h.at("train_loss").get<std::vector<double>>();
    m.history.validation_loss = h.at("validation_loss").get<std::vector<double>>();
    m.history.best_epoch = h.at("best_epoch").get<std::size_t>();

    const std::size_t width = m.exogenous_scaler ? 2 * m.window : m.window;
    if (m.sae.dims.front() != width) throw DataError("SAE input dim does not match the window");
    if (static_cast<Eigen::Index>(m.sae.code_dim()) != in) throw DataError("cell input dim does not match SAE codes");
    if (m.predictor.head.in_dim() != hidden || m.predictor.head.out_dim() != 1) {
      throw DataError("output head does not match the cell");
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ForecastModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << model_to_json(model);
}

ForecastModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

}  // namespace epf::nn
