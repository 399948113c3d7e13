#include "lgcn/io.hpp"

#include <fstream>

#include "lgcn/common.hpp"

namespace lgcn {
namespace {

using json = nlohmann::json;

template <typename T>
json matrix_to_json(const Matrix<T>& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) data[i] = static_cast<double>(m.data()[i]);
  j["data"] = data;
  return j;
}

template <typename T>
Matrix<T> matrix_from_json(const json& j) {
  const auto data = j.at("data").get<std::vector<double>>();
  std::vector<T> cast(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) cast[i] = static_cast<T>(data[i]);
  return Matrix<T>::from(j.at("rows").get<std::size_t>(),
                         j.at("cols").get<std::size_t>(), std::move(cast));
}

template <typename T>
const char* precision_tag();
template <>
const char* precision_tag<float>() {
  return "f32";
}
template <>
const char* precision_tag<double>() {
  return "f64";
}

}  // namespace

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw Error("csv row width does not match header in " + path.string());
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size())
        throw ValidationError("csv row width mismatch in " + path.string());
      table.rows.push_back(std::move(fields));
    }
  }
  if (first) throw ValidationError("csv file is empty: " + path.string());
  return table;
}

json ledger_to_json(const CostLedger& ledger) {
  json j;
  j["fa_calls"] = ledger.fa_calls;
  j["ft_calls"] = ledger.ft_calls;
  j["flops"] = ledger.flops;
  j["peak_activation_bytes"] = ledger.peak_activation_bytes;
  j["peak_graph_bytes"] = ledger.peak_graph_bytes;
  return j;
}

json eval_to_json(const EvalReport& report) {
  json j;
  j["micro_f1"] = report.micro_f1;
  j["macro_f1"] = report.macro_f1;
  j["loss"] = report.loss;
  j["split"] = split_name(report.split);
  return j;
}

template <typename T>
void save_model(const LayerwiseModel<T>& model, LossKind loss_kind,
                const std::filesystem::path& path) {
  json j;
  j["format"] = "lgcn-model";
  j["version"] = 1;
  j["precision"] = precision_tag<T>();
  j["loss_kind"] = loss_kind == LossKind::softmax ? "softmax" : "bce";
  j["hidden_dims"] = model.hidden_dims();
  json layers = json::array();
  for (const auto& w : model.layer_weights) layers.push_back(matrix_to_json(w));
  j["layers"] = std::move(layers);
  j["classifier"] = matrix_to_json(model.classifier);
  write_json(j, path);
}

template <typename T>
LayerwiseModel<T> load_model(const std::filesystem::path& path) {
  const json j = read_json(path);
  if (!j.contains("format") || j.at("format") != "lgcn-model")
    throw ValidationError("model file " + path.string() + ": unknown format");
  if (j.at("precision").get<std::string>() != precision_tag<T>())
    throw ValidationError("model file " + path.string() + ": precision mismatch");
  LayerwiseModel<T> m;
  for (const json& layer : j.at("layers")) m.layer_weights.push_back(matrix_from_json<T>(layer));
  m.classifier = matrix_from_json<T>(j.at("classifier"));
  return m;
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("malformed json in " + path.string() + ": " + e.what());
  }
}

template void save_model<float>(const LayerwiseModel<float>&, LossKind,
                                const std::filesystem::path&);
template void save_model<double>(const LayerwiseModel<double>&, LossKind,
                                 const std::filesystem::path&);
template LayerwiseModel<float> load_model<float>(const std::filesystem::path&);
template LayerwiseModel<double> load_model<double>(const std::filesystem::path&);

}  // namespace lgcn
