#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lgcn/ledger.hpp"
#include "lgcn/trainers.hpp"

namespace lgcn {

// Plain CSV (no quoting; fields never contain commas). Every table the CLI
// emits can be read back through read_csv.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const CsvTable& table, const std::filesystem::path& path);
CsvTable read_csv(const std::filesystem::path& path);

nlohmann::json ledger_to_json(const CostLedger& ledger);
nlohmann::json eval_to_json(const EvalReport& report);

template <typename T>
void save_model(const LayerwiseModel<T>& model, LossKind loss_kind,
                const std::filesystem::path& path);

template <typename T>
LayerwiseModel<T> load_model(const std::filesystem::path& path);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace lgcn
