#include "eqlab/lab/emit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#ifndef EQLAB_VERSION_STAMP
#define EQLAB_VERSION_STAMP "unknown"
#endif

namespace eqlab::lab {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string opt(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) return num(*v);
  else return std::to_string(*v);
}

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::optional<Format> format_from_string(const std::string& name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  if (name == "both") return Format::Both;
  return std::nullopt;
}

std::string version_stamp() { return EQLAB_VERSION_STAMP; }

void check_row(const ResultRow& row) {
  if (row.count && *row.count < 0) throw PreconditionError("result row has a negative count");
  if (row.volume && row.entropy) {
    const double expected = std::log(*row.volume);
    if (!(std::abs(*row.entropy - expected) <= 1e-12 * std::max(1.0, std::abs(expected))))
      throw PreconditionError("result row entropy differs from log(volume)");
  }
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw PreconditionError("emit: no result rows");
  std::string out = "scenario,economy_id,point,count,sup_H,volume,entropy,gauss_dispersion,flags\n";
  for (const ResultRow& row : rows) {
    check_row(row);
    std::string point;
    for (std::size_t i = 0; i < row.point.size(); ++i) point += (i ? ";" : "") + num(row.point[i]);
    std::string flags;
    for (std::size_t i = 0; i < row.flags.size(); ++i) flags += (i ? "|" : "") + row.flags[i];
    out += row.scenario + ',' + row.economy_id + ',' + point + ',' + opt(row.count) + ',' + opt(row.sup_h) + ',' +
           opt(row.volume) + ',' + opt(row.entropy) + ',' + opt(row.gauss_dispersion) + ',' + flags + '\n';
  }
  return out;
}

json to_json(const std::vector<ResultRow>& rows, const json& summary, const json& config) {
  if (rows.empty()) throw PreconditionError("emit: no result rows");
  json list = json::array();
  for (const ResultRow& row : rows) {
    check_row(row);
    list.push_back({{"scenario", row.scenario},
                    {"economy_id", row.economy_id},
                    {"point", row.point},
                    {"count", opt_json(row.count)},
                    {"sup_H", opt_json(row.sup_h)},
                    {"volume", opt_json(row.volume)},
                    {"entropy", opt_json(row.entropy)},
                    {"gauss_dispersion", opt_json(row.gauss_dispersion)},
                    {"flags", row.flags}});
  }
  return {{"version", version_stamp()}, {"config", config}, {"summary", summary}, {"rows", list}};
}

std::vector<ResultRow> rows_from_json(const json& doc) {
  std::vector<ResultRow> rows;
  for (const json& r : doc.at("rows")) {
    ResultRow row;
    row.scenario = r.at("scenario").get<std::string>();
    row.economy_id = r.at("economy_id").get<std::string>();
    row.point = r.at("point").get<std::vector<double>>();
    row.count = opt_from<long long>(r, "count");
    row.sup_h = opt_from<double>(r, "sup_H");
    row.volume = opt_from<double>(r, "volume");
    row.entropy = opt_from<double>(r, "entropy");
    row.gauss_dispersion = opt_from<double>(r, "gauss_dispersion");
    row.flags = r.at("flags").get<std::vector<std::string>>();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string plot_data(const std::vector<ResultRow>& rows) {
  std::optional<double> x;
  for (const ResultRow& row : rows)
    if (row.sup_h && std::find(row.flags.begin(), row.flags.end(), "aggregate") != row.flags.end()) x = row.sup_h;
  std::string out = "# sup_H equilibrium_count\n";
  if (!x) return out;
  for (const ResultRow& row : rows)
    if (row.count && !row.sup_h) out += num(*x) + ' ' + std::to_string(*row.count) + '\n';
  return out;
}

std::vector<std::string> write_outputs(const std::string& dir, const RunResult& result, const ExperimentConfig& cfg,
                                       Format format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
  const std::string stem = to_string(cfg.scenario);
  std::vector<std::string> written;
  if (format == Format::Csv || format == Format::Both) {
    const fs::path p = fs::path(dir) / (stem + ".csv");
    write_file(p, to_csv(result.rows));
    written.push_back(p.string());
  }
  if (format == Format::Json || format == Format::Both) {
    const fs::path p = fs::path(dir) / (stem + ".json");
    write_file(p, to_json(result.rows, result.summary, cfg.source).dump(2) + "\n");
    written.push_back(p.string());
  }
  if (cfg.scenario == Scenario::ConjectureSweep) {
    const fs::path p = fs::path(dir) / (stem + ".dat");
    write_file(p, plot_data(result.rows));
    written.push_back(p.string());
  }
  return written;
}

}  // namespace eqlab::lab
