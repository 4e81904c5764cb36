#include "nnq/report.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace nnq {

using json = nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> read_optional(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

std::optional<std::string> read_optional_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

std::string cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

// Quotes a CSV field when it holds a delimiter, quote or newline.
std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

json to_json(const EstimatorConfig& config) {
  json j;
  j["kernel"] = std::string(kernel_name(config.kernel));
  j["tau"] = config.tau;
  j["min_neighbors"] = config.min_neighbors;
  j["max_neighbor_frac"] = config.max_neighbor_frac;
  j["smoothing"] = std::string(smoothing_name(config.smoothing.mode));
  j["epsilon"] = config.smoothing.epsilon;
  j["train_subsample_frac"] = optional_number(config.train_subsample_frac);
  j["seed"] = config.seed;
  return j;
}

json to_json(const Prediction& p) {
  json j;
  j["estimate"] = optional_number(p.estimate);
  j["neighbor_count"] = p.neighbor_count;
  j["neighbor_ids"] = p.neighbor_ids;
  j["rejection"] =
      p.rejection ? json(std::string(rejection_name(*p.rejection))) : json(nullptr);
  return j;
}

Prediction prediction_from_json(const json& j) {
  Prediction p;
  p.estimate = read_optional(j, "estimate");
  p.neighbor_count = j.at("neighbor_count").get<std::size_t>();
  p.neighbor_ids = j.at("neighbor_ids").get<std::vector<std::string>>();
  if (auto r = read_optional_string(j, "rejection")) {
    p.rejection = parse_rejection(*r);
  }
  return p;
}

json to_json(const EvalReport& report) {
  json j;
  j["mse"] = optional_number(report.mse);
  j["spearman_rho"] = optional_number(report.spearman_rho);
  j["rho_p_value"] = optional_number(report.rho_p_value);
  j["coverage"] = report.coverage;
  j["n_total"] = report.n_total;
  j["n_scored"] = report.n_scored;
  if (report.source_task) j["source_task"] = *report.source_task;
  if (report.target_task) j["target_task"] = *report.target_task;
  json items = json::array();
  for (const auto& item : report.per_item) {
    json row = to_json(item.prediction);
    row["id"] = item.id;
    row["truth"] = item.truth;
    items.push_back(std::move(row));
  }
  j["per_item"] = std::move(items);
  return j;
}

EvalReport eval_report_from_json(const json& j) {
  EvalReport report;
  report.mse = read_optional(j, "mse");
  report.spearman_rho = read_optional(j, "spearman_rho");
  report.rho_p_value = read_optional(j, "rho_p_value");
  report.coverage = j.at("coverage").get<double>();
  report.n_total = j.at("n_total").get<std::size_t>();
  report.n_scored = j.at("n_scored").get<std::size_t>();
  report.source_task = read_optional_string(j, "source_task");
  report.target_task = read_optional_string(j, "target_task");
  for (const auto& row : j.at("per_item")) {
    report.per_item.push_back({row.at("id").get<std::string>(),
                               row.at("truth").get<double>(),
                               prediction_from_json(row)});
  }
  return report;
}

json to_json(const SweepResult& result) {
  json j;
  j["parameter"] = std::string(sweep_parameter_name(result.parameter));
  json points = json::array();
  for (const auto& p : result.points) {
    points.push_back({{"value", p.value},
                      {"spearman_rho", optional_number(p.spearman_rho)},
                      {"mse", optional_number(p.mse)},
                      {"coverage", p.coverage},
                      {"n_scored", p.n_scored}});
  }
  j["points"] = std::move(points);
  return j;
}

SweepResult sweep_result_from_json(const json& j) {
  SweepResult result;
  result.parameter = parse_sweep_parameter(j.at("parameter").get<std::string>());
  for (const auto& p : j.at("points")) {
    result.points.push_back({p.at("value").get<double>(),
                             read_optional(p, "spearman_rho"),
                             read_optional(p, "mse"),
                             p.at("coverage").get<double>(),
                             p.at("n_scored").get<std::size_t>()});
  }
  return result;
}

json to_json(const CurveResult& result) {
  json j;
  j["runs"] = result.runs;
  j["seed"] = result.seed;
  json points = json::array();
  for (const auto& p : result.points) {
    points.push_back({{"size", p.size},
                      {"runs_with_rho", p.runs_with_rho},
                      {"rho_mean", p.rho_mean},
                      {"rho_std", p.rho_std},
                      {"coverage_mean", p.coverage_mean},
                      {"coverage_std", p.coverage_std}});
  }
  j["points"] = std::move(points);
  return j;
}

CurveResult curve_result_from_json(const json& j) {
  CurveResult result;
  result.runs = j.at("runs").get<int>();
  result.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& p : j.at("points")) {
    CurvePoint point;
    point.size = p.at("size").get<std::size_t>();
    point.runs_with_rho = p.at("runs_with_rho").get<std::size_t>();
    point.rho_mean = p.at("rho_mean").get<double>();
    point.rho_std = p.at("rho_std").get<double>();
    point.coverage_mean = p.at("coverage_mean").get<double>();
    point.coverage_std = p.at("coverage_std").get<double>();
    result.points.push_back(point);
  }
  return result;
}

json to_json(const AnnotatorBaselines& b) {
  json j;
  j["best"] = {{"mse", b.best_mse}, {"spearman_rho", optional_number(b.best_rho)}};
  j["average"] = {{"mse", b.average_mse},
                  {"spearman_rho", optional_number(b.average_rho)}};
  json rows = json::array();
  for (const auto& a : b.per_annotator) {
    rows.push_back({{"annotator", a.annotator},
                    {"n_items", a.n_items},
                    {"mse", a.mse},
                    {"spearman_rho", optional_number(a.rho)}});
  }
  j["per_annotator"] = std::move(rows);
  return j;
}

json to_json(const SubsetComparison& c) {
  return {{"mean_sq_err_all", c.mean_sq_err_all},
          {"mean_sq_err_scored", c.mean_sq_err_scored},
          {"t_statistic", c.t_statistic},
          {"p_value", c.p_value},
          {"n_all", c.n_all},
          {"n_scored", c.n_scored}};
}

std::string to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "id,truth,estimate,neighbor_count,rejection\n";
  for (const auto& item : report.per_item) {
    const auto& p = item.prediction;
    out << quote(item.id) << ',' << format_double(item.truth) << ','
        << cell(p.estimate) << ',' << p.neighbor_count << ','
        << (p.rejection ? rejection_name(*p.rejection) : "") << '\n';
  }
  return out.str();
}

std::string to_csv(const SweepResult& result) {
  std::ostringstream out;
  out << sweep_parameter_name(result.parameter)
      << ",spearman_rho,mse,coverage,n_scored\n";
  for (const auto& p : result.points) {
    out << format_double(p.value) << ',' << cell(p.spearman_rho) << ','
        << cell(p.mse) << ',' << format_double(p.coverage) << ',' << p.n_scored
        << '\n';
  }
  return out.str();
}

std::string to_csv(const CurveResult& result) {
  std::ostringstream out;
  out << "size,runs,runs_with_rho,rho_mean,rho_std,coverage_mean,coverage_std\n";
  for (const auto& p : result.points) {
    out << p.size << ',' << result.runs << ',' << p.runs_with_rho << ','
        << format_double(p.rho_mean) << ',' << format_double(p.rho_std) << ','
        << format_double(p.coverage_mean) << ','
        << format_double(p.coverage_std) << '\n';
  }
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move report into place at " +
                             path.string() + ": " + ec.message());
  }
}

}  // namespace nnq
