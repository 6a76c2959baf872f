#include "penlab/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include "penlab/csv.hpp"

namespace penlab {
namespace {

std::string selected_bits(const std::vector<std::uint8_t>& selected) {
  std::string bits(selected.size(), '0');
  for (std::size_t j = 0; j < selected.size(); ++j) {
    if (selected[j]) bits[j] = '1';
  }
  return bits;
}

StandardizationMode parse_mode_or_throw(const std::string& id) {
  if (id == "raw") return StandardizationMode::kRaw;
  if (id == "univ") return StandardizationMode::kUnivariate;
  throw ParseFailure("unknown standardization mode '" + id + "'", 0, 0);
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[64];
  if (value == std::floor(value) && std::abs(value) < 1e15) {
    std::snprintf(buffer, sizeof buffer, "%.0f", value);
    return buffer;
  }
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof buffer, "%.*g", precision, value);
    if (std::strtod(buffer, nullptr) == value) break;
  }
  return buffer;
}

MetricsRecord compute_metrics(const FitResult& fit, const SimulatedDataset& data) {
  if (!fit.refit_beta.has_value()) {
    throw InvalidArgument("compute_metrics: fit carries no refit coefficients");
  }
  const Eigen::Index n = data.x.rows();
  const Eigen::Index p = data.x.cols();

  MetricsRecord record;
  record.selected.assign(static_cast<std::size_t>(p), 0);
  for (int j : fit.support) record.selected[static_cast<std::size_t>(j)] = 1;
  record.support_size = static_cast<int>(fit.support.size());

  std::vector<std::uint8_t> truth(static_cast<std::size_t>(p), 0);
  for (int j : data.truth.support) truth[static_cast<std::size_t>(j)] = 1;
  for (int j : fit.support) {
    if (truth[static_cast<std::size_t>(j)]) ++record.tp;
    else ++record.fp;
  }

  const Eigen::VectorXd predictions = data.x * (*fit.refit_beta);
  const double rss = (data.y - predictions).squaredNorm();
  const double rss0 = data.y.squaredNorm();  // response is centered
  record.mse = rss / static_cast<double>(n);
  record.pct_dev = rss0 > 0.0 ? (rss0 - rss) / rss0 : 0.0;
  return record;
}

std::vector<MetricsRecord> run_monte_carlo(const RunConfig& config) {
  if (config.replicates < 1) throw InvalidArgument("run_monte_carlo: need replicates >= 1");
  if (config.methods.empty() || config.modes.empty()) {
    throw InvalidArgument("run_monte_carlo: need at least one method and one mode");
  }
  const std::size_t n_methods = config.methods.size();
  const std::size_t n_modes = config.modes.size();
  const std::size_t per_replicate = n_methods * n_modes;
  std::vector<MetricsRecord> records(static_cast<std::size_t>(config.replicates) * per_replicate);

  const auto run_replicate = [&](int replicate) {
    const RngStream data_rng(config.base_seed, static_cast<std::uint64_t>(replicate));
    const SimulatedDataset data = generate(config.spec, data_rng);

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      for (std::size_t oi = 0; oi < n_modes; ++oi) {
        const std::size_t slot =
            static_cast<std::size_t>(replicate) * per_replicate + mi * n_modes + oi;
        MetricsRecord& record = records[slot];
        record.scenario = config.spec.name;
        record.n = config.spec.n;
        record.rho = scenario_uses_rho(config.spec.name) ? config.spec.rho : 0.0;
        record.method = config.methods[mi];
        record.mode = config.modes[oi];
        record.replicate = replicate;
        try {
          StandardizedData std_data;
          std_data.mode = config.modes[oi];
          std_data.y = data.y;
          if (config.modes[oi] == StandardizationMode::kUnivariate) {
            const StandardizedData rescaled =
                center_and_standardize(data.x, data.y, StandardizationMode::kUnivariate);
            std_data.x = rescaled.x;
            std_data.scales = rescaled.scales;
          } else {
            std_data.x = data.x;
            std_data.scales = Eigen::VectorXd::Ones(data.x.cols());
          }
          const RngStream method_rng =
              data_rng.split(1000 + 16 * static_cast<std::uint64_t>(mi) + oi);
          const FitResult fit = tune_and_refit(config.methods[mi], std_data, data.x, method_rng,
                                               config.tune);
          MetricsRecord metrics = compute_metrics(fit, data);
          metrics.scenario = record.scenario;
          metrics.n = record.n;
          metrics.rho = record.rho;
          metrics.method = record.method;
          metrics.mode = record.mode;
          metrics.replicate = record.replicate;
          record = std::move(metrics);
        } catch (const std::exception& e) {
          record.failed = true;
          record.failure = e.what();
          record.mse = std::numeric_limits<double>::quiet_NaN();
          record.pct_dev = std::numeric_limits<double>::quiet_NaN();
          record.selected.assign(static_cast<std::size_t>(data.x.cols()), 0);
        }
      }
    }
  };

  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    for (int r = 0; r < config.replicates; ++r) run_replicate(r);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (int r = t; r < config.replicates; r += threads) run_replicate(r);
      });
    }
    for (auto& worker : pool) worker.join();
  }
  return records;
}

std::vector<AggregateRow> aggregate(const std::vector<MetricsRecord>& records, double sigma_eps) {
  if (records.empty()) return {};
  const double oracle_mse = sigma_eps * sigma_eps;

  // group keys in first-seen order after sorting by replicate for exact
  // order-independence of the floating-point sums
  std::vector<const MetricsRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    if (a->method != b->method) return a->method < b->method;
    if (a->mode != b->mode) return a->mode < b->mode;
    return a->replicate < b->replicate;
  });

  std::vector<AggregateRow> rows;
  for (const MetricsRecord* record : sorted) {
    if (rows.empty() || rows.back().method != record->method ||
        rows.back().mode != record->mode) {
      AggregateRow row;
      row.method = record->method;
      row.mode = record->mode;
      row.selection_frequency = Eigen::VectorXd::Zero(
          static_cast<Eigen::Index>(record->selected.size()));
      rows.push_back(std::move(row));
    }
    AggregateRow& row = rows.back();
    if (record->failed) {
      ++row.failures;
      continue;
    }
    ++row.replicates;
    row.mean_tp += record->tp;
    row.mean_fp += record->fp;
    row.mean_support += record->support_size;
    row.mean_mse += record->mse;
    row.mean_pct_dev += record->pct_dev;
    for (std::size_t j = 0; j < record->selected.size(); ++j) {
      row.selection_frequency[static_cast<Eigen::Index>(j)] += record->selected[j];
    }
  }

  for (AggregateRow& row : rows) {
    if (row.replicates > 0) {
      const double m = static_cast<double>(row.replicates);
      row.mean_tp /= m;
      row.mean_fp /= m;
      row.mean_support /= m;
      row.mean_mse /= m;
      row.mean_pct_dev /= m;
      row.selection_frequency /= m;
    }
    row.gi = row.mean_mse >= 0.9 * oracle_mse && row.mean_mse <= 1.1 * oracle_mse;
    row.over = row.mean_mse >= oracle_mse;
  }
  return rows;
}

std::string records_to_csv(const std::vector<MetricsRecord>& records) {
  std::ostringstream out;
  out << "scenario,n,rho,method,mode,replicate,tp,fp,support_size,mse,pct_dev,failed,failure,"
         "selected\n";
  for (const auto& r : records) {
    out << scenario_id(r.scenario) << ',' << r.n << ',' << format_double(r.rho) << ','
        << method_id(r.method) << ',' << to_string(r.mode) << ',' << r.replicate << ',' << r.tp
        << ',' << r.fp << ',' << r.support_size << ',' << format_double(r.mse) << ','
        << format_double(r.pct_dev) << ',' << (r.failed ? 1 : 0) << ',' << csv_escape(r.failure)
        << ',' << selected_bits(r.selected) << '\n';
  }
  return out.str();
}

std::vector<MetricsRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<MetricsRecord> records;
  bool header = true;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 14) throw ParseFailure("records csv: wrong field count", line_no, 0);
    MetricsRecord record;
    const auto scenario = parse_scenario(fields[0]);
    const auto method = parse_method(fields[3]);
    if (!scenario) throw ParseFailure("unknown scenario '" + fields[0] + "'", line_no, 1);
    if (!method) throw ParseFailure("unknown method '" + fields[3] + "'", line_no, 4);
    record.scenario = *scenario;
    record.n = std::stoi(fields[1]);
    record.rho = std::strtod(fields[2].c_str(), nullptr);
    record.method = *method;
    record.mode = parse_mode_or_throw(fields[4]);
    record.replicate = std::stoi(fields[5]);
    record.tp = std::stoi(fields[6]);
    record.fp = std::stoi(fields[7]);
    record.support_size = std::stoi(fields[8]);
    record.mse = std::strtod(fields[9].c_str(), nullptr);
    record.pct_dev = std::strtod(fields[10].c_str(), nullptr);
    record.failed = fields[11] == "1";
    record.failure = fields[12];
    record.selected.resize(fields[13].size());
    for (std::size_t j = 0; j < fields[13].size(); ++j) {
      record.selected[j] = fields[13][j] == '1';
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::string aggregate_to_csv(const std::vector<AggregateRow>& rows, const ScenarioSpec& spec,
                             double sigma_eps) {
  std::ostringstream out;
  out << "scenario,n,rho,method,mode,tp,fp,mse,pct_dev,gi,over,mean_support,failures,"
         "oracle_mse\n";
  const double oracle = sigma_eps * sigma_eps;
  for (const auto& row : rows) {
    out << scenario_id(spec.name) << ',' << spec.n << ','
        << format_double(scenario_uses_rho(spec.name) ? spec.rho : 0.0) << ','
        << method_id(row.method) << ',' << to_string(row.mode) << ','
        << format_double(row.mean_tp) << ',' << format_double(row.mean_fp) << ','
        << format_double(row.mean_mse) << ',' << format_double(row.mean_pct_dev) << ','
        << (row.gi ? 1 : 0) << ',' << (row.over ? 1 : 0) << ',' << format_double(row.mean_support)
        << ',' << row.failures << ',' << format_double(oracle) << '\n';
  }
  return out.str();
}

std::vector<AggregateRow> aggregate_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<AggregateRow> rows;
  bool header = true;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 14) throw ParseFailure("aggregate csv: wrong field count", line_no, 0);
    AggregateRow row;
    const auto method = parse_method(fields[3]);
    if (!method) throw ParseFailure("unknown method '" + fields[3] + "'", line_no, 4);
    row.method = *method;
    row.mode = parse_mode_or_throw(fields[4]);
    row.mean_tp = std::strtod(fields[5].c_str(), nullptr);
    row.mean_fp = std::strtod(fields[6].c_str(), nullptr);
    row.mean_mse = std::strtod(fields[7].c_str(), nullptr);
    row.mean_pct_dev = std::strtod(fields[8].c_str(), nullptr);
    row.gi = fields[9] == "1";
    row.over = fields[10] == "1";
    row.mean_support = std::strtod(fields[11].c_str(), nullptr);
    row.failures = std::stoi(fields[12]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string aggregate_to_markdown(const std::vector<AggregateRow>& rows,
                                  const ScenarioSpec& spec, double sigma_eps) {
  const double oracle = sigma_eps * sigma_eps;
  char oracle_text[64];
  std::snprintf(oracle_text, sizeof oracle_text, "%.3f", oracle);

  std::ostringstream out;
  out << "## " << scenario_id(spec.name) << " (n=" << spec.n;
  if (scenario_uses_rho(spec.name)) out << ", rho=" << format_double(spec.rho);
  out << ")\n\n";
  out << "| METHOD | MODE | MSE (" << oracle_text << ") | %Dev (0.9) | TP | FP |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& row : rows) {
    char mse_text[64];
    char dev_text[64];
    char tp_text[64];
    char fp_text[64];
    std::snprintf(mse_text, sizeof mse_text, "%.3f", row.mean_mse);
    std::snprintf(dev_text, sizeof dev_text, "%.3f", row.mean_pct_dev);
    std::snprintf(tp_text, sizeof tp_text, "%.2f", row.mean_tp);
    std::snprintf(fp_text, sizeof fp_text, "%.2f", row.mean_fp);
    std::string cell = mse_text;
    if (row.over) cell = "[" + cell + "]";
    if (row.gi) cell = "**" + cell + "**";
    out << "| " << method_id(row.method) << " | " << to_string(row.mode) << " | " << cell
        << " | " << dev_text << " | " << tp_text << " | " << fp_text << " |\n";
  }
  return out.str();
}

}  // namespace penlab
