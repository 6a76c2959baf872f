#include "penlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "penlab/bench.hpp"
#include "penlab/csv.hpp"
#include "penlab/rng.hpp"
#include "penlab/solvers.hpp"

namespace penlab {
namespace {

bool parse_cell(const std::string& text, double* value) {
  const char* begin = text.c_str();
  char* end = nullptr;
  *value = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

bool cell_is_blank(const std::string& text) {
  return text.find_first_not_of(" \t\r") == std::string::npos;
}

std::vector<int> shuffled_rows(Eigen::Index n, RngStream& rng) {
  std::vector<int> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
  }
  return rows;
}

}  // namespace

TabularDataset load_csv(const std::string& path, const std::string& response_name) {
  std::ifstream in(path);
  if (!in) throw IoFailure("load_csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseFailure("load_csv: empty file", 0, 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  TabularDataset data;
  data.column_names = split_csv_line(line);
  const std::size_t n_cols = data.column_names.size();
  if (n_cols < 2) throw ParseFailure("load_csv: need a response and at least one covariate", 1, 0);

  for (std::size_t c = 0; c < n_cols; ++c) {
    if (data.column_names[c] == response_name) data.response_col = static_cast<int>(c);
  }
  if (data.response_col < 0) {
    throw MissingResponse("load_csv: no column named '" + response_name + "'");
  }

  std::vector<double> cells;
  long line_no = 1;
  Eigen::Index n_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != n_cols) {
      throw ParseFailure("load_csv: expected " + std::to_string(n_cols) + " fields, got " +
                             std::to_string(fields.size()),
                         line_no, 0);
    }
    bool has_gap = false;
    std::vector<double> row(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (cell_is_blank(fields[c])) {
        has_gap = true;
        break;
      }
      if (!parse_cell(fields[c], &row[c])) {
        throw ParseFailure("load_csv: non-numeric cell '" + fields[c] + "'", line_no,
                           static_cast<long>(c + 1));
      }
    }
    if (has_gap) {
      ++data.rows_dropped;
      continue;
    }
    cells.insert(cells.end(), row.begin(), row.end());
    ++n_rows;
  }
  if (n_rows < 1) throw ParseFailure("load_csv: no complete data rows", line_no, 0);

  data.values.resize(n_rows, static_cast<Eigen::Index>(n_cols));
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      data.values(i, static_cast<Eigen::Index>(c)) =
          cells[static_cast<std::size_t>(i) * n_cols + c];
    }
  }
  return data;
}

BoxCoxResult boxcox_transform(const Eigen::VectorXd& column, double shift) {
  const Eigen::Index n = column.size();
  if (n < 2) throw DimensionMismatch("boxcox_transform: need n >= 2");
  const Eigen::VectorXd shifted = column.array() + shift;
  if (shifted.minCoeff() <= 0.0) {
    throw NonPositiveAfterShift("boxcox_transform: column has non-positive values after shift");
  }

  const Eigen::VectorXd logs = shifted.array().log();
  const double log_sum = logs.sum();

  const auto transform_at = [&](double lambda) -> Eigen::VectorXd {
    if (std::abs(lambda) < 1e-12) return logs;
    return ((shifted.array().pow(lambda) - 1.0) / lambda).matrix();
  };
  const auto profile_loglik = [&](double lambda) {
    const Eigen::VectorXd z = transform_at(lambda);
    const double mean = z.mean();
    const double variance = (z.array() - mean).square().sum() / static_cast<double>(n);
    return -0.5 * static_cast<double>(n) * std::log(std::max(variance, 1e-300)) +
           (lambda - 1.0) * log_sum;
  };

  double best_lambda = -2.0;
  double best_loglik = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 400; ++i) {
    const double lambda = -2.0 + 0.01 * i;
    const double loglik = profile_loglik(lambda);
    if (loglik > best_loglik) {
      best_loglik = loglik;
      best_lambda = lambda;
    }
  }

  BoxCoxResult out;
  out.lambda_hat = std::abs(best_lambda) < 1e-12 ? 0.0 : best_lambda;
  out.transformed = transform_at(out.lambda_hat);
  return out;
}

TrimResult mahalanobis_trim(const TabularDataset& data, double fraction) {
  if (fraction < 0.0 || fraction >= 1.0) {
    throw InvalidArgument("mahalanobis_trim: fraction must lie in [0, 1)");
  }
  const Eigen::Index n = data.values.rows();
  const Eigen::Index m = data.values.cols();
  const auto remove_count = static_cast<Eigen::Index>(
      std::floor(fraction * static_cast<double>(n)));

  TrimResult out;
  if (remove_count == 0) {
    out.data = data;
    return out;
  }

  const Eigen::RowVectorXd means = data.values.colwise().mean();
  const Eigen::MatrixXd centered = data.values.rowwise() - means;
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-8 * cov.trace() / static_cast<double>(m);
    llt.compute(cov);
    if (llt.info() != Eigen::Success) {
      throw SingularCovariance("mahalanobis_trim: covariance not invertible after ridging");
    }
  }

  std::vector<std::pair<double, int>> depth(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd row = centered.row(i).transpose();
    const double d2 = row.dot(llt.solve(row));
    depth[static_cast<std::size_t>(i)] = {1.0 / (1.0 + d2), static_cast<int>(i)};
  }
  std::sort(depth.begin(), depth.end());

  std::vector<char> removed(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < remove_count; ++i) {
    const int row = depth[static_cast<std::size_t>(i)].second;
    removed[static_cast<std::size_t>(row)] = 1;
    out.removed_rows.push_back(row);
  }
  std::sort(out.removed_rows.begin(), out.removed_rows.end());

  out.data.column_names = data.column_names;
  out.data.response_col = data.response_col;
  out.data.rows_dropped = data.rows_dropped;
  out.data.values.resize(n - remove_count, m);
  Eigen::Index target = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!removed[static_cast<std::size_t>(i)]) out.data.values.row(target++) = data.values.row(i);
  }
  return out;
}

std::string pipeline_config_to_json(const PipelineConfig& config) {
  nlohmann::json doc;
  doc["boxcox_shift"] = config.boxcox_shift;
  doc["trim_fraction"] = config.trim_fraction;
  doc["train_fraction"] = config.train_fraction;
  doc["repetitions"] = config.repetitions;
  doc["mode"] = to_string(config.mode);
  std::vector<std::string> methods;
  for (Method m : config.methods) methods.push_back(method_id(m));
  doc["methods"] = methods;
  doc["base_seed"] = config.base_seed;
  doc["apply_boxcox"] = config.apply_boxcox;
  doc["apply_trim"] = config.apply_trim;
  doc["rss0_train_mean"] = config.rss0_train_mean;
  doc["selection_per_split"] = config.selection_per_split;
  return doc.dump(2);
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  PipelineConfig config;
  config.boxcox_shift = doc.value("boxcox_shift", 0.01);
  config.trim_fraction = doc.value("trim_fraction", 0.05);
  config.train_fraction = doc.value("train_fraction", 0.8);
  config.repetitions = doc.value("repetitions", 100);
  const std::string mode = doc.value("mode", std::string("univ"));
  if (mode == "raw") {
    config.mode = StandardizationMode::kRaw;
  } else if (mode == "univ") {
    config.mode = StandardizationMode::kUnivariate;
  } else {
    throw InvalidArgument("pipeline config: unknown mode '" + mode + "'");
  }
  if (doc.contains("methods")) {
    for (const auto& id : doc.at("methods")) {
      const auto method = parse_method(id.get<std::string>());
      if (!method) throw InvalidArgument("pipeline config: unknown method " + id.dump());
      config.methods.push_back(*method);
    }
  }
  config.base_seed = doc.value("base_seed", std::uint64_t{1});
  config.apply_boxcox = doc.value("apply_boxcox", true);
  config.apply_trim = doc.value("apply_trim", true);
  config.rss0_train_mean = doc.value("rss0_train_mean", false);
  config.selection_per_split = doc.value("selection_per_split", false);
  return config;
}

TabularDataset preprocess(const TabularDataset& data, const PipelineConfig& config,
                          Provenance* provenance) {
  TabularDataset out = data;
  Provenance prov;
  prov.boxcox_lambdas.assign(data.column_names.size(),
                             std::numeric_limits<double>::quiet_NaN());

  if (config.apply_boxcox) {
    for (Eigen::Index c = 0; c < out.values.cols(); ++c) {
      const BoxCoxResult result = boxcox_transform(out.values.col(c), config.boxcox_shift);
      out.values.col(c) = result.transformed;
      prov.boxcox_lambdas[static_cast<std::size_t>(c)] = result.lambda_hat;
    }
  }
  if (config.apply_trim && config.trim_fraction > 0.0) {
    TrimResult trimmed = mahalanobis_trim(out, config.trim_fraction);
    out = std::move(trimmed.data);
    prov.removed_rows = std::move(trimmed.removed_rows);
  }
  if (provenance != nullptr) *provenance = std::move(prov);
  return out;
}

std::string provenance_to_json(const Provenance& provenance,
                               const std::vector<std::string>& column_names) {
  nlohmann::json doc;
  nlohmann::json lambdas = nlohmann::json::object();
  for (std::size_t c = 0; c < column_names.size() && c < provenance.boxcox_lambdas.size(); ++c) {
    if (std::isnan(provenance.boxcox_lambdas[c])) {
      lambdas[column_names[c]] = nullptr;
    } else {
      lambdas[column_names[c]] = provenance.boxcox_lambdas[c];
    }
  }
  doc["boxcox_lambda"] = lambdas;
  doc["removed_rows"] = provenance.removed_rows;
  return doc.dump(2);
}

std::vector<EvaluationRow> real_data_evaluate(const TabularDataset& data,
                                              const PipelineConfig& config) {
  if (config.methods.empty()) throw InvalidArgument("real_data_evaluate: no methods configured");
  if (config.repetitions < 1) throw InvalidArgument("real_data_evaluate: repetitions must be >= 1");
  if (!(config.train_fraction > 0.0) || config.train_fraction >= 1.0) {
    throw InvalidArgument("real_data_evaluate: train_fraction must lie in (0, 1)");
  }

  const Eigen::Index n = data.values.rows();
  const Eigen::Index p = data.values.cols() - 1;
  Eigen::MatrixXd x_raw(n, p);
  Eigen::VectorXd y_raw(n);
  {
    Eigen::Index target = 0;
    for (Eigen::Index c = 0; c < data.values.cols(); ++c) {
      if (static_cast<int>(c) == data.response_col) continue;
      x_raw.col(target++) = data.values.col(c);
    }
    y_raw = data.values.col(data.response_col);
  }

  const auto train_n = static_cast<Eigen::Index>(
      std::floor(config.train_fraction * static_cast<double>(n)));
  if (train_n < 2 || train_n >= n) {
    throw InvalidArgument("real_data_evaluate: degenerate train/test split");
  }

  const StandardizedData full = center_and_standardize(x_raw, y_raw, config.mode);
  const StandardizedData full_raw = center_and_standardize(x_raw, y_raw,
                                                           StandardizationMode::kRaw);

  std::vector<EvaluationRow> rows;
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    const Method method = config.methods[mi];
    EvaluationRow row;
    row.method = method;

    const RngStream select_rng =
        RngStream(config.base_seed, 0).split(500 + static_cast<std::uint64_t>(mi));
    const FitResult full_fit =
        tune_and_refit(method, full, full_raw.x, select_rng, config.tune);
    row.support = full_fit.support;
    const Eigen::VectorXd magnitude = full_fit.beta.cwiseAbs();

    double sum_mse = 0.0;
    double sum_dev = 0.0;
    for (int rep = 0; rep < config.repetitions; ++rep) {
      try {
        RngStream rep_rng(config.base_seed, 1000 + static_cast<std::uint64_t>(rep));
        const std::vector<int> order = shuffled_rows(n, rep_rng);

        Eigen::MatrixXd x_train(train_n, p);
        Eigen::VectorXd y_train(train_n);
        Eigen::MatrixXd x_test(n - train_n, p);
        Eigen::VectorXd y_test(n - train_n);
        for (Eigen::Index i = 0; i < train_n; ++i) {
          x_train.row(i) = x_raw.row(order[static_cast<std::size_t>(i)]);
          y_train[i] = y_raw[order[static_cast<std::size_t>(i)]];
        }
        for (Eigen::Index i = train_n; i < n; ++i) {
          x_test.row(i - train_n) = x_raw.row(order[static_cast<std::size_t>(i)]);
          y_test[i - train_n] = y_raw[order[static_cast<std::size_t>(i)]];
        }

        std::vector<int> support = row.support;
        Eigen::VectorXd support_magnitude = magnitude;
        if (config.selection_per_split) {
          const StandardizedData train_std =
              center_and_standardize(x_train, y_train, config.mode);
          const StandardizedData train_raw =
              center_and_standardize(x_train, y_train, StandardizationMode::kRaw);
          const FitResult split_fit =
              tune_and_refit(method, train_std, train_raw.x,
                             rep_rng.split(900 + static_cast<std::uint64_t>(mi)), config.tune);
          support = split_fit.support;
          support_magnitude = split_fit.beta.cwiseAbs();
        }

        const Eigen::RowVectorXd x_means = x_train.colwise().mean();
        const double y_mean = y_train.mean();
        const Eigen::MatrixXd x_train_c = x_train.rowwise() - x_means;
        const Eigen::VectorXd y_train_c = (y_train.array() - y_mean).matrix();

        const Eigen::VectorXd coef =
            ols_refit(x_train_c, y_train_c, support, &support_magnitude);
        const Eigen::VectorXd predictions =
            ((x_test.rowwise() - x_means) * coef).array() + y_mean;

        const double rss = (y_test - predictions).squaredNorm();
        const double center = config.rss0_train_mean ? y_mean : y_test.mean();
        const double rss0 = (y_test.array() - center).square().sum();
        sum_mse += rss / static_cast<double>(y_test.size());
        sum_dev += rss0 > 0.0 ? (rss0 - rss) / rss0 : 0.0;
        ++row.repetitions;
      } catch (const Error&) {
        ++row.failures;
      }
    }
    if (row.repetitions > 0) {
      row.mean_mse = sum_mse / row.repetitions;
      row.mean_pct_dev = sum_dev / row.repetitions;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string evaluation_to_csv(const std::vector<EvaluationRow>& rows,
                              const std::vector<std::string>& covariate_names) {
  std::ostringstream out;
  out << "method,mean_mse,mean_pct_dev,support_size,repetitions,failures,support\n";
  for (const auto& row : rows) {
    std::string support_text;
    for (std::size_t i = 0; i < row.support.size(); ++i) {
      if (i > 0) support_text += ";";
      const auto j = static_cast<std::size_t>(row.support[i]);
      support_text += j < covariate_names.size() ? covariate_names[j]
                                                 : std::to_string(row.support[i]);
    }
    out << method_id(row.method) << ',' << format_double(row.mean_mse) << ','
        << format_double(row.mean_pct_dev) << ',' << row.support.size() << ','
        << row.repetitions << ',' << row.failures << ',' << csv_escape(support_text) << '\n';
  }
  return out.str();
}

}  // namespace penlab
