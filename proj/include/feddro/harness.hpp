#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "feddro/algorithms.hpp"
#include "feddro/oracles.hpp"
#include "feddro/problems.hpp"
#include "feddro/schedule.hpp"

namespace feddro {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Dataset CSV contract: header "f0,...,f{d-1},label", one sample per row.
// ---------------------------------------------------------------------------

inline ClientDataset load_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_csv_dataset: cannot open " + path);

  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
  };

  std::string line;
  if (!std::getline(in, line)) throw ConfigError("load_csv_dataset: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split(line);
  if (header.size() < 2 || header.back() != "label")
    throw ConfigError("load_csv_dataset: " + path + ":1: last header column must be 'label'");
  const int d = static_cast<int>(header.size()) - 1;
  for (int i = 0; i < d; ++i)
    if (header[i] != "f" + std::to_string(i))
      throw ConfigError("load_csv_dataset: " + path + ":1: expected column 'f" +
                        std::to_string(i) + "', got '" + header[i] + "'");

  ClientDataset data;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (static_cast<int>(cells.size()) != d + 1)
      throw ConfigError("load_csv_dataset: " + path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(d + 1) + " cells, got " + std::to_string(cells.size()));
    Vec feat(d);
    try {
      std::size_t used = 0;
      for (int i = 0; i < d; ++i) {
        feat[i] = std::stod(cells[i], &used);
        if (used != cells[i].size()) throw std::invalid_argument(cells[i]);
      }
      std::size_t lu = 0;
      const double label = std::stod(cells[d], &lu);
      if (lu != cells[d].size()) throw std::invalid_argument(cells[d]);
      data.features.push_back(std::move(feat));
      data.labels.push_back(label);
    } catch (const std::exception&) {
      throw ConfigError("load_csv_dataset: " + path + ":" + std::to_string(lineno) +
                        ": non-numeric cell");
    }
  }
  if (data.empty()) throw ConfigError("load_csv_dataset: " + path + ": no data rows");
  return data;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_csv_dataset(const ClientDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_csv_dataset: cannot open " + path);
  const int d = static_cast<int>(data.features.front().size());
  for (int i = 0; i < d; ++i) out << "f" << i << ",";
  out << "label\n";
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (int i = 0; i < d; ++i) out << detail::fmt_double(data.features[r][i]) << ",";
    out << detail::fmt_double(data.labels[r]) << "\n";
  }
}

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

struct RunConfig {
  nlohmann::json raw;  // verbatim echo for meta.json

  nlohmann::json problem;
  std::string algorithm;

  std::string hyper_mode = "manual";  // "manual" | "theory"
  double eta = 0.0;
  double beta = 1.0;
  bool beta_given = false;
  int local_period = 1;
  int horizon = 1;
  int batch_h = 1;
  int batch_g = 1;
  int theory_batch = 1;  // |b| in theory mode

  std::uint64_t seed = 0;
  int cadence = 1;
  std::string out_dir;
  nlohmann::json x0;  // scalar, array, or null (zeros)
};

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig c;
  c.raw = j;
  try {
    if (!j.contains("problem") || !j["problem"].is_object())
      throw ConfigError("config: missing 'problem' table");
    c.problem = j["problem"];
    if (!c.problem.contains("kind")) throw ConfigError("config: problem.kind missing");

    c.algorithm = j.value("algorithm", "");
    static const std::vector<std::string> tags = {"fedavg-case1", "fedavg-case2",
                                                  "modified-fedavg", "feddro", "parallel-sgd"};
    if (std::find(tags.begin(), tags.end(), c.algorithm) == tags.end())
      throw ConfigError("config: unknown algorithm tag '" + c.algorithm + "'");

    if (!j.contains("hyper") || !j["hyper"].is_object())
      throw ConfigError("config: missing 'hyper' table");
    const auto& h = j["hyper"];
    c.hyper_mode = h.value("mode", "manual");
    if (c.hyper_mode != "manual" && c.hyper_mode != "theory")
      throw ConfigError("config: hyper.mode must be 'manual' or 'theory'");
    c.horizon = h.value("T", 0);
    if (c.horizon < 1) throw ConfigError("config: hyper.T must be >= 1");
    c.local_period = h.value("I", 1);
    if (c.local_period < 1) throw ConfigError("config: hyper.I must be >= 1");
    if (c.local_period > c.horizon) throw ConfigError("config: hyper.I exceeds hyper.T");
    if (c.hyper_mode == "manual") {
      if (!h.contains("eta")) throw ConfigError("config: hyper.eta required in manual mode");
      c.eta = h["eta"].get<double>();
      if (h.contains("beta")) {
        c.beta = h["beta"].get<double>();
        c.beta_given = true;
      }
      c.batch_h = h.value("batch_h", 1);
      c.batch_g = h.value("batch_g", 1);
    } else {
      c.theory_batch = h.value("b", 1);
      if (c.theory_batch < 1) throw ConfigError("config: hyper.b must be >= 1");
      c.batch_h = c.theory_batch;
      c.batch_g = c.theory_batch;
    }

    c.seed = j.value("seed", 0ULL);
    c.cadence = j.value("cadence", 1);
    if (c.cadence < 1) throw ConfigError("config: cadence must be >= 1");
    c.out_dir = j.value("out", "");
    if (j.contains("x0")) c.x0 = j["x0"];
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return parse_run_config(j);
}

// ---------------------------------------------------------------------------
// Problem factory
// ---------------------------------------------------------------------------

inline CompositionalProblem build_problem(const nlohmann::json& pj) {
  const std::string kind = pj.value("kind", "");
  if (kind == "counterexample") return build_counterexample();

  if (kind == "quadratic") {
    QuadraticSpec spec;
    spec.dim = pj.value("dim", spec.dim);
    spec.clients = pj.value("clients", spec.clients);
    spec.sigma_h = pj.value("sigma_h", spec.sigma_h);
    spec.sigma_g = pj.value("sigma_g", spec.sigma_g);
    spec.hetero = pj.value("hetero", spec.hetero);
    spec.compositional = pj.value("compositional", spec.compositional);
    spec.seed = pj.value("seed", 0ULL);
    return build_hetero_quadratic(spec);
  }

  if (kind == "kl_dro" || kind == "chi2_dro") {
    const int K = pj.value("clients", 2);
    const double lambda = pj.value("lambda", 1.0);
    const LossModel loss = make_loss(pj.value("loss", "logistic"));
    const double radius = pj.value("domain_radius", 1.0);

    ClientDataset data;
    if (pj.contains("dataset")) {
      data = load_csv_dataset(pj["dataset"].get<std::string>());
    } else if (pj.contains("generator")) {
      const auto& g = pj["generator"];
      data = generate_synthetic_logistic(g.value("n", 100), g.value("d", 4),
                                         g.value("imbalance", 0.25), g.value("seed", 0ULL));
    } else {
      throw ConfigError("config: problem needs 'dataset' or 'generator'");
    }

    PartitionScheme scheme;
    if (pj.contains("partition")) {
      const std::string s = pj["partition"].value("scheme", "uniform");
      if (s == "uniform") {
        scheme.kind = PartitionScheme::Kind::UniformShard;
      } else if (s == "label_skew") {
        scheme.kind = PartitionScheme::Kind::LabelSkew;
        scheme.alpha = pj["partition"].value("alpha", 1.0);
      } else {
        throw ConfigError("config: unknown partition scheme '" + s + "'");
      }
    }
    const auto shards = partition_dataset(data, K, scheme, pj.value("partition_seed", 0ULL));

    if (kind == "kl_dro") return build_kl_dro(shards, lambda, loss, radius);
    const std::string variant = pj.value("variant", "printed");
    if (variant == "printed") return build_chi2_dro(shards, lambda, loss, Chi2Variant::Printed, radius);
    if (variant == "oracle_consistent")
      return build_chi2_dro(shards, lambda, loss, Chi2Variant::OracleConsistent, radius);
    throw ConfigError("config: unknown chi2 variant '" + variant + "'");
  }

  throw ConfigError("config: unknown problem kind '" + kind + "'");
}

inline Vec resolve_x0(const nlohmann::json& x0, int dim) {
  if (x0.is_null()) return Vec(dim, 0.0);
  if (x0.is_number()) return Vec(dim, x0.get<double>());
  if (x0.is_array()) {
    Vec v = x0.get<std::vector<double>>();
    if (static_cast<int>(v.size()) != dim)
      throw ConfigError("config: x0 length does not match problem dimension");
    return v;
  }
  throw ConfigError("config: x0 must be a number or array");
}

// ---------------------------------------------------------------------------
// run_experiment
// ---------------------------------------------------------------------------

struct RunOutcome {
  FederatedRunResult result;
  nlohmann::json meta;
  double wallclock_sec = 0.0;
};

namespace detail {

inline nlohmann::json schedule_json(const TheorySchedule& s) {
  nlohmann::json j;
  j["eta"] = s.eta;
  j["beta"] = s.beta;
  j["beta_clamped"] = s.beta_clamped;
  j["T_th"] = s.T_th;
  j["I_max"] = s.I_max;
  j["L_bar_fg"] = s.constants.L_bar_fg;
  j["L_bar_fg_alt"] = s.constants.L_bar_fg_alt;
  j["c_beta"] = s.constants.c_beta;
  j["C_sigma_h"] = s.constants.C_sigma_h;
  j["C_sigma_g"] = s.constants.C_sigma_g;
  j["C_delta_h"] = s.constants.C_delta_h;
  j["C_delta_g"] = s.constants.C_delta_g;
  return j;
}

inline void write_trace_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("run: cannot open " + path);
  out << "t,round,grad_norm_sq,drift,embed_bias,comm_highdim_up,comm_lowdim_up,"
         "comm_highdim_down,comm_lowdim_down,samples_consumed\n";
  for (const TraceRow& r : trace) {
    out << r.t << "," << r.round << "," << fmt_double(r.grad_norm_sq) << ","
        << fmt_double(r.drift) << "," << fmt_double(r.embed_bias) << "," << r.comm.highdim_up
        << "," << r.comm.lowdim_up << "," << r.comm.highdim_down << "," << r.comm.lowdim_down
        << "," << r.comm.samples_consumed << "\n";
  }
}

// mean grad_norm_sq over recorded rows with t >= 1 (the initial row is excluded
// so the statistic matches a (1/T)-style average over iterates produced by the run)
inline double time_avg_grad_norm_sq(const RunTrace& trace) {
  double sum = 0.0;
  int count = 0;
  for (const TraceRow& r : trace)
    if (r.t >= 1) {
      sum += r.grad_norm_sq;
      ++count;
    }
  return count ? sum / count : 0.0;
}

}  // namespace detail

// Executes the configured algorithm.  When out_dir is nonempty, writes
// trace.csv and meta.json (byte-identical across reruns of the same config and
// seed); the wallclock measurement goes to a separate timing.json.
inline RunOutcome run_experiment(const RunConfig& config) {
  const CompositionalProblem problem = build_problem(config.problem);
  const int K = problem.num_clients();
  const Vec x0 = resolve_x0(config.x0, problem.dim_x);

  HyperParams hp;
  nlohmann::json schedule_report;
  if (config.hyper_mode == "theory") {
    const TheorySchedule s = derive_theory_schedule(problem.constants, config.theory_batch, K,
                                                    config.horizon, config.local_period);
    hp = HyperParams::constant(s.eta, s.beta, config.local_period, config.horizon,
                               {config.batch_h, config.batch_g}, K);
    schedule_report = detail::schedule_json(s);
  } else {
    double beta = config.beta;
    if (!config.beta_given && config.algorithm == "feddro")
      beta = derive_beta(problem.constants, config.eta).beta;
    hp = HyperParams::constant(config.eta, beta, config.local_period, config.horizon,
                               {config.batch_h, config.batch_g}, K);
    schedule_report["eta"] = config.eta;
    schedule_report["beta"] = beta;
  }

  RunOptions opts;
  opts.cadence = config.cadence;

  const auto t_start = std::chrono::steady_clock::now();
  FederatedRunResult result;
  if (config.algorithm == "fedavg-case1") {
    result = run_vanilla_fedavg(problem, hp, FedAvgCase::I, x0, config.seed, opts);
  } else if (config.algorithm == "fedavg-case2") {
    result = run_vanilla_fedavg(problem, hp, FedAvgCase::II, x0, config.seed, opts);
  } else if (config.algorithm == "modified-fedavg") {
    result = run_modified_fedavg(problem, hp, x0, config.seed, opts);
  } else if (config.algorithm == "feddro") {
    result = run_feddro(problem, hp, x0, config.seed, opts);
  } else if (config.algorithm == "parallel-sgd") {
    result = run_parallel_sgd(problem, hp, x0, config.seed, opts);
  } else {
    throw ConfigError("run: unknown algorithm tag '" + config.algorithm + "'");
  }
  const auto t_end = std::chrono::steady_clock::now();

  RunOutcome out;
  out.wallclock_sec = std::chrono::duration<double>(t_end - t_start).count();

  nlohmann::json meta;
  meta["config"] = config.raw;
  meta["schedule"] = schedule_report;
  meta["chosen_index"] = result.chosen_index;
  meta["final"]["grad_norm_sq"] = result.trace.empty() ? 0.0 : result.trace.back().grad_norm_sq;
  meta["final"]["xbar"] = result.final_xbar;
  meta["final"]["avg_grad_norm_sq"] = detail::time_avg_grad_norm_sq(result.trace);
  meta["comm"]["highdim_up"] = result.comm.highdim_up;
  meta["comm"]["lowdim_up"] = result.comm.lowdim_up;
  meta["comm"]["highdim_down"] = result.comm.highdim_down;
  meta["comm"]["lowdim_down"] = result.comm.lowdim_down;
  meta["comm"]["samples_consumed"] = result.comm.samples_consumed;
  meta["comm"]["total_reals_uploaded"] =
      result.comm.highdim_up * problem.dim_x + result.comm.lowdim_up * problem.dim_g;
  out.meta = meta;

  if (!config.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    detail::write_trace_csv(result.trace, (fs::path(config.out_dir) / "trace.csv").string());
    {
      std::ofstream mf(fs::path(config.out_dir) / "meta.json", std::ios::binary);
      mf << meta.dump(2) << "\n";
    }
    {
      nlohmann::json timing;
      timing["wallclock_sec"] = out.wallclock_sec;
      std::ofstream tf(fs::path(config.out_dir) / "timing.json", std::ios::binary);
      tf << timing.dump(2) << "\n";
    }
  }

  out.result = std::move(result);
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

namespace detail {

inline RunConfig apply_axis(const RunConfig& base, const std::string& axis, double value) {
  nlohmann::json j = base.raw;
  if (axis == "K") {
    const std::string kind = j["problem"].value("kind", "");
    if (kind == "counterexample")
      throw ConfigError("sweep: axis K is not applicable to a fixed two-client problem");
    j["problem"]["clients"] = static_cast<int>(value);
  } else if (axis == "I") {
    j["hyper"]["I"] = static_cast<int>(value);
  } else if (axis == "eta") {
    if (j["hyper"].value("mode", "manual") == "theory")
      throw ConfigError("sweep: axis eta conflicts with theory-derived hyperparameters");
    j["hyper"]["eta"] = value;
  } else if (axis == "T") {
    j["hyper"]["T"] = static_cast<int>(value);
  } else {
    throw ConfigError("sweep: unknown axis '" + axis + "'");
  }
  return parse_run_config(j);
}

inline std::string axis_value_label(const std::string& axis, double value) {
  if (axis == "eta") return axis + "=" + fmt_double(value);
  return axis + "=" + std::to_string(static_cast<long long>(value));
}

struct SummaryRow {
  std::string axis;
  double value = 0.0;
  std::string seed;  // number, or "mean"/"std" aggregate rows
  double final_grad_norm_sq = 0.0;
  double avg_grad_norm_sq = 0.0;
};

inline void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("sweep: cannot open " + path);
  out << "axis,value,seed,final_grad_norm_sq,avg_grad_norm_sq\n";
  for (const auto& r : rows)
    out << r.axis << "," << fmt_double(r.value) << "," << r.seed << ","
        << fmt_double(r.final_grad_norm_sq) << "," << fmt_double(r.avg_grad_norm_sq) << "\n";
}

inline void append_aggregates(std::vector<SummaryRow>& rows, const std::string& axis,
                              double value, const std::vector<SummaryRow>& cell_rows) {
  const int n = static_cast<int>(cell_rows.size());
  SummaryRow mean{axis, value, "mean", 0.0, 0.0};
  for (const auto& r : cell_rows) {
    mean.final_grad_norm_sq += r.final_grad_norm_sq / n;
    mean.avg_grad_norm_sq += r.avg_grad_norm_sq / n;
  }
  SummaryRow sd{axis, value, "std", 0.0, 0.0};
  if (n > 1) {
    for (const auto& r : cell_rows) {
      const double df = r.final_grad_norm_sq - mean.final_grad_norm_sq;
      const double da = r.avg_grad_norm_sq - mean.avg_grad_norm_sq;
      sd.final_grad_norm_sq += df * df / (n - 1);
      sd.avg_grad_norm_sq += da * da / (n - 1);
    }
    sd.final_grad_norm_sq = std::sqrt(sd.final_grad_norm_sq);
    sd.avg_grad_norm_sq = std::sqrt(sd.avg_grad_norm_sq);
  }
  rows.push_back(mean);
  rows.push_back(sd);
}

inline RunTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("report: cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  RunTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceRow r;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) throw std::runtime_error("report: malformed row in " + path);
    r.t = std::stoi(cells[0]);
    r.round = std::stoi(cells[1]);
    r.grad_norm_sq = std::stod(cells[2]);
    r.drift = std::stod(cells[3]);
    r.embed_bias = std::stod(cells[4]);
    r.comm.highdim_up = std::stoll(cells[5]);
    r.comm.lowdim_up = std::stoll(cells[6]);
    r.comm.highdim_down = std::stoll(cells[7]);
    r.comm.lowdim_down = std::stoll(cells[8]);
    r.comm.samples_consumed = std::stoll(cells[9]);
    trace.push_back(r);
  }
  return trace;
}

}  // namespace detail

struct SweepResult {
  std::vector<std::string> cell_dirs;
  std::string summary_path;
};

// One run per (value, seed) pair, each persisted to its own subdirectory of
// out_dir, followed by summary.csv with per-cell and mean/std statistics.
inline SweepResult sweep(const RunConfig& base, const std::string& axis,
                         const std::vector<double>& values,
                         const std::vector<std::uint64_t>& seeds, const std::string& out_dir) {
  if (values.empty()) throw ConfigError("sweep: no axis values");
  if (seeds.empty()) throw ConfigError("sweep: no seeds");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  SweepResult sr;
  std::vector<detail::SummaryRow> rows;
  nlohmann::json manifest;
  manifest["axis"] = axis;
  manifest["values"] = values;
  manifest["seeds"] = seeds;
  manifest["base_config"] = base.raw;

  for (double value : values) {
    std::vector<detail::SummaryRow> cell_rows;
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = detail::apply_axis(base, axis, value);
      cfg.seed = seed;
      cfg.raw["seed"] = seed;
      const fs::path cell = fs::path(out_dir) / detail::axis_value_label(axis, value) /
                            ("seed=" + std::to_string(seed));
      cfg.out_dir = cell.string();
      const RunOutcome outcome = run_experiment(cfg);
      sr.cell_dirs.push_back(cell.string());
      detail::SummaryRow row;
      row.axis = axis;
      row.value = value;
      row.seed = std::to_string(seed);
      row.final_grad_norm_sq = outcome.meta["final"]["grad_norm_sq"].get<double>();
      row.avg_grad_norm_sq = outcome.meta["final"]["avg_grad_norm_sq"].get<double>();
      cell_rows.push_back(row);
    }
    rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
    detail::append_aggregates(rows, axis, value, cell_rows);
  }

  {
    std::ofstream mf(fs::path(out_dir) / "sweep.json", std::ios::binary);
    mf << manifest.dump(2) << "\n";
  }
  sr.summary_path = (fs::path(out_dir) / "summary.csv").string();
  detail::write_summary_csv(rows, sr.summary_path);
  return sr;
}

// Rebuilds summary.csv from the per-cell trace.csv files under a sweep
// directory (sweep.json supplies the cell enumeration order).
inline std::string regenerate_summary(const std::string& sweep_dir) {
  namespace fs = std::filesystem;
  const fs::path manifest_path = fs::path(sweep_dir) / "sweep.json";
  std::ifstream mf(manifest_path);
  if (!mf) throw ConfigError("report: cannot open " + manifest_path.string());
  nlohmann::json manifest;
  mf >> manifest;
  const std::string axis = manifest["axis"].get<std::string>();
  const std::vector<double> values = manifest["values"].get<std::vector<double>>();
  const std::vector<std::uint64_t> seeds = manifest["seeds"].get<std::vector<std::uint64_t>>();

  std::vector<detail::SummaryRow> rows;
  for (double value : values) {
    std::vector<detail::SummaryRow> cell_rows;
    for (std::uint64_t seed : seeds) {
      const fs::path cell = fs::path(sweep_dir) / detail::axis_value_label(axis, value) /
                            ("seed=" + std::to_string(seed));
      const RunTrace trace = detail::read_trace_csv((cell / "trace.csv").string());
      detail::SummaryRow row;
      row.axis = axis;
      row.value = value;
      row.seed = std::to_string(seed);
      row.final_grad_norm_sq = trace.empty() ? 0.0 : trace.back().grad_norm_sq;
      row.avg_grad_norm_sq = detail::time_avg_grad_norm_sq(trace);
      cell_rows.push_back(row);
    }
    rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
    detail::append_aggregates(rows, axis, value, cell_rows);
  }
  const std::string path = (fs::path(sweep_dir) / "summary.csv").string();
  detail::write_summary_csv(rows, path);
  return path;
}

inline nlohmann::json verify_report_json(const VerifyReport& report) {
  nlohmann::json j;
  j["all_pass"] = report.all_pass();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    nlohmann::json cj;
    cj["name"] = c.name;
    cj["pass"] = c.pass;
    cj["measured"] = c.measured;
    cj["tolerance"] = c.tolerance;
    cj["detail"] = c.detail;
    j["checks"].push_back(cj);
  }
  return j;
}

}  // namespace feddro
