// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "natcomp/bounds.hpp"
#include "natcomp/codec.hpp"
#include "natcomp/core_ops.hpp"
#include "natcomp/dithering.hpp"
#include "natcomp/errors.hpp"
#include "natcomp/ina_service.hpp"
#include "natcomp/sgd.hpp"
#include "natcomp/variance_lab.hpp"
#include "natcomp/vector_io.hpp"

namespace {

using natcomp::CompressorSpec;
using natcomp::DenseVector;
using nlohmann::json;

// Row sink emitting CSV or JSON lines with a shared column schema.
class RowSink {
 public:
  RowSink(std::ostream& out, bool json_lines, std::vector<std::string> columns)
      : out_(out), json_lines_(json_lines), columns_(std::move(columns)) {
    out_.precision(17);
    if (!json_lines_) {
      for (size_t i = 0; i < columns_.size(); ++i) {
        if (i) out_ << ',';
        out_ << columns_[i];
      }
      out_ << '\n';
    }
  }

  void row(const std::vector<json>& values) {
    if (json_lines_) {
      json obj;
      for (size_t i = 0; i < columns_.size(); ++i) obj[columns_[i]] = values[i];
      out_ << obj.dump() << '\n';
      return;
    }
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      if (values[i].is_string()) {
        const std::string& s = values[i].get_ref<const std::string&>();
        if (s.find_first_of(",\"\n") != std::string::npos) {
          out_ << '"';
          for (char c : s) {
            if (c == '"') out_ << '"';
            out_ << c;
          }
          out_ << '"';
        } else {
          out_ << s;
        }
      } else {
        out_ << values[i].dump();
      }
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
  bool json_lines_;
  std::vector<std::string> columns_;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw natcomp::InvalidInputError("cannot open output file " + path);
  }
  return out;
}

// Writes to --out when given, stdout otherwise.
class OutTarget {
 public:
  explicit OutTarget(const std::string& path) {
    if (!path.empty()) {
      file_ = open_out(path);
      out_ = &file_;
    } else {
      out_ = &std::cout;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_ = nullptr;
};

natcomp::NormKind parse_norm_flag(const std::string& p) {
  if (p == "1") return natcomp::NormKind::kL1;
  if (p == "2") return natcomp::NormKind::kL2;
  if (p == "inf") return natcomp::NormKind::kLinf;
  throw natcomp::ConfigError("norm must be 1, 2 or inf");
}

int run_compress(const std::string& in_path, const std::string& spec_text,
                 const std::string& out_path, const std::string& wire,
                 uint64_t seed) {
  const DenseVector x = natcomp::load_vector_file(in_path);
  const CompressorSpec spec = CompressorSpec::parse(spec_text);
  spec.validate(x.dim());
  std::cerr << "seed: " << seed << "\n";
  const natcomp::RngStream rng(seed, 0);

  std::vector<uint8_t> block;
  uint64_t clip = 0;
  if (spec.variant == natcomp::Variant::kStdDither ||
      spec.variant == natcomp::Variant::kNatDither) {
    const natcomp::LevelLadder ladder =
        spec.variant == natcomp::Variant::kStdDither
            ? natcomp::LevelLadder::linear(spec.s_levels)
            : natcomp::LevelLadder::geometric(spec.s_levels);
    const natcomp::DitherResult r =
        natcomp::dither(x, ladder, spec.p_norm, spec.norm_mode, rng);
    block = natcomp::encode_dither(r, spec.p_norm, spec.norm_mode);
  } else {
    const DenseVector compressed = natcomp::compress(x, spec, rng);
    if (wire == "nat8c") {
      block = natcomp::encode_nat8c(compressed, &clip);
    } else {
      block = natcomp::encode_nat9(compressed);
    }
  }
  natcomp::write_binary_file(out_path, block);
  std::cerr << "d: " << x.dim() << "\nblock bytes: " << block.size()
            << "\nraw binary32 bytes: " << 4 * x.dim();
  if (wire == "nat8c") std::cerr << "\nclipped: " << clip;
  std::cerr << "\n";
  return 0;
}

int run_decode(const std::string& in_path, const std::string& out_path) {
  const std::vector<uint8_t> block = natcomp::read_binary_file(in_path);
  const natcomp::DecodedBlock decoded = natcomp::decode(block);
  natcomp::save_vector_file(out_path, decoded.values);
  std::cerr << "codec: " << static_cast<int>(decoded.codec)
            << "\nd: " << decoded.d << "\n";
  return 0;
}

int run_hist(const std::string& in_path, const std::string& out_path,
             bool json_lines) {
  const DenseVector x = natcomp::load_vector_file(in_path);
  const natcomp::ExponentHistogram h = natcomp::exponent_histogram(x);
  OutTarget target(out_path);
  RowSink sink(target.stream(), json_lines, {"exponent", "count"});
  for (const auto& [k, count] : h.counts) {
    sink.row({k, count});
  }
  std::cerr << "zeros: " << h.zeros;
  if (h.any()) {
    std::cerr << "\nmin exponent: " << h.min_exp
              << "\nmax exponent: " << h.max_exp;
  }
  std::cerr << "\n";
  return 0;
}

int run_variance(const std::string& spec_text, size_t d, int trials,
                 uint64_t seed, const std::string& law,
                 const std::string& in_path, const std::string& out_path,
                 const std::string& summary_path, bool json_lines) {
  const CompressorSpec spec = CompressorSpec::parse(spec_text);
  std::cerr << "seed: " << seed << "\n";
  natcomp::VarianceReport report;
  if (law == "gaussian") {
    report = natcomp::empirical_omega(spec, d, trials, seed,
                                      natcomp::InputLaw::kGaussian);
  } else if (law == "file") {
    const DenseVector x = natcomp::load_vector_file(in_path);
    report = natcomp::empirical_omega(spec, x.dim(), trials, seed,
                                      natcomp::InputLaw::kFile, &x);
  } else {
    throw natcomp::ConfigError("variance: law must be gaussian or file");
  }
  {
    OutTarget target(out_path);
    RowSink sink(target.stream(), json_lines, {"trial", "omega"});
    for (size_t t = 0; t < report.omega_samples.size(); ++t) {
      sink.row({t, report.omega_samples[t]});
    }
  }
  if (!summary_path.empty()) {
    std::ofstream out = open_out(summary_path);
    RowSink sink(out, json_lines,
                 {"spec", "d", "trials", "min", "q25", "median", "q75", "max"});
    sink.row({report.spec.to_string(), report.d, report.trials, report.min,
              report.q25, report.median, report.q75, report.max});
  }
  return 0;
}

int run_bounds(const std::string& spec_text, size_t d,
               const std::string& master_text, int n, double sigma2,
               double zeta2, double L, double f0, double eps) {
  const CompressorSpec spec = CompressorSpec::parse(spec_text);
  const natcomp::OmegaBound w = natcomp::omega_of(spec, d);
  std::cout.precision(17);
  std::cout << "spec: " << spec.to_string() << "\nomega: " << w.value
            << "\nsource: " << w.source << "\n";
  if (!master_text.empty()) {
    const CompressorSpec master = CompressorSpec::parse(master_text);
    const natcomp::OmegaBound wm = natcomp::omega_of(master, d);
    natcomp::ProblemSpec problem{n, sigma2, zeta2, L, f0};
    const natcomp::AlphaBeta ab = natcomp::alpha_beta(problem, w.value,
                                                      wm.value);
    std::cout << "master omega: " << wm.value << "\nalpha: " << ab.alpha
              << "\nbeta: " << ab.beta << "\n";
    if (eps > 0.0) {
      const natcomp::StepPlan plan =
          natcomp::step_plan_fixed_epsilon(problem, ab, eps);
      std::cout << "eta: " << plan.eta << "\nT: " << plan.T << "\n";
    }
  }
  return 0;
}

int run_cost_table(int model, size_t d, size_t q, const std::string& p,
                   const std::string& out_path, bool json_lines) {
  const natcomp::CostModel cm = static_cast<natcomp::CostModel>(model);
  const std::vector<natcomp::CostTableRow> rows =
      natcomp::cost_table(cm, d, q, parse_norm_flag(p));
  OutTarget target(out_path);
  RowSink sink(target.stream(), json_lines,
               {"model", "row", "s_lower", "s_upper", "omega_plus_1_lower",
                "omega_plus_1_upper", "bits_lower", "bits_upper",
                "speedup_lower", "speedup_upper"});
  for (const natcomp::CostTableRow& row : rows) {
    sink.row({model, row.label, row.cell.s_lower, row.cell.s_upper,
              row.omega_plus_1_lower, row.omega_plus_1_upper, row.bits_lower,
              row.bits_upper, row.cell.lower, row.cell.upper});
  }
  return 0;
}

int run_fig1(size_t d, const std::string& out_path, bool json_lines) {
  OutTarget target(out_path);
  RowSink sink(target.stream(), json_lines, {"spec", "omega_plus_1", "bits"});
  for (const natcomp::FigureRow& row : natcomp::fig1_rows(d)) {
    sink.row({row.label, row.omega_plus_1, row.bits});
  }
  return 0;
}

int run_sgd_cmd(const std::string& config_path, const std::string& out_path,
                uint64_t seed_override, bool have_seed) {
  std::ifstream in(config_path);
  if (!in) {
    throw natcomp::InvalidInputError("cannot open config " + config_path);
  }
  natcomp::SgdSetup setup = natcomp::parse_sgd_config(in);
  if (have_seed) setup.config.seed = seed_override;
  std::cerr << "seed: " << setup.config.seed << "\n";
  const natcomp::RunTrace trace = natcomp::run_sgd(setup.problem, setup.config);
  OutTarget target(out_path);
  natcomp::write_trace_csv(target.stream(), trace);
  std::cerr.precision(17);
  std::cerr << "eta: " << trace.eta_used << "\nT: " << trace.T
            << "\nalpha: " << trace.ab.alpha << "\nbeta: " << trace.ab.beta
            << "\nL: " << trace.constants.L
            << "\nf0_minus_fstar: " << trace.constants.f0_minus_fstar
            << "\nfinal_f: " << trace.final_f
            << "\nsampled_iteration: " << trace.sampled_iteration
            << "\nsampled_grad_sq: " << trace.sampled_grad_sq << "\n";
  return 0;
}

volatile std::sig_atomic_t g_stop_requested = 0;

int run_ina_serve(const std::string& listen, int workers, uint64_t seed,
                  double timeout) {
  std::string host = listen;
  uint16_t port = 0;
  const size_t colon = listen.find(':');
  if (colon != std::string::npos) {
    host = listen.substr(0, colon);
    port = static_cast<uint16_t>(std::stoi(listen.substr(colon + 1)));
  }
  natcomp::ina::ServerOptions options;
  options.listen_host = host;
  options.port = port;
  options.n_workers = workers;
  options.seed = seed;
  options.timeout_sec = timeout;
  natcomp::ina::InaServer server(options);
  std::cerr << "seed: " << seed << "\nlistening on " << host << ":"
            << server.port() << "\n";
  std::signal(SIGINT, [](int) { g_stop_requested = 1; });
  std::signal(SIGTERM, [](int) { g_stop_requested = 1; });
  while (!g_stop_requested) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  const natcomp::ina::ServerCounters counters = server.counters();
  server.stop();
  std::cerr << "chunks: " << counters.chunks_aggregated
            << "\nclipped: " << counters.clipped
            << "\nsaturated: " << counters.saturated
            << "\naborted sessions: " << counters.sessions_aborted << "\n";
  return 0;
}

int run_ina_worker(const std::string& connect, uint64_t session, int worker_id,
                   int workers, const std::string& in_path,
                   const std::string& out_path, uint64_t seed, int chunk) {
  const size_t colon = connect.find(':');
  if (colon == std::string::npos) {
    throw natcomp::ConfigError("ina worker: --connect needs host:port");
  }
  const std::string host = connect.substr(0, colon);
  const uint16_t port =
      static_cast<uint16_t>(std::stoi(connect.substr(colon + 1)));
  const DenseVector x = natcomp::load_vector_file(in_path);
  std::cerr << "seed: " << seed << "\n";
  const natcomp::RngStream rng(seed, static_cast<uint64_t>(worker_id));
  const DenseVector compressed =
      natcomp::compress(x, CompressorSpec::nat(), rng);
  natcomp::ina::InaWorkerClient client(
      host, port, session, static_cast<uint16_t>(worker_id),
      static_cast<uint16_t>(workers), x.dim(), static_cast<uint16_t>(chunk));
  client.send_vector(compressed, 0);
  const DenseVector agg = client.receive_vector(0);
  natcomp::save_vector_file(out_path, agg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"natcomp: gradient compression toolkit"};
  app.require_subcommand(1);

  uint64_t seed = 0;
  bool have_seed = false;
  std::string out_path;
  std::string format = "csv";
  app.add_option("--seed", seed, "Random seed (default 0, always printed)")
      ->each([&](const std::string&) { have_seed = true; });
  app.add_option("--out", out_path, "Output file (default stdout)");
  app.add_option("--format", format, "Output format: csv or json-lines")
      ->check(CLI::IsMember({"csv", "json-lines"}));

  // compress
  auto* compress = app.add_subcommand("compress", "Compress a vector file");
  std::string c_in, c_spec = "nat", c_wire = "nat9";
  compress->add_option("--in", c_in, "Input vector file")->required();
  compress->add_option("--spec", c_spec, "Compressor spec string");
  compress->add_option("--wire", c_wire, "Wire codec for scalar specs")
      ->check(CLI::IsMember({"nat9", "nat8c"}));

  // decode
  auto* decode = app.add_subcommand("decode", "Decode an encoded block file");
  std::string d_in;
  decode->add_option("--in", d_in, "Input block file")->required();

  // hist
  auto* hist = app.add_subcommand("hist", "Exponent histogram of a vector");
  std::string h_in;
  hist->add_option("--in", h_in, "Input vector file")->required();

  // variance
  auto* variance =
      app.add_subcommand("variance", "Empirical-variance experiment");
  std::string v_spec, v_law = "gaussian", v_in, v_summary;
  size_t v_d = 100000;
  int v_trials = 100;
  variance->add_option("--spec", v_spec, "Compressor spec")->required();
  variance->add_option("--d", v_d, "Dimension");
  variance->add_option("--trials", v_trials, "Trials");
  variance->add_option("--law", v_law, "Input law: gaussian or file");
  variance->add_option("--in", v_in, "Vector file for --law file");
  variance->add_option("--summary-out", v_summary, "Summary CSV path");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Analytic omega/alpha/beta");
  std::string b_spec, b_master;
  size_t b_d = 1000000;
  int b_n = 1;
  double b_sigma2 = 0, b_zeta2 = 0, b_L = 1, b_f0 = 1, b_eps = 0;
  bounds->add_option("--spec", b_spec, "Compressor spec")->required();
  bounds->add_option("--d", b_d, "Dimension");
  bounds->add_option("--master-spec", b_master, "Master compressor spec");
  bounds->add_option("--n", b_n, "Workers");
  bounds->add_option("--sigma2", b_sigma2, "Stochastic gradient variance");
  bounds->add_option("--zeta2", b_zeta2, "Dissimilarity bound");
  bounds->add_option("--L", b_L, "Smoothness constant");
  bounds->add_option("--f0", b_f0, "f(x0) - f*");
  bounds->add_option("--eps", b_eps, "Target accuracy for the step plan");

  // cost-table
  auto* cost = app.add_subcommand("cost-table", "Speedup table for a model");
  int t_model = 2;
  size_t t_d = 1000000, t_q = 100000;
  std::string t_p = "2";
  cost->add_option("--model", t_model, "Cost model 1..4")
      ->check(CLI::Range(1, 4));
  cost->add_option("--d", t_d, "Dimension");
  cost->add_option("--q", t_q, "Sparsifier budget");
  cost->add_option("--p", t_p, "Dithering norm: 1, 2 or inf");

  // fig1
  auto* fig1 = app.add_subcommand("fig1", "Second moment vs bits scatter");
  size_t f_d = 1000000;
  fig1->add_option("--d", f_d, "Dimension");

  // sgd
  auto* sgd = app.add_subcommand("sgd", "Distributed SGD simulation");
  std::string s_config;
  sgd->add_option("--config", s_config, "Key=value config file")->required();

  // ina
  auto* ina = app.add_subcommand("ina", "In-network aggregation service");
  ina->require_subcommand(1);
  auto* serve = ina->add_subcommand("serve", "Run the aggregation service");
  std::string is_listen = "127.0.0.1:7171";
  int is_workers = 1;
  double is_timeout = 5.0;
  serve->add_option("--listen", is_listen, "host:port");
  serve->add_option("--workers", is_workers, "Workers per session")
      ->required();
  serve->add_option("--timeout", is_timeout, "Missing-frame timeout (s)");
  auto* worker = ina->add_subcommand("worker", "One-shot aggregation client");
  std::string iw_connect, iw_in;
  uint64_t iw_session = 1;
  int iw_id = 0, iw_workers = 1, iw_chunk = 256;
  worker->add_option("--connect", iw_connect, "host:port")->required();
  worker->add_option("--session", iw_session, "Session id");
  worker->add_option("--worker-id", iw_id, "Worker id")->required();
  worker->add_option("--workers", iw_workers, "Workers in session")
      ->required();
  worker->add_option("--in", iw_in, "Input vector file")->required();
  worker->add_option("--chunk", iw_chunk, "Elements per frame")
      ->check(CLI::Range(1, 256));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage errors exit 2
  }
  const bool json_lines = format == "json-lines";

  try {
    if (*compress) {
      if (out_path.empty()) {
        throw natcomp::ConfigError("compress: --out is required");
      }
      return run_compress(c_in, c_spec, out_path, c_wire, seed);
    }
    if (*decode) {
      if (out_path.empty()) {
        throw natcomp::ConfigError("decode: --out is required");
      }
      return run_decode(d_in, out_path);
    }
    if (*hist) return run_hist(h_in, out_path, json_lines);
    if (*variance) {
      return run_variance(v_spec, v_d, v_trials, seed, v_law, v_in, out_path,
                          v_summary, json_lines);
    }
    if (*bounds) {
      return run_bounds(b_spec, b_d, b_master, b_n, b_sigma2, b_zeta2, b_L,
                        b_f0, b_eps);
    }
    if (*cost) return run_cost_table(t_model, t_d, t_q, t_p, out_path,
                                     json_lines);
    if (*fig1) return run_fig1(f_d, out_path, json_lines);
    if (*sgd) return run_sgd_cmd(s_config, out_path, seed, have_seed);
    if (*serve) return run_ina_serve(is_listen, is_workers, seed, is_timeout);
    if (*worker) {
      if (out_path.empty()) {
        throw natcomp::ConfigError("ina worker: --out is required");
      }
      return run_ina_worker(iw_connect, iw_session, iw_id, iw_workers, iw_in,
                            out_path, seed, iw_chunk);
    }
  } catch (const natcomp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const natcomp::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const natcomp::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const natcomp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
