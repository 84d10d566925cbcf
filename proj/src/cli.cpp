#include "genmean/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "genmean/errors.hpp"
#include "genmean/harness.hpp"
#include "genmean/numeric.hpp"
#include "genmean/parallel.hpp"
#include "genmean/power_mean.hpp"

namespace genmean::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDefaultDiscreteGrid = "-inf,-2,-1,0,0.25,0.5,0.75,1,2,+inf";
constexpr const char* kDefaultGaussianGrid = "-inf,-4,-2,-1,-0.5,0,0.25,0.5,0.75,1,1.5,2,4,+inf";

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void print(std::ostream& out) const {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "\t" : "") << header[c];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "\t" : "") << row[c];
      out << '\n';
    }
  }
};

// Writes to `path`, or to `out` when path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path + " for writing");
  file << text;
  if (!file) throw Error("failed to write " + path);
}

ResultFormat parse_format(const std::string& s) {
  if (s == "csv") return ResultFormat::csv;
  if (s == "json") return ResultFormat::json;
  throw InvalidInput("unknown format '" + s + "' (expected csv or json)");
}

Table sweep_table(const SweepResult& r) {
  Table t{{"order", "mean_nll", "std_nll", "baseline_mean", "baseline_std"}, {}};
  for (std::size_t j = 0; j < r.grid.size(); ++j)
    t.rows.push_back({r.grid[j].to_string(), format_12g(r.mean_nll[j]), format_12g(r.std_nll[j]),
                      format_12g(r.baseline_mean), format_12g(r.baseline_std)});
  return t;
}

std::string join_grid(const std::vector<PowerOrder>& grid) {
  std::string s;
  for (const auto& o : grid) s += (s.empty() ? "" : ",") + o.to_string();
  return s;
}

// --- aggregate ---------------------------------------------------------

struct AggregateArgs {
  std::string manifest;
  std::string order;
  std::string out;
  std::size_t ensemble = 0;
};

int cmd_aggregate(const AggregateArgs& a, std::ostream& out, std::ostream& err) {
  const auto order = PowerOrder::parse(a.order);
  err << "genmean aggregate: manifest=" << a.manifest << " order=" << order.to_string() << " ensemble=" << a.ensemble
      << " out=" << (a.out.empty() ? "-" : a.out) << '\n';
  const auto ds = load_dataset(a.manifest);
  if (a.ensemble >= ds.ensemble_count())
    throw InvalidInput("ensemble index " + std::to_string(a.ensemble) + " out of range");
  std::ostringstream text;
  for (const auto& m : ds.ensembles[a.ensemble].samples) {
    const auto agg = aggregate(m, order);
    for (std::size_t y = 0; y < agg.log_probs.size(); ++y) text << (y ? "," : "") << format_12g(std::exp(agg.log_probs[y]));
    text << '\n';
  }
  emit(a.out, text.str(), out);
  return kSuccess;
}

// --- sweep -------------------------------------------------------------

struct SweepArgs {
  std::string manifest;
  std::string grid = kDefaultDiscreteGrid;
  std::string out;
  std::string format = "csv";
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  const auto grid = parse_order_list(a.grid);
  const auto format = parse_format(a.format);
  err << "genmean sweep: manifest=" << a.manifest << " grid=" << join_grid(grid) << " format=" << a.format
      << " out=" << (a.out.empty() ? "-" : a.out) << " threads=" << worker_count() << '\n';
  const auto ds = load_dataset(a.manifest);
  err << "genmean sweep: dataset '" << ds.name << "' N=" << ds.samples() << " k=" << ds.models()
      << " L=" << ds.classes << " E=" << ds.ensemble_count() << '\n';
  const auto result = sweep_discrete(ds, grid);
  if (a.out.empty()) {
    out << serialize_result(result, format);
  } else {
    save_result(result, a.out, format);
    sweep_table(result).print(out);
  }
  return kSuccess;
}

// --- gaussian-sweep ----------------------------------------------------

struct GaussianSweepArgs {
  std::string experts;
  std::string sample;
  std::size_t n = 50000;
  std::string grid = kDefaultGaussianGrid;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  IntegrationConfig cfg;
};

int cmd_gaussian_sweep(const GaussianSweepArgs& a, std::ostream& out, std::ostream& err) {
  const auto experts = parse_experts(a.experts);
  const auto law = parse_experts(a.sample);
  if (law.size() != 1) throw InvalidInput("--sample takes exactly one mean:std pair");
  const auto grid = parse_order_list(a.grid);
  const auto format = parse_format(a.format);
  IntegrationConfig cfg = a.cfg;
  cfg.seed = a.seed;
  err << "genmean gaussian-sweep: experts=" << a.experts << " sample=" << a.sample << " n=" << a.n
      << " grid=" << join_grid(grid) << " seed=" << a.seed << " rel_tol=" << format_exact(cfg.rel_tol)
      << " format=" << a.format << " out=" << (a.out.empty() ? "-" : a.out) << " threads=" << worker_count() << '\n';
  const auto result = sweep_gaussian(experts, law.front(), a.n, grid, cfg);
  if (a.out.empty()) {
    out << serialize_result(result, format);
  } else {
    save_result(result, a.out, format);
    sweep_table(result).print(out);
  }
  return kSuccess;
}

// --- synth -------------------------------------------------------------

struct SynthArgs {
  std::string generator = "dirichlet";
  std::size_t samples = 1000;
  std::size_t models = 10;
  std::size_t classes = 10;
  std::size_t ensembles = 5;
  double alpha = 10.0;
  double accuracy = 0.6;
  double sigma = 0.05;
  std::uint64_t seed = 0;
  std::string out_dir;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  SynthGenerator gen;
  if (a.generator == "dirichlet") {
    gen = DirichletJitter{a.alpha, a.accuracy};
  } else if (a.generator == "near-consensus") {
    gen = NearConsensus{a.sigma, a.accuracy};
  } else {
    throw InvalidInput("unknown generator '" + a.generator + "' (expected dirichlet or near-consensus)");
  }
  err << "genmean synth: generator=" << a.generator << " N=" << a.samples << " k=" << a.models << " L=" << a.classes
      << " E=" << a.ensembles << " alpha=" << format_exact(a.alpha) << " accuracy=" << format_exact(a.accuracy)
      << " sigma=" << format_exact(a.sigma) << " seed=" << a.seed << " out_dir=" << a.out_dir << '\n';
  const auto ds = synth_ensemble(gen, a.samples, a.models, a.classes, a.ensembles, a.seed);
  out << save_dataset(ds, a.out_dir).string() << '\n';
  return kSuccess;
}

// --- counterexample ----------------------------------------------------

Table counterexample_header() {
  return {{"fixture", "order", "point", "aggregated_loglik", "average_loglik", "gap", "unnormalized_gap"}, {}};
}

void discrete_counterexample(const DiscreteCounterexample& fx, std::ostream& out) {
  const auto agg = aggregate(fx.models, fx.order);
  const auto gap = wisdom_gap(fx.models, fx.order);
  const auto scores = class_scores(fx.models, fx.order);
  const std::size_t y = fx.true_class;
  const double aggregated = agg.log_probs[y];
  const double average = aggregated - gap.per_class_gap[y];

  out << "models:\n";
  for (std::size_t i = 0; i < fx.models.models(); ++i) {
    out << "  p" << (i + 1) << " =";
    for (double lp : fx.models.row(i)) out << ' ' << format_12g(std::exp(lp));
    out << '\n';
  }
  out << "aggregated:";
  for (double lp : agg.log_probs) out << ' ' << format_12g(std::exp(lp));
  out << '\n';
  auto t = counterexample_header();
  t.rows.push_back({fx.name, fx.order.to_string(), "y=" + std::to_string(y), format_12g(aggregated),
                    format_12g(average), format_12g(gap.per_class_gap[y]), format_12g(scores[y] - average)});
  t.print(out);
}

void gaussian_counterexample(const std::string& name, double m, PowerOrder order, double x, std::ostream& out) {
  const std::vector<GaussianDensity> experts = {GaussianDensity::univariate(-m, 1.0), GaussianDensity::univariate(m, 1.0)};
  const auto norm = log_z(experts, order, {});
  const Eigen::VectorXd point = Eigen::VectorXd::Constant(1, x);
  const double aggregated = aggregated_log_density(experts, order, norm, point);
  const double gap = wisdom_gap_continuous(experts, order, norm, point);
  const double jensen = jensen_gap_continuous(experts, order, point);
  out << "experts: N(" << format_12g(-m) << ",1) N(" << format_12g(m) << ",1)\n";
  out << "log_z: " << format_12g(norm.log_z) << " (" << norm.method_name() << ")\n";
  if (order.is_finite() && order.value() < 0.0)
    out << "closed_form_unnormalized_gap: " << format_12g(counterexample_gap_formula(m, order.value())) << '\n';
  auto t = counterexample_header();
  t.rows.push_back({name, order.to_string(), "x=" + format_12g(x), format_12g(aggregated), format_12g(aggregated - gap),
                    format_12g(gap), format_12g(jensen)});
  t.print(out);
}

int cmd_counterexample(const std::string& which, std::ostream& out, std::ostream& err) {
  err << "genmean counterexample: which=" << which << '\n';
  const auto fixtures = extreme_counterexamples();
  if (which == "min") {
    discrete_counterexample(fixtures.min_at_disagreement, out);
  } else if (which == "max") {
    discrete_counterexample(fixtures.max_at_agreement, out);
  } else if (which == "gaussian-neg") {
    gaussian_counterexample("gaussian-neg", 2.0, PowerOrder::finite(-1.0), 2.0, out);
  } else if (which == "gaussian-gt1") {
    gaussian_counterexample("gaussian-gt1", 1.5, PowerOrder::finite(2.0), 0.0, out);
  } else {
    throw InvalidInput("unknown counterexample '" + which + "'");
  }
  return kSuccess;
}

// --- zcheck ------------------------------------------------------------

struct ZcheckArgs {
  std::string experts;
  std::string order;
  double tolerance = 1e-8;
  IntegrationConfig cfg;
};

int cmd_zcheck(const ZcheckArgs& a, std::ostream& out, std::ostream& err) {
  const auto experts = parse_experts(a.experts);
  const auto order = PowerOrder::parse(a.order);
  err << "genmean zcheck: experts=" << a.experts << " order=" << order.to_string()
      << " tolerance=" << format_exact(a.tolerance) << " rel_tol=" << format_exact(a.cfg.rel_tol)
      << " mc_samples=" << a.cfg.mc_samples << " seed=" << a.cfg.seed << " cap=" << a.cfg.composition_cap << '\n';

  std::optional<NormalizationResult> closed;
  if (order.is_geometric()) {
    closed = log_z_geometric(experts);
  } else if (const unsigned n = reciprocal_integer(order); n > 0) {
    closed = log_z_reciprocal(experts, n, a.cfg.composition_cap);
  }
  const auto numeric = log_z_numeric(experts, order, a.cfg);

  Table t{{"order", "closed_form_log_z", "numeric_log_z", "difference", "numeric_error_estimate"}, {}};
  const double diff = closed ? std::abs(closed->log_z - numeric.log_z) : 0.0;
  t.rows.push_back({order.to_string(), closed ? format_12g(closed->log_z) : "n/a", format_12g(numeric.log_z),
                    closed ? format_12g(diff) : "n/a", format_12g(numeric.error_estimate)});
  t.print(out);
  if (closed && !(diff <= a.tolerance)) {
    err << "genmean zcheck: closed form " << format_12g(closed->log_z) << " and numeric " << format_12g(numeric.log_z)
        << " differ by " << format_12g(diff) << " > " << format_exact(a.tolerance) << '\n';
    return kConsistencyError;
  }
  return kSuccess;
}

void add_integration_flags(CLI::App* sub, IntegrationConfig& cfg) {
  sub->add_option("--rel-tol", cfg.rel_tol, "Relative tolerance for 1D quadrature");
  sub->add_option("--mc-samples", cfg.mc_samples, "Importance-sampling budget (d >= 2)");
  sub->add_option("--mc-rel-tol", cfg.mc_rel_tol, "Relative standard-error target for importance sampling");
  sub->add_option("--composition-cap", cfg.composition_cap, "Maximum compositions for r = 1/n closed forms");
}

}  // namespace

std::vector<GaussianDensity> parse_experts(const std::string& text) {
  std::vector<GaussianDensity> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw InvalidInput("expected mean:std, got '" + item + "'");
    const double mean = parse_double(item.substr(0, colon));
    const double sd = parse_double(item.substr(colon + 1));
    if (!std::isfinite(mean)) throw InvalidInput("mean must be finite in '" + item + "'");
    if (!(sd > 0.0) || !std::isfinite(sd)) throw InvalidInput("standard deviation must be positive in '" + item + "'");
    out.push_back(GaussianDensity::univariate(mean, sd));
  }
  if (out.empty()) throw InvalidInput("no experts in '" + text + "'");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Normalized power-mean aggregation of probability distributions", "genmean"};
  app.require_subcommand(1);

  AggregateArgs agg;
  auto* agg_cmd = app.add_subcommand("aggregate", "Aggregate per-sample predictions of one ensemble");
  agg_cmd->add_option("--manifest", agg.manifest, "Dataset manifest (JSON)")->required();
  agg_cmd->add_option("--order", agg.order, "Order r: decimal, -inf or +inf")->required();
  agg_cmd->add_option("--out", agg.out, "Output CSV (default: stdout)");
  agg_cmd->add_option("--ensemble", agg.ensemble, "Ensemble index");

  SweepArgs sw;
  auto* sw_cmd = app.add_subcommand("sweep", "Cross-entropy as a function of r over a dataset");
  sw_cmd->add_option("--manifest", sw.manifest, "Dataset manifest (JSON)")->required();
  sw_cmd->add_option("--grid", sw.grid, "Comma-separated increasing orders");
  sw_cmd->add_option("--out", sw.out, "Result file (default: stdout)");
  sw_cmd->add_option("--format", sw.format, "csv or json");

  GaussianSweepArgs gs;
  auto* gs_cmd = app.add_subcommand("gaussian-sweep", "NLL as a function of r for 1D Gaussian experts");
  gs_cmd->add_option("--experts", gs.experts, "Experts as mean:std;mean:std;...")->required();
  gs_cmd->add_option("--sample", gs.sample, "Sampling law as mean:std")->required();
  gs_cmd->add_option("--n", gs.n, "Number of samples");
  gs_cmd->add_option("--grid", gs.grid, "Comma-separated increasing orders");
  gs_cmd->add_option("--seed", gs.seed, "Sampling seed");
  gs_cmd->add_option("--out", gs.out, "Result file (default: stdout)");
  gs_cmd->add_option("--format", gs.format, "csv or json");
  add_integration_flags(gs_cmd, gs.cfg);

  SynthArgs sy;
  auto* sy_cmd = app.add_subcommand("synth", "Generate a synthetic ensemble dataset");
  sy_cmd->add_option("--generator", sy.generator, "dirichlet or near-consensus");
  sy_cmd->add_option("--samples", sy.samples, "N");
  sy_cmd->add_option("--models", sy.models, "k");
  sy_cmd->add_option("--classes", sy.classes, "L");
  sy_cmd->add_option("--ensembles", sy.ensembles, "E");
  sy_cmd->add_option("--alpha", sy.alpha, "Dirichlet concentration (dirichlet)");
  sy_cmd->add_option("--accuracy", sy.accuracy, "Mass on the true class");
  sy_cmd->add_option("--sigma", sy.sigma, "Log-probability noise (near-consensus)");
  sy_cmd->add_option("--seed", sy.seed, "Seed");
  sy_cmd->add_option("--out-dir", sy.out_dir, "Output directory")->required();

  std::string which;
  auto* ce_cmd = app.add_subcommand("counterexample", "Print a wisdom-of-crowds failure fixture");
  ce_cmd->add_option("which", which, "min, max, gaussian-neg or gaussian-gt1")->required();

  ZcheckArgs zc;
  auto* zc_cmd = app.add_subcommand("zcheck", "Compare closed-form and numeric log Z for 1D experts");
  zc_cmd->add_option("--experts", zc.experts, "Experts as mean:std;mean:std;...")->required();
  zc_cmd->add_option("--order", zc.order, "Order r")->required();
  zc_cmd->add_option("--tolerance", zc.tolerance, "Maximum allowed |closed - numeric|");
  zc_cmd->add_option("--seed", zc.cfg.seed, "Seed for importance sampling");
  add_integration_flags(zc_cmd, zc.cfg);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "genmean: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (agg_cmd->parsed()) return cmd_aggregate(agg, out, err);
    if (sw_cmd->parsed()) return cmd_sweep(sw, out, err);
    if (gs_cmd->parsed()) return cmd_gaussian_sweep(gs, out, err);
    if (sy_cmd->parsed()) return cmd_synth(sy, out, err);
    if (ce_cmd->parsed()) return cmd_counterexample(which, out, err);
    if (zc_cmd->parsed()) return cmd_zcheck(zc, out, err);
  } catch (const NumericalError& e) {
    err << "genmean: numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const AccuracyError& e) {
    err << "genmean: accuracy error: " << e.what() << " (best estimate " << format_12g(e.best_estimate()) << ")\n";
    return kNumericalError;
  } catch (const Error& e) {
    err << "genmean: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "genmean: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace genmean::cli
