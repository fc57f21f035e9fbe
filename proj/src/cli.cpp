#include "localfactor/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>

#include <CLI11.hpp>

#include "localfactor/coupling.hpp"
#include "localfactor/graph.hpp"
#include "localfactor/moments.hpp"
#include "localfactor/parallel.hpp"
#include "localfactor/report.hpp"
#include "localfactor/rng.hpp"
#include "localfactor/rules.hpp"

namespace localfactor {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void maybe_write_report(const std::string& json_path, Report report,
                        std::chrono::steady_clock::time_point start) {
  if (json_path.empty()) return;
  const auto elapsed = std::chrono::steady_clock::now() - start;
  report.wall_time_ms = std::chrono::duration<double, std::milli>(elapsed).count();
  write_text(json_path, report.to_json().dump(2) + "\n");
}

Model parse_model(const std::string& name) {
  if (name == "er") return Model::Er;
  if (name == "reg") return Model::Reg;
  throw std::invalid_argument("model must be reg or er");
}

std::vector<double> linspace01(unsigned points) {
  if (points < 2) throw std::invalid_argument("p grid needs at least 2 points");
  std::vector<double> grid(points);
  for (unsigned i = 0; i < points; ++i)
    grid[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

struct DemoRow {
  double p = 0;
  double overlap_mean = 0;   // |I ∩ J| / n averaged over seeds
  double overlap_se = 0;
  double mean_size_x = 0;
  double mean_size_y = 0;
  bool inside_window = false;
};

json window_to_json(const Window& w) {
  json j{{"model", model_name(w.model)},
         {"d", w.d},
         {"beta", w.beta},
         {"theoretical_bound", w.theoretical_bound},
         {"empty_by_theory", w.empty_by_theory}};
  if (w.zhat_max)
    j["zhat_max"] = *w.zhat_max;
  else
    j["zhat_max"] = nullptr;
  return j;
}

int run_demo(const LocalRule& rule, Vertex n, Vertex d, unsigned p_points, std::uint64_t trials,
             unsigned seeds, std::uint64_t seed, unsigned threads, const std::string& out_path,
             const std::string& json_path) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> grid = linspace01(p_points);
  const double log_d = std::log(static_cast<double>(d));

  const bool tree_ok = tree_size(d, rule.radius + 1, 1ull << 24) != 0;
  std::optional<DensityEstimate> density;
  std::optional<GammaCurve> curve;
  if (tree_ok) {
    density = estimate_density(rule, d, trials, seed, threads);
    curve = gamma_sweep(rule, d, grid, trials, seed, threads);
  }

  std::vector<DemoRow> rows(grid.size());
  double sum_sizes = 0;
  for (std::size_t pi = 0; pi < grid.size(); ++pi) {
    DemoRow& row = rows[pi];
    row.p = grid[pi];
    std::vector<double> densities(seeds);
    for (unsigned j = 0; j < seeds; ++j) {
      const std::uint64_t exp_seed = derive_stream(derive_stream(seed, 1000 + pi), j);
      const OverlapResult r = overlap_experiment(rule, n, d, grid[pi], exp_seed);
      densities[j] = static_cast<double>(r.intersection) / n;
      row.overlap_mean += densities[j];
      row.mean_size_x += static_cast<double>(r.size_x) / n;
      row.mean_size_y += static_cast<double>(r.size_y) / n;
    }
    row.overlap_mean /= seeds;
    row.mean_size_x /= seeds;
    row.mean_size_y /= seeds;
    sum_sizes += 0.5 * (row.mean_size_x + row.mean_size_y);
    double var = 0;
    for (double v : densities) var += (v - row.overlap_mean) * (v - row.overlap_mean);
    row.overlap_se = seeds > 1 ? std::sqrt(var / (seeds - 1) / seeds) : 0.0;
  }

  const double alpha_hat = density ? density->alpha_hat : sum_sizes / static_cast<double>(grid.size());
  const double alpha_se = density ? density->std_error : 0.0;
  const double beta_hat = alpha_hat * static_cast<double>(d) / log_d - 1.0;

  Window window;
  window.d = d;
  window.beta = beta_hat;
  window.model = Model::Reg;
  window.empty_by_theory = true;
  std::string window_note;
  if (beta_hat > 0.0 && beta_hat <= 1.0) {
    window = forbidden_window(d, beta_hat, Model::Reg);
    if (window.empty_by_theory)
      window_note = "measured density is below the clustering regime; window empty by theory";
  } else if (beta_hat <= 0.0) {
    window_note = "measured density is deep inside the allowed regime (beta_hat <= 0)";
  } else {
    window_note = "measured density exceeds the beta <= 1 regime; window not applicable";
  }

  bool any_inside = false;
  if (window.zhat_max) {
    const double lo = (1.0 - *window.zhat_max) * log_d / d;
    const double hi = (1.0 + *window.zhat_max) * log_d / d;
    for (auto& row : rows) {
      row.inside_window = row.overlap_mean >= lo && row.overlap_mean <= hi;
      any_inside = any_inside || row.inside_window;
    }
  }

  // Endpoint sanity: the p=0 and p=1 columns must reproduce alpha^2 and alpha.
  const auto close3 = [&](double value, double expect, double se) {
    return std::abs(value - expect) <= 3.0 * se + 1e-12;
  };
  const DemoRow& first = rows.front();
  const DemoRow& last = rows.back();
  const double se0 = std::sqrt(first.overlap_se * first.overlap_se +
                               4.0 * alpha_hat * alpha_hat * alpha_se * alpha_se) +
                     1.0 / n;
  const double se1 = std::sqrt(last.overlap_se * last.overlap_se + alpha_se * alpha_se) + 1.0 / n;
  const bool endpoint0_ok = close3(first.overlap_mean, alpha_hat * alpha_hat, se0);
  const bool endpoint1_ok = close3(last.overlap_mean, alpha_hat, se1);

  std::string csv =
      "p,tree_gamma,tree_se,graph_overlap_mean,graph_overlap_se,mean_size_x,mean_size_y,inside_window\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    csv += fmt_double(row.p) + ",";
    csv += curve ? fmt_double(curve->gamma_hat[i]) : std::string{};
    csv += ",";
    csv += curve ? fmt_double(curve->std_error[i]) : std::string{};
    csv += "," + fmt_double(row.overlap_mean) + "," + fmt_double(row.overlap_se) + "," +
           fmt_double(row.mean_size_x) + "," + fmt_double(row.mean_size_y) + "," +
           (row.inside_window ? "1" : "0") + "\n";
  }
  write_text(out_path, csv);

  Report report;
  report.subcommand = "demo";
  report.config = json{{"rule", rule.serialize()}, {"n", n},         {"d", d},
                       {"p_points", p_points},     {"trials", trials}, {"seeds", seeds},
                       {"seed", seed},             {"threads", threads}};
  json row_json = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    json r{{"p", rows[i].p},
           {"graph_overlap_mean", rows[i].overlap_mean},
           {"graph_overlap_se", rows[i].overlap_se},
           {"mean_size_x", rows[i].mean_size_x},
           {"mean_size_y", rows[i].mean_size_y},
           {"inside_window", rows[i].inside_window}};
    if (curve) {
      r["tree_gamma"] = curve->gamma_hat[i];
      r["tree_se"] = curve->std_error[i];
    }
    row_json.push_back(r);
  }
  report.results = json{{"alpha_hat", alpha_hat},
                        {"alpha_se", alpha_se},
                        {"alpha_from_tree", tree_ok},
                        {"beta_hat", beta_hat},
                        {"window", window_to_json(window)},
                        {"window_note", window_note},
                        {"rows", row_json},
                        {"checks",
                         json{{"endpoint_p0_matches_alpha_sq", endpoint0_ok},
                              {"endpoint_p1_matches_alpha", endpoint1_ok},
                              {"no_overlap_inside_window", !any_inside}}}};
  maybe_write_report(json_path, report, start);

  std::cerr << "alpha_hat=" << fmt_double(alpha_hat) << " beta_hat=" << fmt_double(beta_hat)
            << (window.zhat_max ? " zhat_max=" + fmt_double(*window.zhat_max)
                                : std::string(" window=empty"))
            << (window_note.empty() ? "" : " note: " + window_note) << "\n";
  if (any_inside) {
    std::cerr << "error: overlap density entered the forbidden window\n";
    return 3;
  }
  if (!endpoint0_ok || !endpoint1_ok) {
    std::cerr << "error: demo endpoint check failed (p=0 vs alpha^2, p=1 vs alpha)\n";
    return 3;
  }
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"r-local independence rules on random graphs: simulation, coupling, and "
               "first-moment overlap diagnostics"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a graph and write the edge-list format");
  std::string gen_model;
  std::uint64_t gen_n = 0;
  double gen_d = 0;
  std::uint64_t gen_seed = 0;
  bool gen_defect_free = false;
  std::string gen_out, gen_json;
  gen->add_option("--model", gen_model, "reg or er")->required();
  gen->add_option("--n", gen_n, "vertex count")->required();
  gen->add_option("--d", gen_d, "degree (integer for reg, real for er)")->required();
  gen->add_option("--seed", gen_seed, "RNG seed")->required();
  gen->add_flag("--defect-free", gen_defect_free, "resample until no loops or parallel edges (reg)");
  gen->add_option("--out", gen_out, "output path (default stdout)");
  gen->add_option("--json", gen_json, "write a JSON run report");

  // density
  auto* density = app.add_subcommand("density", "Monte Carlo rule density on the canonical tree");
  std::string density_rule = "rule=local-min;r=1;params=";
  std::uint64_t density_d = 0, density_trials = 0, density_seed = 0;
  unsigned density_threads = 0;
  std::string density_json;
  density->add_option("--rule", density_rule, "rule descriptor");
  density->add_option("--d", density_d, "degree")->required();
  density->add_option("--trials", density_trials, "Monte Carlo trials")->required();
  density->add_option("--seed", density_seed, "RNG seed")->required();
  density->add_option("--threads", density_threads, "worker threads (0 = all cores)");
  density->add_option("--json", density_json, "write a JSON run report");

  // gamma
  auto* gamma = app.add_subcommand("gamma", "joint root-selection probability under coupling");
  std::string gamma_rule = "rule=local-min;r=1;params=";
  std::uint64_t gamma_d = 0, gamma_trials = 0, gamma_seed = 0;
  double gamma_p = 0;
  unsigned gamma_threads = 0;
  std::string gamma_json;
  gamma->add_option("--rule", gamma_rule, "rule descriptor");
  gamma->add_option("--d", gamma_d, "degree")->required();
  gamma->add_option("--p", gamma_p, "coupling parameter in [0,1]")->required();
  gamma->add_option("--trials", gamma_trials, "Monte Carlo trials")->required();
  gamma->add_option("--seed", gamma_seed, "RNG seed")->required();
  gamma->add_option("--threads", gamma_threads, "worker threads (0 = all cores)");
  gamma->add_option("--json", gamma_json, "write a JSON run report");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "gamma curve over a p grid (CSV)");
  std::string sweep_rule = "rule=local-min;r=1;params=";
  std::uint64_t sweep_d = 0, sweep_trials = 0, sweep_seed = 0;
  unsigned sweep_points = 21, sweep_threads = 0;
  std::string sweep_out, sweep_json;
  sweep->add_option("--rule", sweep_rule, "rule descriptor");
  sweep->add_option("--d", sweep_d, "degree")->required();
  sweep->add_option("--p-points", sweep_points, "evenly spaced grid points in [0,1]");
  sweep->add_option("--trials", sweep_trials, "Monte Carlo trials")->required();
  sweep->add_option("--seed", sweep_seed, "RNG seed")->required();
  sweep->add_option("--threads", sweep_threads, "worker threads (0 = all cores)");
  sweep->add_option("--out", sweep_out, "output path (default stdout)");
  sweep->add_option("--json", sweep_json, "write a JSON run report");

  // couple
  auto* couple = app.add_subcommand("couple", "coupled overlap experiments on regular graphs (CSV)");
  std::string couple_rule = "rule=local-min;r=1;params=";
  std::uint64_t couple_n = 0, couple_d = 0, couple_seed = 0;
  double couple_p = 0;
  unsigned couple_count = 1;
  std::string couple_out, couple_json;
  couple->add_option("--rule", couple_rule, "rule descriptor");
  couple->add_option("--n", couple_n, "vertex count")->required();
  couple->add_option("--d", couple_d, "degree")->required();
  couple->add_option("--p", couple_p, "coupling parameter in [0,1]")->required();
  couple->add_option("--experiments", couple_count, "number of independent experiments");
  couple->add_option("--seed", couple_seed, "RNG seed")->required();
  couple->add_option("--out", couple_out, "output path (default stdout)");
  couple->add_option("--json", couple_json, "write a JSON run report");

  // moments
  auto* moments = app.add_subcommand("moments", "exact log first-moment overlap values (CSV)");
  std::string moments_model;
  std::int64_t moments_n = 0, moments_m = 0, moments_k = 0, moments_l = -1;
  double moments_d = 0;
  std::string moments_out;
  moments->add_option("--model", moments_model, "reg or er")->required();
  moments->add_option("--n", moments_n, "vertex count")->required();
  moments->add_option("--d", moments_d, "degree")->required();
  moments->add_option("--m", moments_m, "set size")->required();
  moments->add_option("--k", moments_k, "intersection size")->required();
  moments->add_option("--l", moments_l, "cross-edge count (reg; default: all feasible plus total)");
  moments->add_option("--out", moments_out, "output path (default stdout)");

  // rate
  auto* rate = app.add_subcommand("rate", "rate function scan over zhat (CSV)");
  std::string rate_model;
  std::int64_t rate_d = 0;
  double rate_beta = 0;
  unsigned rate_half_points = 1000;
  std::string rate_out;
  rate->add_option("--model", rate_model, "reg or er")->required();
  rate->add_option("--d", rate_d, "degree")->required();
  rate->add_option("--beta", rate_beta, "set-density parameter in (0,1]")->required();
  rate->add_option("--half-points", rate_half_points, "grid half-width (2h+1 points)");
  rate->add_option("--out", rate_out, "output path (default stdout)");

  // window
  auto* window = app.add_subcommand("window", "forbidden overlap window (CSV)");
  std::string window_model;
  std::int64_t window_d = 0;
  double window_beta = 0;
  unsigned window_half_points = 1000;
  std::string window_out, window_json;
  window->add_option("--model", window_model, "reg or er")->required();
  window->add_option("--d", window_d, "degree")->required();
  window->add_option("--beta", window_beta, "set-density parameter in (0,1]")->required();
  window->add_option("--half-points", window_half_points, "grid half-width (2h+1 points)");
  window->add_option("--out", window_out, "output path (default stdout)");
  window->add_option("--json", window_json, "write a JSON run report");

  // mind
  auto* mind = app.add_subcommand("mind", "smallest d whose window reaches a target zhat");
  std::string mind_model;
  double mind_beta = 0, mind_target = 0;
  std::int64_t mind_ceiling = std::int64_t{1} << 40;
  std::string mind_json;
  mind->add_option("--model", mind_model, "reg or er")->required();
  mind->add_option("--beta", mind_beta, "set-density parameter in (1/sqrt(2),1]")->required();
  mind->add_option("--zhat-target", mind_target, "window half-width to reach")->required();
  mind->add_option("--d-ceiling", mind_ceiling, "give up above this d");
  mind->add_option("--json", mind_json, "write a JSON run report");

  // demo
  auto* demo = app.add_subcommand("demo", "end-to-end clustering consistency experiment");
  std::string demo_rule = "rule=local-min;r=1;params=";
  std::uint64_t demo_n = 0, demo_d = 0, demo_trials = 100000, demo_seed = 0;
  unsigned demo_points = 11, demo_seeds = 10, demo_threads = 0;
  std::string demo_out, demo_json;
  demo->add_option("--rule", demo_rule, "rule descriptor");
  demo->add_option("--n", demo_n, "graph vertex count")->required();
  demo->add_option("--d", demo_d, "degree")->required();
  demo->add_option("--p-points", demo_points, "evenly spaced p grid points");
  demo->add_option("--trials", demo_trials, "tree Monte Carlo trials");
  demo->add_option("--seeds", demo_seeds, "graph experiments per grid point");
  demo->add_option("--seed", demo_seed, "RNG seed")->required();
  demo->add_option("--threads", demo_threads, "worker threads (0 = all cores)");
  demo->add_option("--out", demo_out, "CSV output path (default stdout)");
  demo->add_option("--json", demo_json, "write a JSON run report");

  std::vector<const char*> argv;
  argv.push_back("localfactor");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    if (gen->parsed()) {
      const Model model = parse_model(gen_model);
      if (gen_n > 0xFFFFFFFFull) throw std::invalid_argument("n too large");
      const auto n = static_cast<Vertex>(gen_n);
      Graph g;
      GraphFileMeta meta;
      meta.model = gen_model;
      meta.d = gen_d;
      meta.seed = gen_seed;
      if (model == Model::Reg) {
        const auto di = static_cast<std::uint64_t>(gen_d);
        if (static_cast<double>(di) != gen_d || di < 1)
          throw std::invalid_argument("reg model needs integer d >= 1");
        const RegularSample sample =
            gen_defect_free ? generate_regular_defect_free(n, static_cast<Vertex>(di), gen_seed)
                            : generate_regular(n, static_cast<Vertex>(di), gen_seed);
        meta.loops = sample.loop_count;
        meta.multi = sample.multi_edge_count;
        g = sample.graph;
      } else {
        if (gen_defect_free) throw std::invalid_argument("--defect-free applies to the reg model");
        g = generate_er(n, gen_d, gen_seed);
      }
      write_text(gen_out, format_edge_list(g, meta));
      Report report;
      report.subcommand = "gen";
      report.config = json{{"model", gen_model}, {"n", gen_n},   {"d", gen_d},
                           {"seed", gen_seed},   {"defect_free", gen_defect_free}};
      report.results = json{{"edge_count", g.edge_count()}, {"loops", meta.loops},
                            {"multi", meta.multi}};
      maybe_write_report(gen_json, report, start);
      return 0;
    }

    if (density->parsed()) {
      const LocalRule rule = LocalRule::parse(density_rule);
      const DensityEstimate est = estimate_density(rule, static_cast<Vertex>(density_d),
                                                   density_trials, density_seed, density_threads);
      std::cout << "alpha_hat=" << fmt_double(est.alpha_hat)
                << " std_error=" << fmt_double(est.std_error) << " trials=" << est.trials << "\n";
      Report report;
      report.subcommand = "density";
      report.config = json{{"rule", density_rule}, {"d", density_d},
                           {"trials", density_trials}, {"seed", density_seed},
                           {"threads", density_threads}};
      report.results = json{{"alpha_hat", est.alpha_hat}, {"std_error", est.std_error}};
      maybe_write_report(density_json, report, start);
      return 0;
    }

    if (gamma->parsed()) {
      const LocalRule rule = LocalRule::parse(gamma_rule);
      const GammaEstimate est = estimate_gamma(rule, static_cast<Vertex>(gamma_d), gamma_p,
                                               gamma_trials, gamma_seed, gamma_threads);
      std::cout << "gamma_hat=" << fmt_double(est.gamma_hat)
                << " std_error=" << fmt_double(est.std_error) << " trials=" << est.trials << "\n";
      Report report;
      report.subcommand = "gamma";
      report.config = json{{"rule", gamma_rule}, {"d", gamma_d},   {"p", gamma_p},
                           {"trials", gamma_trials}, {"seed", gamma_seed},
                           {"threads", gamma_threads}};
      report.results = json{{"gamma_hat", est.gamma_hat}, {"std_error", est.std_error}};
      maybe_write_report(gamma_json, report, start);
      return 0;
    }

    if (sweep->parsed()) {
      const LocalRule rule = LocalRule::parse(sweep_rule);
      const GammaCurve curve = gamma_sweep(rule, static_cast<Vertex>(sweep_d),
                                           linspace01(sweep_points), sweep_trials, sweep_seed,
                                           sweep_threads);
      write_text(sweep_out, gamma_curve_csv(curve));
      Report report;
      report.subcommand = "sweep";
      report.config = json{{"rule", sweep_rule},     {"d", sweep_d},
                           {"p_points", sweep_points}, {"trials", sweep_trials},
                           {"seed", sweep_seed},      {"threads", sweep_threads}};
      report.results = json{{"gamma_hat", curve.gamma_hat}, {"std_error", curve.std_error}};
      maybe_write_report(sweep_json, report, start);
      return 0;
    }

    if (couple->parsed()) {
      const LocalRule rule = LocalRule::parse(couple_rule);
      const auto n = static_cast<Vertex>(couple_n);
      std::string csv = "experiment,p,intersection,size_x,size_y,overlap_density,n,d,rule,seed\n";
      json results = json::array();
      for (unsigned i = 0; i < couple_count; ++i) {
        const std::uint64_t exp_seed = couple_count == 1 ? couple_seed : derive_stream(couple_seed, i);
        const OverlapResult r =
            overlap_experiment(rule, n, static_cast<Vertex>(couple_d), couple_p, exp_seed);
        csv += std::to_string(i) + "," + fmt_double(couple_p) + "," +
               std::to_string(r.intersection) + "," + std::to_string(r.size_x) + "," +
               std::to_string(r.size_y) + "," +
               fmt_double(static_cast<double>(r.intersection) / n) + "," + std::to_string(n) +
               "," + std::to_string(couple_d) + ",\"" + rule.serialize() + "\"," +
               std::to_string(exp_seed) + "\n";
        results.push_back(json{{"experiment", i},
                               {"intersection", r.intersection},
                               {"size_x", r.size_x},
                               {"size_y", r.size_y}});
      }
      write_text(couple_out, csv);
      Report report;
      report.subcommand = "couple";
      report.config = json{{"rule", couple_rule}, {"n", couple_n}, {"d", couple_d},
                           {"p", couple_p},       {"experiments", couple_count},
                           {"seed", couple_seed}};
      report.results = json{{"experiments", results}};
      maybe_write_report(couple_json, report, start);
      return 0;
    }

    if (moments->parsed()) {
      const Model model = parse_model(moments_model);
      std::string csv = moments_csv_header();
      if (model == Model::Er) {
        OverlapQuery q;
        q.n = moments_n;
        q.d = moments_d;
        q.m = moments_m;
        q.k = moments_k;
        csv += moments_csv_row(model, log_expected_overlap_er(q));
      } else {
        const auto di = static_cast<std::int64_t>(moments_d);
        if (static_cast<double>(di) != moments_d)
          throw std::invalid_argument("reg model needs integer d");
        if (moments_l >= 0) {
          OverlapQuery q;
          q.n = moments_n;
          q.d = moments_d;
          q.m = moments_m;
          q.k = moments_k;
          q.l = moments_l;
          csv += moments_csv_row(model, log_expected_overlap_reg(q));
        } else {
          const std::int64_t r = 2 * moments_m - moments_k;
          const std::int64_t lo = std::max<std::int64_t>(0, r * di - moments_n * di / 2);
          const std::int64_t hi = std::min(di * (moments_m - moments_k), r * di / 2);
          for (std::int64_t l = lo; l <= hi; ++l) {
            OverlapQuery q;
            q.n = moments_n;
            q.d = moments_d;
            q.m = moments_m;
            q.k = moments_k;
            q.l = l;
            csv += moments_csv_row(model, log_expected_overlap_reg(q));
          }
          csv += moments_csv_row(
              model, log_expected_overlap_reg_total(moments_n, di, moments_m, moments_k));
        }
      }
      write_text(moments_out, csv);
      return 0;
    }

    if (rate->parsed()) {
      const Model model = parse_model(rate_model);
      const double scale = std::log(static_cast<double>(rate_d)) / static_cast<double>(rate_d);
      const double s = (1.0 + rate_beta) * scale;
      const double z_cap = std::min(rate_beta, 1.0) * (1.0 - 1e-12);
      std::string csv = rate_csv_header();
      const auto half = static_cast<std::int64_t>(rate_half_points);
      for (std::int64_t k = -half; k <= half; ++k) {
        const double zhat = static_cast<double>(k) * z_cap / static_cast<double>(half);
        const double x = (1.0 + zhat) * scale;
        RatePoint pt;
        if (1.0 - 2.0 * s + x > 0.0) {
          pt = model == Model::Er ? rate_er(s, x, rate_d) : max_rate_reg_over_y(s, x, rate_d);
        } else {
          pt.d = rate_d;
          pt.s = s;
          pt.x = x;
          pt.value = -std::numeric_limits<double>::infinity();
        }
        csv += rate_csv_row(model, rate_d, rate_beta, zhat, pt);
      }
      write_text(rate_out, csv);
      return 0;
    }

    if (window->parsed()) {
      const Model model = parse_model(window_model);
      WindowOptions opts;
      opts.half_points = window_half_points;
      const Window w = forbidden_window(window_d, window_beta, model, opts);
      write_text(window_out, window_csv_header() + window_csv_row(w));
      Report report;
      report.subcommand = "window";
      report.config = json{{"model", window_model}, {"d", window_d}, {"beta", window_beta},
                           {"half_points", window_half_points}};
      report.results = window_to_json(w);
      maybe_write_report(window_json, report, start);
      return 0;
    }

    if (mind->parsed()) {
      const Model model = parse_model(mind_model);
      const std::int64_t d = min_d_for_window(mind_beta, mind_target, model, mind_ceiling);
      std::cout << "d=" << d << "\n";
      Report report;
      report.subcommand = "mind";
      report.config = json{{"model", mind_model}, {"beta", mind_beta},
                           {"zhat_target", mind_target}, {"d_ceiling", mind_ceiling}};
      report.results = json{{"d", d}};
      maybe_write_report(mind_json, report, start);
      return 0;
    }

    if (demo->parsed()) {
      const LocalRule rule = LocalRule::parse(demo_rule);
      return run_demo(rule, static_cast<Vertex>(demo_n), static_cast<Vertex>(demo_d), demo_points,
                      demo_trials, demo_seeds, demo_seed, demo_threads, demo_out, demo_json);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}

}  // namespace localfactor
