// Batch front end: fda <command> [options]. See README.md for examples.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fda/fda.hpp"
#include "fda/io.hpp"
#include "plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fda::cli {

namespace {

struct Options {
  std::string input;
  std::string coefficients;
  std::string out = ".";
  bool plot = false;
  unsigned threads = 0;
  std::uint64_t seed = 0;

  std::string basis = "bspline";
  std::string sim_basis = "fourier";
  int k = 0;
  int order = 4;
  std::string domain;
  double ridge = 0.0;

  int p = 0;  // 0: 95% variance rule
  int grid_points = 101;

  std::string response;
  std::string response_column;
  std::string covariates;
  std::string link = "identity";

  int g_min = 2;
  int g_max = 6;
  int restarts = 10;
  int max_iter = 100;

  std::string coords;
  double max_fraction = 0.5;
  int n_perm = 999;

  int n = 100;
  std::string eigenvalues;
  std::string mean;
  double noise_sd = 0.0;
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError(flag + ": '" + item + "' is not a number");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

Domain parse_domain(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ArgumentError("--domain must look like lo:hi, got '" + text + "'");
  const auto lo = parse_list(text.substr(0, colon), "--domain");
  const auto hi = parse_list(text.substr(colon + 1), "--domain");
  if (lo.size() != 1 || hi.size() != 1 || !(lo[0] < hi[0])) throw ArgumentError("--domain needs lo < hi, got '" + text + "'");
  return {lo[0], hi[0]};
}

BasisSystem make_basis(const Options& o, Domain domain) {
  if (o.k <= 0) throw ArgumentError("--k (number of basis functions) is required");
  switch (basis_kind_from_string(o.basis)) {
    case BasisKind::Fourier: return BasisSystem::fourier(o.k, domain);
    case BasisKind::BSpline: return BasisSystem::bspline(o.k, o.order, domain);
  }
  throw ArgumentError("unknown basis");
}

json basis_parameters(const Options& o) {
  json j = {{"basis", o.basis}, {"k", o.k}, {"domain", o.domain.empty() ? "data range" : o.domain}, {"ridge", o.ridge}};
  if (o.basis == "bspline") j["order"] = o.order;
  return j;
}

/// Dataset from --coefficients, or raw curves from --input smoothed with the basis flags.
FunctionalDataSet load_dataset(const Options& o, json& params) {
  if (!o.coefficients.empty()) {
    params["coefficients"] = o.coefficients;
    return io::read_coefficients(o.coefficients);
  }
  if (o.input.empty()) throw ArgumentError("give either --input (raw curves) or --coefficients");
  const auto curves = io::ingest_curves(o.input);
  Domain domain{0.0, 1.0};
  if (!o.domain.empty()) {
    domain = parse_domain(o.domain);
  } else {
    double lo = curves.front().times.front(), hi = curves.front().times.back();
    for (const auto& c : curves) {
      lo = std::min(lo, c.times.front());
      hi = std::max(hi, c.times.back());
    }
    if (!(lo < hi)) throw DataError("all observation times are equal; pass --domain");
    domain = {lo, hi};
  }
  params["input"] = o.input;
  params.update(basis_parameters(o));
  return build_dataset(curves, make_basis(o, domain), o.ridge, o.threads);
}

std::ofstream open_output(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  const auto path = fs::path(o.out) / name;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

void write_json(const Options& o, const std::string& name, const json& j) {
  auto out = open_output(o, name);
  out << j.dump(2) << '\n';
}

std::vector<double> plot_grid(const BasisSystem& basis) { return EvalGrid::uniform(basis.domain(), 201).points(); }

void plot_curves(const Options& o, const FunctionalDataSet& ds, const std::string& title, std::vector<int> labels = {},
                 std::vector<std::pair<int, std::string>> legend = {}) {
  if (!o.plot) return;
  fs::create_directories(o.out);
  CurvePlot plot{title, plot_grid(ds.basis()), {}, std::move(labels), std::move(legend)};
  plot.values = eval_curves(ds, EvalGrid(plot.t));
  write_svg(fs::path(o.out) / "curves.svg", plot);
}

io::Provenance provenance(const std::string& command, const json& params, std::uint64_t seed) {
  return {command, params, seed};
}

int run_smooth(const Options& o) {
  json params = json::object();
  const auto ds = load_dataset(o, params);
  auto out = open_output(o, "coefficients.csv");
  io::write_coefficients(out, ds, provenance("smooth", params, o.seed));
  plot_curves(o, ds, "Smoothed curves (n = " + std::to_string(ds.size()) + ")");
  return 0;
}

int run_fpca(const Options& o) {
  json params = json::object();
  const auto ds = load_dataset(o, params);
  params["p"] = o.p > 0 ? json(o.p) : json("95% variance");
  params["grid_points"] = o.grid_points;
  const auto result = fpca(ds, o.p > 0 ? std::optional<int>(o.p) : std::nullopt);
  const auto prov = provenance("fpca", params, o.seed);

  const VectorXd total = result.all_eigenvalues;
  const double sum = total.sum();
  {
    auto out = open_output(o, "eigenvalues.csv");
    io::write_provenance_comments(out, prov);
    out << "component,eigenvalue,explained_variance,cumulative_variance,retained\n";
    double cumulative = 0.0;
    for (Eigen::Index j = 0; j < total.size(); ++j) {
      const double ratio = sum > 0.0 ? total[j] / sum : 0.0;
      cumulative += ratio;
      out << j + 1 << ',' << io::format_double(total[j]) << ',' << io::format_double(ratio) << ','
          << io::format_double(cumulative) << ',' << (j < result.components() ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open_output(o, "scores.csv");
    io::write_provenance_comments(out, prov);
    out << "id";
    for (int j = 1; j <= result.components(); ++j) out << ",score_" << j;
    out << '\n';
    for (Eigen::Index i = 0; i < ds.size(); ++i) {
      out << ds.ids()[static_cast<std::size_t>(i)];
      for (int j = 0; j < result.components(); ++j) out << ',' << io::format_double(result.scores(i, j));
      out << '\n';
    }
  }
  {
    const auto grid = EvalGrid::uniform(ds.basis().domain(), o.grid_points);
    const VectorXd mu = result.mean.evaluate(grid);
    const MatrixXd f = result.eigenfunctions(grid);
    auto out = open_output(o, "eigenfunctions.csv");
    io::write_provenance_comments(out, prov);
    out << "t,mean";
    for (int j = 1; j <= result.components(); ++j) out << ",f_" << j;
    out << '\n';
    for (std::size_t l = 0; l < grid.size(); ++l) {
      const auto row = static_cast<Eigen::Index>(l);
      out << io::format_double(grid.points()[l]) << ',' << io::format_double(mu[row]);
      for (int j = 0; j < result.components(); ++j) out << ',' << io::format_double(f(row, j));
      out << '\n';
    }
  }
  plot_curves(o, ds, "Curves (FPCA, P = " + std::to_string(result.components()) + ")");
  return 0;
}

int run_regress(const Options& o) {
  json params = json::object();
  const auto ds = load_dataset(o, params);
  const Link link = link_from_string(o.link);
  params["response"] = o.response;
  params["link"] = o.link;
  params["p"] = o.p > 0 ? json(o.p) : json("95% variance");

  const auto response_table = io::read_keyed_table(o.response);
  std::size_t column = 0;
  if (!o.response_column.empty()) {
    const auto it = std::find(response_table.columns.begin(), response_table.columns.end(), o.response_column);
    if (it == response_table.columns.end()) throw DataError("response file has no column '" + o.response_column + "'");
    column = static_cast<std::size_t>(it - response_table.columns.begin());
  }
  params["response_column"] = response_table.columns[column];
  const VectorXd y = response_table.matrix_for(ds.ids()).col(static_cast<Eigen::Index>(column));

  std::optional<MatrixXd> z;
  std::vector<std::string> covariate_names;
  if (!o.covariates.empty()) {
    const auto table = io::read_keyed_table(o.covariates);
    z = table.matrix_for(ds.ids());
    covariate_names = table.columns;
    params["covariates"] = o.covariates;
  }

  const auto fit = fit_gflm(ds, z, y, o.p > 0 ? std::optional<int>(o.p) : std::nullopt, link);
  const auto grid = EvalGrid::uniform(ds.basis().domain(), o.grid_points);
  const VectorXd beta = beta_function(fit, grid);

  json theta = json::object();
  json se = {{"alpha", fit.std_errors[0]}};
  for (std::size_t j = 0; j < covariate_names.size(); ++j) {
    theta[covariate_names[j]] = fit.theta[static_cast<Eigen::Index>(j)];
    se[covariate_names[j]] = fit.std_errors[static_cast<Eigen::Index>(1 + j)];
  }
  json d = json::array(), se_d = json::array();
  for (Eigen::Index j = 0; j < fit.d_coeffs.size(); ++j) {
    d.push_back(fit.d_coeffs[j]);
    se_d.push_back(fit.std_errors[1 + fit.theta.size() + j]);
  }
  se["d"] = se_d;
  json out = {{"provenance", provenance("regress", params, o.seed).to_json()},
              {"n", ds.size()},
              {"p", fit.fpca.components()},
              {"link", to_string(fit.link)},
              {"alpha", fit.alpha},
              {"theta", theta},
              {"d", d},
              {"std_errors", se},
              {"dispersion", fit.dispersion},
              {"deviance", fit.deviance},
              {"iterations", fit.iterations},
              {"deviance_trace", fit.deviance_trace},
              {"beta", {{"t", grid.points()}, {"value", std::vector<double>(beta.data(), beta.data() + beta.size())}}}};
  write_json(o, "fit.json", out);

  const VectorXd eta = linear_predictor(fit, ds, z);
  const VectorXd mu = inverse_link(fit.link, eta);
  auto csv = open_output(o, "fitted.csv");
  io::write_provenance_comments(csv, provenance("regress", params, o.seed));
  csv << "id,response,linear_predictor,fitted\n";
  for (Eigen::Index i = 0; i < ds.size(); ++i)
    csv << ds.ids()[static_cast<std::size_t>(i)] << ',' << io::format_double(y[i]) << ',' << io::format_double(eta[i]) << ','
        << io::format_double(mu[i]) << '\n';
  plot_curves(o, ds, "Regression curves (" + to_string(fit.link) + " link)");
  return 0;
}

int run_cluster(const Options& o) {
  json params = json::object();
  const auto ds = load_dataset(o, params);
  params["g_min"] = o.g_min;
  params["g_max"] = o.g_max;
  params["restarts"] = o.restarts;
  params["max_iter"] = o.max_iter;
  const KMeansOptions km{.n_restarts = o.restarts, .max_iter = o.max_iter, .seed = o.seed, .threads = o.threads};

  std::vector<ClusterResult> results;
  int best = o.g_min;
  if (o.g_min == o.g_max) {
    results.push_back(fkmeans(ds, o.g_min, km));
  } else {
    auto selection = select_g(ds, o.g_min, o.g_max, km);
    best = selection.best_groups;
    results = std::move(selection.results);
  }
  const auto& chosen = results[static_cast<std::size_t>(best - o.g_min)];
  const auto prov = provenance("cluster", params, o.seed);
  {
    auto out = open_output(o, "assignments.csv");
    io::write_provenance_comments(out, prov);
    out << "id,cluster\n";
    for (std::size_t i = 0; i < chosen.assignments.size(); ++i) out << ds.ids()[i] << ',' << chosen.assignments[i] << '\n';
  }
  {
    auto out = open_output(o, "silhouette.csv");
    io::write_provenance_comments(out, prov);
    out << "groups,silhouette,inertia,iterations,selected\n";
    for (const auto& r : results)
      out << r.groups << ',' << (r.silhouette ? io::format_double(*r.silhouette) : std::string("NA")) << ','
          << io::format_double(r.inertia) << ',' << r.n_iter << ',' << (r.groups == best ? 1 : 0) << '\n';
  }
  std::vector<std::pair<int, std::string>> legend;
  for (int g = 1; g <= best; ++g) legend.emplace_back(g, "cluster " + std::to_string(g));
  plot_curves(o, ds, "Functional K-means, G = " + std::to_string(best), chosen.assignments, legend);
  return 0;
}

int run_scan(const Options& o) {
  json params = json::object();
  const auto ds = load_dataset(o, params);
  params["coords"] = o.coords;
  params["max_fraction"] = o.max_fraction;
  params["n_perm"] = o.n_perm;
  params["grid_points"] = o.grid_points;
  const SpatialFunctionalDataSet sds(ds, io::read_coordinates(o.coords, ds.ids()));
  const auto grid = EvalGrid::uniform(ds.basis().domain(), o.grid_points);
  const auto result =
      detect_cluster(sds, grid, {.max_fraction = o.max_fraction, .n_perm = o.n_perm, .seed = o.seed, .threads = o.threads});

  std::vector<std::string> members;
  for (int i : result.window) members.push_back(ds.ids()[static_cast<std::size_t>(i)]);
  const auto& c = sds.coords()[static_cast<std::size_t>(result.center_index)];
  json out = {{"provenance", provenance("scan", params, o.seed).to_json()},
              {"method", "max-t Welch scan over nearest-neighbour windows with permutation p-value"},
              {"window", members},
              {"center", ds.ids()[static_cast<std::size_t>(result.center_index)]},
              {"center_coords", {c.x, c.y}},
              {"radius", result.radius},
              {"statistic", result.statistic},
              {"p_value", result.p_value},
              {"n_perm", result.n_perm},
              {"seed", result.seed}};
  write_json(o, "scan.json", out);

  std::vector<int> labels(static_cast<std::size_t>(ds.size()), 1);
  for (int i : result.window) labels[static_cast<std::size_t>(i)] = 2;
  auto csv = open_output(o, "window.csv");
  io::write_provenance_comments(csv, provenance("scan", params, o.seed));
  csv << "id,x,y,inside\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    csv << ds.ids()[i] << ',' << io::format_double(sds.coords()[i].x) << ',' << io::format_double(sds.coords()[i].y) << ','
        << (labels[i] == 2 ? 1 : 0) << '\n';
  plot_curves(o, ds, "Most likely cluster (p = " + io::format_double(result.p_value) + ")", labels,
              {{1, "outside"}, {2, "inside"}});
  return 0;
}

int run_simulate(const Options& o) {
  if (o.eigenvalues.empty()) throw ArgumentError("--eigenvalues is required (e.g. 4,1,0.25)");
  const auto lambda = parse_list(o.eigenvalues, "--eigenvalues");
  Options basis_options = o;
  basis_options.basis = o.sim_basis;
  if (basis_options.k <= 0) {
    const auto j = static_cast<int>(lambda.size());
    basis_options.k = basis_options.basis == "fourier" ? (j % 2 == 1 ? j : j + 1) : std::max(j, basis_options.order);
  }
  const Domain domain = o.domain.empty() ? Domain{0.0, 1.0} : parse_domain(o.domain);
  const auto basis = make_basis(basis_options, domain);
  VectorXd mean = VectorXd::Zero(basis.size());
  if (!o.mean.empty()) {
    const auto m = parse_list(o.mean, "--mean");
    if (static_cast<int>(m.size()) != basis.size())
      throw ArgumentError("--mean needs " + std::to_string(basis.size()) + " coefficients for this basis");
    mean = Eigen::Map<const VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
  }
  const KlModel model{basis, mean, lambda, o.noise_sd};
  const auto grid = EvalGrid::uniform(domain, o.grid_points);
  const auto curves = simulate(model, o.n, grid, o.seed);

  json params = basis_parameters(basis_options);
  params["domain"] = json::array({domain.lo, domain.hi});
  params.erase("ridge");
  params["eigenvalues"] = lambda;
  params["mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
  params["noise_sd"] = o.noise_sd;
  params["n"] = o.n;
  params["grid_points"] = o.grid_points;
  auto out = open_output(o, "curves.csv");
  io::write_provenance_comments(out, provenance("simulate", params, o.seed));
  io::write_curves(out, curves);

  if (o.plot) {
    CurvePlot plot{"Simulated curves (n = " + std::to_string(o.n) + ")", grid.points(), MatrixXd(o.n, grid.size()), {}, {}};
    for (int i = 0; i < o.n; ++i)
      plot.values.row(i) = Eigen::Map<const RowVectorXd>(curves[static_cast<std::size_t>(i)].values.data(),
                                                          static_cast<Eigen::Index>(grid.size()));
    write_svg(fs::path(o.out) / "curves.svg", plot);
  }
  return 0;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--out", o.out, "Output directory (created if absent)")->capture_default_str();
  sub->add_flag("--plot", o.plot, "Also write curves.svg");
  sub->add_option("--threads", o.threads, "Worker threads, 0 = all cores; results do not depend on it")->capture_default_str();
}

void add_data(CLI::App* sub, Options& o) {
  auto* input = sub->add_option("--input", o.input, "Long-format curves CSV with header id,t,value")->check(CLI::ExistingFile);
  auto* coefficients =
      sub->add_option("--coefficients", o.coefficients, "coefficients.csv written by 'smooth'")->check(CLI::ExistingFile);
  input->excludes(coefficients);
  sub->add_option("--basis", o.basis, "bspline or fourier")->check(CLI::IsMember({"bspline", "fourier"}))->capture_default_str();
  sub->add_option("--k", o.k, "Number of basis functions");
  sub->add_option("--order", o.order, "B-spline order (4 = cubic)")->capture_default_str();
  sub->add_option("--domain", o.domain, "Basis domain lo:hi (default: range of the observation times)");
  sub->add_option("--ridge", o.ridge, "Ridge penalty for per-curve least squares")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Functional data analysis toolkit " + std::string(io::kToolkitVersion), "fda"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kToolkitVersion);

  auto* smooth = app.add_subcommand("smooth", "Fit basis coefficients to raw curves");
  add_data(smooth, o);
  add_common(smooth, o);

  auto* fpca_cmd = app.add_subcommand("fpca", "Functional principal components");
  add_data(fpca_cmd, o);
  add_common(fpca_cmd, o);
  fpca_cmd->add_option("--p", o.p, "Components to keep (default: fewest reaching 95% variance)");
  fpca_cmd->add_option("--grid-points", o.grid_points, "Points for eigenfunctions.csv")->capture_default_str();

  auto* regress = app.add_subcommand("regress", "Scalar-on-function regression on FPCA scores");
  add_data(regress, o);
  add_common(regress, o);
  regress->add_option("--response", o.response, "CSV id,<response> [,...]")->required()->check(CLI::ExistingFile);
  regress->add_option("--response-column", o.response_column, "Response column name (default: first after id)");
  regress->add_option("--covariates", o.covariates, "CSV id,z1,...,zd of scalar covariates")->check(CLI::ExistingFile);
  regress->add_option("--link", o.link, "identity, log or logit")
      ->check(CLI::IsMember({"identity", "log", "logit"}))
      ->capture_default_str();
  regress->add_option("--p", o.p, "Components to keep (default: fewest reaching 95% variance)");
  regress->add_option("--grid-points", o.grid_points, "Points for the beta(t) curve in fit.json")->capture_default_str();

  auto* cluster = app.add_subcommand("cluster", "Functional K-means with silhouette selection of G");
  add_data(cluster, o);
  add_common(cluster, o);
  cluster->add_option("--g-min", o.g_min, "Smallest number of clusters")->capture_default_str();
  cluster->add_option("--g-max", o.g_max, "Largest number of clusters")->capture_default_str();
  cluster->add_option("--restarts", o.restarts, "Random restarts per G")->capture_default_str();
  cluster->add_option("--max-iter", o.max_iter, "Lloyd iterations per restart")->capture_default_str();
  cluster->add_option("--seed", o.seed, "Random seed")->capture_default_str();

  auto* scan = app.add_subcommand("scan", "Spatial scan for a cluster of unusual curves");
  add_data(scan, o);
  add_common(scan, o);
  scan->add_option("--coords", o.coords, "CSV id,x,y")->required()->check(CLI::ExistingFile);
  scan->add_option("--max-fraction", o.max_fraction, "Largest window as a fraction of locations")->capture_default_str();
  scan->add_option("--n-perm", o.n_perm, "Permutation replicates (>= 19)")->capture_default_str();
  scan->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  scan->add_option("--grid-points", o.grid_points, "Time points the curves are compared on")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Simulate curves from a Karhunen-Loeve model");
  add_common(sim, o);
  sim->add_option("--eigenvalues", o.eigenvalues, "Comma-separated, nonincreasing")->required();
  sim->add_option("--n", o.n, "Number of curves")->capture_default_str();
  sim->add_option("--mean", o.mean, "Comma-separated mean coefficients in the basis (default zeros)");
  sim->add_option("--noise-sd", o.noise_sd, "Measurement noise standard deviation")->capture_default_str();
  sim->add_option("--grid-points", o.grid_points, "Observation times per curve")->capture_default_str();
  sim->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  sim->add_option("--basis", o.sim_basis, "Basis of the mean function")
      ->check(CLI::IsMember({"bspline", "fourier"}))
      ->capture_default_str();
  sim->add_option("--k", o.k, "Basis size (default: smallest fitting the eigenvalues)");
  sim->add_option("--order", o.order, "B-spline order")->capture_default_str();
  sim->add_option("--domain", o.domain, "Domain lo:hi")->default_str("0:1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "fda: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (o.grid_points < 2) throw ArgumentError("--grid-points must be at least 2");
    if (*smooth) return run_smooth(o);
    if (*fpca_cmd) return run_fpca(o);
    if (*regress) return run_regress(o);
    if (*cluster) return run_cluster(o);
    if (*scan) return run_scan(o);
    if (*sim) return run_simulate(o);
  } catch (const Error& e) {
    std::cerr << "fda " << app.get_subcommands().front()->get_name() << ": " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::Argument: return 2;
      case ErrorKind::Data: return 3;
      case ErrorKind::Numerical: return 4;
    }
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "fda: malformed JSON: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "fda: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace fda::cli

int main(int argc, char** argv) { return fda::cli::main(argc, argv); }
