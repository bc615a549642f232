#include "disclab/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "disclab/discrepancy.hpp"
#include "disclab/errors.hpp"
#include "disclab/gf2net.hpp"
#include "disclab/haar.hpp"
#include "disclab/io.hpp"
#include "disclab/norms.hpp"
#include "disclab/verify.hpp"

namespace disclab {

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = {{"command", command}, {"builtin", builtin}, {"matrix", matrix}, {"points", points},
                      {"out", out},         {"d", d},             {"n", n},           {"sigma", sigma},
                      {"seed", seed},       {"p_grid", p_grid},   {"format", format}, {"which", which},
                      {"n_range", n_range}, {"norm", norm},       {"window", window}, {"alpha", alpha},
                      {"samples", samples}, {"order_cap", order_cap}};
  j["t"] = t ? nlohmann::json(*t) : nlohmann::json(nullptr);
  j["max_level"] = max_level ? nlohmann::json(*max_level) : nlohmann::json(nullptr);
  j["budget"] = budget ? nlohmann::json(*budget) : nlohmann::json(nullptr);
  return j;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  auto to_int = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used != s.size()) throw DomainError("bad integer '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      throw DomainError("bad integer '" + s + "'");
    }
  };
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const int lo = to_int(text.substr(0, dots)), hi = to_int(text.substr(dots + 2));
    if (hi < lo) throw DomainError("empty range '" + text + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(to_int(item));
  if (out.empty()) throw DomainError("empty list");
  return out;
}

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Output {
  std::ostream& out;
  std::ostream& err;
};

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> names;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) names.push_back(item);
  return names;
}

std::string builtin_list() {
  std::string s;
  for (const auto& n : builtin_net_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

std::optional<DigitalNetSpec> net_spec(const RunConfig& cfg) {
  if (!cfg.matrix.empty()) return load_matrix_file(cfg.matrix);
  if (!cfg.builtin.empty()) {
    const auto names = builtin_net_names();
    if (std::find(names.begin(), names.end(), cfg.builtin) == names.end())
      throw UsageError("unknown builtin '" + cfg.builtin + "'; available: " + builtin_list());
    return builtin_net(cfg.builtin, cfg.d, cfg.n, cfg.sigma);
  }
  return std::nullopt;
}

PointSet input_points(const RunConfig& cfg) {
  if (!cfg.points.empty()) return load_point_set(cfg.points);
  if (auto spec = net_spec(cfg)) return digital_points(*spec);
  throw UsageError("need --points, --matrix or --builtin");
}

void write_text(const RunConfig& cfg, const std::string& path, const std::string& body) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << body;
  (void)cfg;
}

int cmd_gen(const RunConfig& cfg, Output io) {
  const auto spec = net_spec(cfg);
  if (!spec) throw UsageError("gen needs --builtin or --matrix");
  const PointSet ps = digital_points(*spec);
  std::ostringstream file;
  file << metadata_line(cfg.to_json()) << "\n";
  write_point_set(file, ps);

  nlohmann::json summary = {{"meta", metadata_json(cfg.to_json())},
                            {"N", ps.size()},
                            {"precision_bits", ps.precision_bits()}};
  try {
    summary["minimal_t"] = minimal_t(*spec, spec->sigma, {static_cast<std::uint64_t>(cfg.budget.value_or(1e8))});
  } catch (const ResourceError&) {
    summary["minimal_t"] = nullptr;
    summary["minimal_t_status"] = "budget exceeded";
  }
  if (cfg.out.empty()) {
    io.out << file.str();
    io.err << summary.dump() << "\n";
  } else {
    write_text(cfg, cfg.out, file.str());
    io.out << summary.dump(2) << "\n";
  }
  return kExitPass;
}

int cmd_verify(const RunConfig& cfg, Output io) {
  const auto spec = cfg.points.empty() ? net_spec(cfg) : std::nullopt;
  const PointSet ps = cfg.points.empty() ? (spec ? digital_points(*spec) : input_points(cfg)) : load_point_set(cfg.points);
  nlohmann::json v = {{"meta", metadata_json(cfg.to_json())}, {"N", ps.size()}, {"d", ps.dimension()}};
  bool pass = true, partial = false;
  std::optional<int> t_known;
  const int sigma = spec ? spec->sigma : 1;
  if (spec) {
    if (sigma < 1 || sigma * spec->n > spec->matrices.front().rows())
      throw UsageError("--sigma exceeds the order of the matrices");
    const NetCheckOptions opts{static_cast<std::uint64_t>(cfg.budget.value_or(1e8))};
    v["sigma"] = sigma;
    try {
      const int t = minimal_t(*spec, sigma, opts);
      v["minimal_t"] = t;
      t_known = t;
    } catch (const ResourceError&) {
      v["minimal_t"] = nullptr;
      partial = true;
    }
    if (cfg.t) {
      try {
        const bool ok = verify_net_order(*spec, sigma, *cfg.t, opts);
        v["declared_t"] = *cfg.t;
        v["declared_t_pass"] = ok;
        pass = pass && ok;
        if (ok && !t_known) t_known = cfg.t;
      } catch (const ResourceError&) {
        v["declared_t_pass"] = nullptr;
        partial = true;
      }
    }
  }

  // Boxes of order n hold at most 2^{ceil(t/sigma)} points.
  int n = 0;
  while ((std::size_t{1} << (n + 1)) <= ps.size()) ++n;
  if (spec) n = spec->n;
  nlohmann::json boxes = nlohmann::json::array();
  bool box_ok = true;
  const std::size_t box_limit = t_known ? (std::size_t{1} << ((*t_known + sigma - 1) / sigma)) : 0;
  for (const auto& j : enumerate_shapes(ps.dimension(), n)) {
    std::size_t most = 0;
    for (const auto& [m, count] : box_point_counts(ps, j)) most = std::max(most, count);
    boxes.push_back({{"j", j}, {"max_count", most}});
    if (t_known && most > box_limit) box_ok = false;
  }
  v["box_order"] = n;
  v["box_counts"] = boxes;
  if (t_known) {
    v["box_limit"] = box_limit;
    v["box_check"] = box_ok;
    pass = pass && box_ok;
  }
  const EmptyBoxReport empty = check_empty_boxes(ps);
  v["empty_boxes"] = {{"n", empty.n}, {"pass", empty.pass}};
  pass = pass && empty.pass;
  v["partial"] = partial;
  v["pass"] = pass;
  io.out << v.dump(2) << "\n";
  if (!pass) return kExitFail;
  return partial ? kExitResource : kExitPass;
}

int cmd_coeffs(const RunConfig& cfg, Output io) {
  const PointSet ps = input_points(cfg);
  TableOptions opts;
  opts.max_level = cfg.max_level;
  if (cfg.budget) opts.budget = *cfg.budget;
  const HaarCoefficientTable table(ps, opts);
  std::ostringstream body;
  if (cfg.format == "csv") {
    body << metadata_line(cfg.to_json()) << "\n";
    table.write_csv(body);
  } else {
    nlohmann::json j = {{"meta", metadata_json(cfg.to_json())},
                        {"N", ps.size()},
                        {"d", ps.dimension()},
                        {"max_level", table.max_level()},
                        {"shapes", table.blocks().size()},
                        {"stored_entries", table.stored_entries()},
                        {"logical_size", table.logical_size()}};
    if (table.max_level() >= ps.precision_bits() - 1) j["parseval_l2"] = parseval_l2(table).to_json();
    body << j.dump(2) << "\n";
  }
  if (cfg.out.empty())
    io.out << body.str();
  else
    write_text(cfg, cfg.out, body.str());
  return kExitPass;
}

int cmd_norms(const RunConfig& cfg, Output io) {
  const auto names = split_names(cfg.which);
  if (names.empty()) throw UsageError("--which must name at least one norm");
  const PointSet ps = input_points(cfg);
  std::vector<int> grid = parse_int_list(cfg.p_grid);
  const double alpha = cfg.alpha > 0 ? cfg.alpha : (ps.dimension() > 1 ? 2.0 / (ps.dimension() - 1) : 2.0);
  SampleOptions sampling{cfg.samples, cfg.seed};

  std::vector<std::pair<std::string, nlohmann::json>> reports;
  std::map<std::string, double> values;
  bool resource = false;
  std::optional<HaarCoefficientTable> table;
  auto get_table = [&]() -> const HaarCoefficientTable& {
    if (!table) table.emplace(ps, TableOptions{std::nullopt, cfg.budget.value_or(1e9)});
    return *table;
  };
  auto run = [&](const std::string& key, const std::function<NormReport()>& f) {
    try {
      const NormReport r = f();
      values[key] = r.value;
      reports.emplace_back(key, r.to_json());
    } catch (const ResourceError& e) {
      resource = true;
      reports.emplace_back(key, nlohmann::json{{"error", e.what()}});
    }
  };
  for (const auto& name : names) {
    if (name == "star") {
      run(name, [&] { return star_discrepancy(ps, {cfg.budget.value_or(1e12)}); });
    } else if (name == "l2-warnock") {
      run(name, [&] { return l2_warnock(ps); });
    } else if (name == "l2-parseval") {
      run(name, [&] { return parseval_l2(get_table()); });
    } else if (name == "lp") {
      for (int p : grid) run("lp-" + std::to_string(p), [&] { return lp_norm_exact(ps, p); });
    } else if (name == "lp-estimate") {
      for (int p : grid) run("lp-estimate-" + std::to_string(p), [&] { return lp_norm_estimate(ps, p, sampling); });
    } else if (name == "orlicz-proxy") {
      run(name, [&] {
        ProxyOptions o;
        o.p_grid = grid;
        return orlicz_norm_proxy(ps, alpha, o);
      });
    } else if (name == "orlicz-direct") {
      run(name, [&] { return orlicz_norm_direct(ps, OrliczSpec::make(alpha), {sampling}); });
    } else if (name == "bmo-proxy") {
      run(name, [&] { return bmo_proxy(get_table(), {cfg.order_cap, true}); });
    } else if (name == "bmo-lower") {
      run(name, [&] { return bmo_lower_bound(ps); });
    } else if (name == "discretization") {
      reports.emplace_back(name, discretization_consistency(ps, 1000, cfg.seed).to_json());
    } else {
      throw UsageError("unknown norm '" + name +
                       "' (star, l2-warnock, l2-parseval, lp, lp-estimate, orlicz-proxy, orlicz-direct, bmo-proxy, "
                       "bmo-lower, discretization)");
    }
  }
  std::optional<double> delta;
  if (values.count("l2-warnock") && values.count("l2-parseval"))
    delta = std::fabs(values["l2-warnock"] - values["l2-parseval"]) / std::max(values["l2-warnock"], 1e-300);

  std::ostringstream body;
  if (cfg.format == "csv") {
    body << metadata_line(cfg.to_json()) << "\n";
    body << "norm,value,method,error_bound\n";
    for (const auto& [key, r] : reports) {
      if (r.contains("error") || !r.contains("method")) {
        body << key << ",," << (r.contains("error") ? "error" : "check") << ",\n";
        continue;
      }
      body << key << "," << r["value"].dump() << "," << r["method"].get<std::string>() << ","
           << (r["error_bound"].is_null() ? "" : r["error_bound"].dump()) << "\n";
    }
    if (delta) body << "parseval_warnock_delta," << nlohmann::json(*delta).dump() << ",relative,\n";
  } else {
    nlohmann::json j = {{"meta", metadata_json(cfg.to_json())}, {"N", ps.size()}, {"d", ps.dimension()}};
    nlohmann::json rs = nlohmann::json::object();
    for (const auto& [key, r] : reports) rs[key] = r;
    j["reports"] = rs;
    if (delta) j["consistency"] = {{"parseval_warnock_delta", *delta}};
    body << j.dump(2) << "\n";
  }
  if (cfg.out.empty())
    io.out << body.str();
  else
    write_text(cfg, cfg.out, body.str());
  return resource ? kExitResource : kExitPass;
}

int cmd_study(const RunConfig& cfg, Output io) {
  const auto ns = parse_int_list(cfg.n_range);
  std::vector<int> distinct = ns;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 4) throw UsageError("--n-range needs at least 4 distinct values");
  const std::string construction = cfg.builtin.empty() ? "hammersley" : cfg.builtin;
  const auto names = builtin_net_names();
  if (std::find(names.begin(), names.end(), construction) == names.end())
    throw UsageError("unknown builtin '" + construction + "'; available: " + builtin_list());
  StudyOptions opts;
  opts.alpha = cfg.alpha;
  opts.order_cap = cfg.order_cap;
  const ScalingStudy study = scaling_study(construction, cfg.d, cfg.sigma, distinct, parse_study_norm(cfg.norm), opts);

  nlohmann::json summary = study.to_json();
  summary["meta"] = metadata_json(cfg.to_json());
  bool pass = true;
  if (!cfg.window.empty()) {
    const auto parts = split_names(cfg.window);
    if (parts.size() != 2) throw UsageError("--window expects 'lo,hi'");
    double lo = 0, hi = 0;
    try {
      lo = std::stod(parts[0]);
      hi = std::stod(parts[1]);
    } catch (const std::logic_error&) {
      throw UsageError("--window expects two numbers");
    }
    pass = study.exponent >= lo && study.exponent <= hi;
    summary["window"] = {lo, hi};
    summary["pass"] = pass;
  }
  std::ostringstream csv;
  csv << metadata_line(cfg.to_json()) << "\n";
  csv << "n,N,value,method\n";
  for (const auto& r : study.rows) csv << r.n << "," << r.points << "," << nlohmann::json(r.value).dump() << "," << r.method << "\n";
  if (cfg.out.empty()) {
    if (cfg.format == "csv")
      io.out << csv.str();
    else
      io.out << summary.dump(2) << "\n";
  } else {
    write_text(cfg, cfg.out + ".csv", csv.str());
    write_text(cfg, cfg.out + ".json", summary.dump(2) + "\n");
    io.out << summary.dump(2) << "\n";
  }
  return pass ? kExitPass : kExitFail;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"disclab: digital nets, discrepancy and Haar-based norms"};
  app.require_subcommand(1);

  auto common_input = [&](CLI::App* sub) {
    sub->add_option("--builtin", cfg.builtin, "builtin net: hammersley, sobol, zero");
    sub->add_option("--matrix", cfg.matrix, "generating matrix file");
    sub->add_option("--d", cfg.d, "dimension")->check(CLI::PositiveNumber);
    sub->add_option("--n", cfg.n, "bit depth, N = 2^n")->check(CLI::Range(0, 62));
    sub->add_option("--sigma", cfg.sigma, "order")->check(CLI::PositiveNumber);
    sub->add_option("--budget", cfg.budget, "work budget");
    sub->add_option("--out", cfg.out, "output path");
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", cfg.seed, "random seed");
  };

  auto* gen = app.add_subcommand("gen", "write the points of a digital net");
  common_input(gen);
  auto* verify = app.add_subcommand("verify", "check the net property, box counts and empty boxes");
  common_input(verify);
  verify->add_option("--points", cfg.points, "point set file");
  verify->add_option("--t", cfg.t, "declared quality parameter");
  auto* coeffs = app.add_subcommand("coeffs", "dump Haar coefficients of the discrepancy function");
  common_input(coeffs);
  coeffs->add_option("--points", cfg.points, "point set file");
  coeffs->add_option("--max-level", cfg.max_level, "per-coordinate truncation J");
  auto* norms = app.add_subcommand("norms", "evaluate norms of the discrepancy function");
  common_input(norms);
  norms->add_option("--points", cfg.points, "point set file");
  norms->add_option("--which", cfg.which, "comma list of norms")->required();
  norms->add_option("--p-grid", cfg.p_grid, "comma list of p");
  norms->add_option("--alpha", cfg.alpha, "Orlicz exponent (default 2/(d-1))");
  norms->add_option("--samples", cfg.samples, "Monte Carlo samples");
  norms->add_option("--order-cap", cfg.order_cap, "largest box order in the BMO candidate family");
  auto* study = app.add_subcommand("study", "scaling study over a range of n");
  common_input(study);
  study->add_option("--n-range", cfg.n_range, "e.g. 4..10 or 4,6,8,10")->required();
  study->add_option("--norm", cfg.norm, "bmo_proxy, orlicz_proxy, star, l2, bmo_lower");
  study->add_option("--window", cfg.window, "accepted exponent window lo,hi");
  study->add_option("--alpha", cfg.alpha, "Orlicz exponent (default 2/(d-1))");
  study->add_option("--order-cap", cfg.order_cap, "largest box order in the BMO candidate family");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitPass;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const Output io{out, err};
  try {
    if (gen->parsed()) {
      cfg.command = "gen";
      return cmd_gen(cfg, io);
    }
    if (verify->parsed()) {
      cfg.command = "verify";
      return cmd_verify(cfg, io);
    }
    if (coeffs->parsed()) {
      cfg.command = "coeffs";
      return cmd_coeffs(cfg, io);
    }
    if (norms->parsed()) {
      cfg.command = "norms";
      return cmd_norms(cfg, io);
    }
    cfg.command = "study";
    return cmd_study(cfg, io);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ResourceError& e) {
    err << "resource limit: " << e.what() << "\n";
    return kExitResource;
  }
}

}  // namespace disclab
