#include "fbq/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace fbq {

namespace {

constexpr char kCsvHeader[] =
    "experiment_id,channel,K,n,P_dB,Phi,eps_m,total_goodput_bpcu,total_cep,"
    "feasible,iterations,wall_time_ms";

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("bad numeric value for '" + key + "': " + s);
  }
}

long long parse_int(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("bad integer value for '" + key + "': " + s);
  }
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw config_error("bad boolean value for '" + key + "': " + s);
}

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fmt_full(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string n_label(int n) { return n == 0 ? "inf" : std::to_string(n); }

struct CsvRow {
  std::string id;
  std::string channel;
  double k_val;
  int n;  // 0 -> inf
  double p_db;
  int phi;
  std::string eps_m = "NA";
  std::string goodput_bpcu = "NA";
  std::string total_cep = "NA";
  std::string feasible = "ok";
  std::string iterations = "NA";
  std::string wall_time_ms = "NA";
  std::string extra;  // appended verbatim for commands with extra columns

  std::string line() const {
    std::ostringstream os;
    os << id << ',' << channel << ',' << fmt9(k_val) << ',' << n_label(n) << ','
       << fmt9(p_db) << ',' << phi << ',' << eps_m << ',' << goodput_bpcu << ','
       << total_cep << ',' << feasible << ',' << iterations << ',' << wall_time_ms;
    if (!extra.empty()) os << ',' << extra;
    return os.str();
  }
};

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&]() {
      for (int i; (i = next.fetch_add(1)) < count;) fn(i);
    });
  for (auto& th : pool) th.join();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  out << content;
}

std::string scheme_file_text(const QuantizationScheme& sch, const std::string& desc) {
  std::ostringstream os;
  os << "# " << desc << "; line 1: region boundaries (gain), line 2: rates (nats/use);"
     << " rates_bpcu:";
  for (double r : sch.rates) os << ' ' << fmt_full(nats_to_bpcu(r));
  os << '\n';
  for (std::size_t i = 0; i < sch.boundaries.size(); ++i)
    os << (i ? " " : "") << fmt_full(sch.boundaries[i]);
  os << '\n';
  for (std::size_t i = 0; i < sch.rates.size(); ++i)
    os << (i ? " " : "") << fmt_full(sch.rates[i]);
  os << '\n';
  return os.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (channel_kind != "rayleigh" && channel_kind != "rician")
    throw config_error("channel.kind must be rayleigh or rician");
  if (k_unit != "linear" && k_unit != "db")
    throw config_error("channel.k_unit must be linear or db");
  if (!(mean_power > 0)) throw config_error("channel.mean_power must be positive");
  if (n_list.empty() || p_db_list.empty() || phi_list.empty())
    throw config_error("sweep lists must be nonempty");
  for (int n : n_list)
    if (n < 0) throw config_error("sweep.n entries must be positive or 'inf'");
  for (int phi : phi_list)
    if (phi < 1) throw config_error("sweep.phi entries must be >= 1");
  for (double e : eps_list)
    if (!(e > 0) || !(e < 1)) throw config_error("sweep.eps_m entries must lie in (0,1)");
  if (curve_points < 2) throw config_error("curves.points must be >= 2");
  if (validate_mode != "grid" && validate_mode != "mc")
    throw config_error("validate.mode must be grid or mc");
  if (mc_draws < 1) throw config_error("validate.draws must be >= 1");
  if (jobs < 1) throw config_error("run.jobs must be >= 1");
  try {
    solver.validate();
    grid.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
}

ChannelModel ExperimentConfig::make_channel() const {
  if (channel_kind == "rayleigh") return ChannelModel::rayleigh(mean_power);
  return k_unit == "db" ? ChannelModel::rician_db(k) : ChannelModel::rician(k);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("malformed section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("expected key = value at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    std::string full = section.empty() ? key : section + "." + key;

    if (full == "channel.kind") {
      cfg.channel_kind = val;
    } else if (full == "channel.k") {
      cfg.k = parse_double(val, full);
    } else if (full == "channel.k_unit") {
      cfg.k_unit = val;
    } else if (full == "channel.mean_power") {
      cfg.mean_power = parse_double(val, full);
    } else if (full == "sweep.n") {
      cfg.n_list.clear();
      for (const auto& tok : split_list(val))
        cfg.n_list.push_back(tok == "inf" ? 0 : static_cast<int>(parse_int(tok, full)));
    } else if (full == "sweep.p_db") {
      cfg.p_db_list.clear();
      for (const auto& tok : split_list(val)) cfg.p_db_list.push_back(parse_double(tok, full));
    } else if (full == "sweep.phi") {
      cfg.phi_list.clear();
      for (const auto& tok : split_list(val))
        cfg.phi_list.push_back(static_cast<int>(parse_int(tok, full)));
    } else if (full == "sweep.eps_m") {
      cfg.eps_list.clear();
      for (const auto& tok : split_list(val)) cfg.eps_list.push_back(parse_double(tok, full));
    } else if (full == "solver.conv_tol") {
      cfg.solver.base.conv_tol = parse_double(val, full);
    } else if (full == "solver.max_outer_iters") {
      cfg.solver.base.max_outer_iters = static_cast<int>(parse_int(val, full));
    } else if (full == "solver.rate_tol") {
      cfg.solver.base.rate_tol = parse_double(val, full);
    } else if (full == "solver.boundary_tol") {
      cfg.solver.base.boundary_tol = parse_double(val, full);
    } else if (full == "solver.tau_rate") {
      cfg.solver.tau_rate = parse_double(val, full);
    } else if (full == "solver.max_restarts") {
      cfg.solver.max_restarts = static_cast<int>(parse_int(val, full));
    } else if (full == "curves.gamma") {
      cfg.curve_gamma = parse_double(val, full);
    } else if (full == "curves.boundaries") {
      cfg.curve_boundaries.clear();
      for (const auto& tok : split_list(val))
        cfg.curve_boundaries.push_back(tok == "inf"
                                           ? std::numeric_limits<double>::infinity()
                                           : parse_double(tok, full));
    } else if (full == "curves.points") {
      cfg.curve_points = static_cast<int>(parse_int(val, full));
    } else if (full == "curves.r_max") {
      cfg.curve_rmax = parse_double(val, full);
    } else if (full == "validate.mode") {
      cfg.validate_mode = val;
    } else if (full == "validate.boundary_grid") {
      cfg.grid.boundary_grid = static_cast<int>(parse_int(val, full));
    } else if (full == "validate.refine_levels") {
      cfg.grid.refine_levels = static_cast<int>(parse_int(val, full));
    } else if (full == "validate.draws") {
      cfg.mc_draws = parse_int(val, full);
    } else if (full == "output.dir") {
      cfg.out_dir = val;
    } else if (full == "output.timings") {
      cfg.timings = parse_bool(val, full);
    } else if (full == "run.seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(val, full));
    } else if (full == "run.jobs") {
      cfg.jobs = static_cast<int>(parse_int(val, full));
    } else if (full == "run.paper_exact") {
      cfg.paper_exact = parse_bool(val, full);
    } else {
      throw config_error("unknown config key '" + full + "' at line " +
                         std::to_string(lineno));
    }
  }
  return cfg;
}

namespace {

Solver2Config effective_solver(const ExperimentConfig& cfg) {
  Solver2Config s = cfg.solver;
  if (cfg.paper_exact) {
    s.paper_exact_alloc = true;
    s.paper_exact_decrement = true;
    s.auglag.paper_exact_updates = true;
  }
  return s;
}

std::string channel_tag(const ExperimentConfig& cfg) {
  return cfg.channel_kind;
}

}  // namespace

int cmd_curves(const ExperimentConfig& cfg) {
  cfg.validate();
  ChannelModel ch = cfg.make_channel();
  std::filesystem::create_directories(cfg.out_dir);
  std::ostringstream os;
  os << "curve,channel,K,n,P_dB,region,r_nats,value\n";

  for (double p_db : cfg.p_db_list) {
    LinkParams lp{1, db_to_lin(p_db)};
    double r_max = cfg.curve_rmax > 0 ? cfg.curve_rmax
                                      : capacity(ch.inv_cdf(0.999), lp);
    // Error probability versus rate at a fixed gain, one curve per n.
    for (int n : cfg.n_list) {
      for (int s = 0; s < cfg.curve_points; ++s) {
        double r = r_max * s / (cfg.curve_points - 1);
        double w;
        if (n == 0) {
          w = (r > capacity(cfg.curve_gamma, lp)) ? 1.0 : 0.0;
        } else {
          w = omega(cfg.curve_gamma, r, {n, lp.p_lin});
        }
        os << "omega," << channel_tag(cfg) << ',' << fmt9(cfg.k) << ',' << n_label(n) << ','
           << fmt9(p_db) << ",NA," << fmt9(r) << ',' << fmt9(w) << '\n';
      }
    }
    // Per-region goodput versus rate for a fixed boundary set.
    if (cfg.curve_boundaries.size() >= 2) {
      const std::vector<double>& b = cfg.curve_boundaries;
      for (int n : cfg.n_list) {
        for (std::size_t i = 0; i + 1 < b.size(); ++i) {
          for (int s = 0; s < cfg.curve_points; ++s) {
            double r = r_max * s / (cfg.curve_points - 1);
            double v;
            if (n == 0) {
              double a = std::expm1(r) / lp.p_lin;
              double lo = std::max(b[i], a);
              double hi_c = std::isfinite(b[i + 1])
                                ? b[i + 1]
                                : ch.upper_truncation(cfg.solver.base.quadrature.tail_mass);
              v = (hi_c > lo) ? r * (ch.survival(lo) - ch.survival(hi_c)) : 0.0;
            } else {
              v = region_goodput({b[i], b[i + 1], r}, ch, {n, lp.p_lin},
                                 cfg.solver.base.quadrature);
            }
            os << "region_goodput," << channel_tag(cfg) << ',' << fmt9(cfg.k) << ','
               << n_label(n) << ',' << fmt9(p_db) << ',' << i + 1 << ',' << fmt9(r) << ','
               << fmt9(v) << '\n';
          }
        }
      }
    }
  }
  write_file(std::filesystem::path(cfg.out_dir) / "curves.csv", os.str());
  return 0;
}

int cmd_optimize(const ExperimentConfig& cfg) {
  cfg.validate();
  ChannelModel ch = cfg.make_channel();
  std::filesystem::create_directories(cfg.out_dir);
  Solver2Config sol = effective_solver(cfg);

  struct Point {
    int n;
    double p_db;
    int phi;
  };
  std::vector<Point> points;
  for (int n : cfg.n_list)
    for (double p : cfg.p_db_list)
      for (int phi : cfg.phi_list) points.push_back({n, p, phi});

  std::vector<std::vector<CsvRow>> rows(points.size());
  std::vector<std::vector<std::pair<std::string, std::string>>> files(points.size());
  std::atomic<bool> any_failed{false};

  parallel_for(static_cast<int>(points.size()), cfg.jobs, [&](int pi) {
    const Point& pt = points[pi];
    LinkParams lp{pt.n == 0 ? 1 : pt.n, db_to_lin(pt.p_db)};
    auto base_row = [&](const std::string& id) {
      CsvRow row;
      row.id = id;
      row.channel = channel_tag(cfg);
      row.k_val = cfg.k;
      row.n = pt.n;
      row.p_db = pt.p_db;
      row.phi = pt.phi;
      return row;
    };
    std::string tag = "n" + n_label(pt.n) + "_P" + fmt9(pt.p_db) + "_Phi" +
                      std::to_string(pt.phi);

    if (pt.n != 0) {
      CsvRow row = base_row("alg1_" + tag);
      Stopwatch sw;
      try {
        auto [sch, rep] = run_algorithm1(ch, lp, pt.phi, std::nullopt, sol.base);
        row.goodput_bpcu = fmt9(rep.total_goodput_bpcu);
        row.total_cep = fmt9(rep.total_cep);
        row.iterations = std::to_string(rep.iterations);
        files[pi].emplace_back("scheme_alg1_" + tag + ".txt",
                               scheme_file_text(sch, "alg1 " + tag));
      } catch (const std::exception&) {
        row.feasible = "failed";
        any_failed = true;
      }
      if (cfg.timings) row.wall_time_ms = fmt9(sw.ms());
      rows[pi].push_back(row);
    }
    {
      CsvRow row = base_row("asymptotic_" + tag);
      Stopwatch sw;
      try {
        AsymptoticScheme asch = asymptotic_quantizer(ch, lp, pt.phi,
                                                     sol.base.quadrature);
        row.goodput_bpcu = fmt9(nats_to_bpcu(asch.goodput_nats));
        row.total_cep = fmt9(asch.outage);
        QuantizationScheme sch;
        sch.boundaries.push_back(0.0);
        sch.boundaries.insert(sch.boundaries.end(), asch.boundaries.begin(),
                              asch.boundaries.end());
        sch.rates = asch.rates;
        files[pi].emplace_back("scheme_asymptotic_" + tag + ".txt",
                               scheme_file_text(sch, "asymptotic " + tag));
      } catch (const std::exception&) {
        row.feasible = "failed";
        any_failed = true;
      }
      if (cfg.timings) row.wall_time_ms = fmt9(sw.ms());
      rows[pi].push_back(row);
    }
    {
      CsvRow row = base_row("fixedrate_" + tag);
      try {
        FixedRateOptimum fro = fixed_rate_optimum(ch, lp, sol.base.quadrature);
        row.goodput_bpcu = fmt9(nats_to_bpcu(fro.goodput_nats));
        row.total_cep = fmt9(ch.cdf(std::expm1(fro.rate) / lp.p_lin));
      } catch (const std::exception&) {
        row.feasible = "failed";
        any_failed = true;
      }
      rows[pi].push_back(row);
    }
    {
      CsvRow row = base_row("ergodic_" + tag);
      try {
        row.goodput_bpcu = fmt9(nats_to_bpcu(ergodic_capacity(ch, lp, sol.base.quadrature)));
      } catch (const std::exception&) {
        row.feasible = "failed";
        any_failed = true;
      }
      rows[pi].push_back(row);
    }
  });

  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const CsvRow& r : rows[i]) os << r.line() << '\n';
  write_file(std::filesystem::path(cfg.out_dir) / "optimize.csv", os.str());
  for (std::size_t i = 0; i < files.size(); ++i)
    for (const auto& [name, text] : files[i])
      write_file(std::filesystem::path(cfg.out_dir) / name, text);
  return any_failed ? 1 : 0;
}

int cmd_optimize_constrained(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.eps_list.empty())
    throw config_error("optimize-constrained requires a nonempty sweep.eps_m list");
  ChannelModel ch = cfg.make_channel();
  std::filesystem::create_directories(cfg.out_dir);
  Solver2Config sol = effective_solver(cfg);

  struct Point {
    int n;
    double p_db;
    int phi;
    double eps;
  };
  std::vector<Point> points;
  for (int n : cfg.n_list)
    for (double p : cfg.p_db_list)
      for (int phi : cfg.phi_list)
        for (double e : cfg.eps_list) points.push_back({n, p, phi, e});
  for (const Point& pt : points)
    if (pt.n == 0)
      throw config_error("optimize-constrained requires finite blocklengths");

  std::vector<CsvRow> rows(points.size());
  std::vector<std::pair<std::string, std::string>> files(points.size());
  std::atomic<bool> any_failed{false};

  parallel_for(static_cast<int>(points.size()), cfg.jobs, [&](int pi) {
    const Point& pt = points[pi];
    LinkParams lp{pt.n, db_to_lin(pt.p_db)};
    std::string tag = "n" + n_label(pt.n) + "_P" + fmt9(pt.p_db) + "_Phi" +
                      std::to_string(pt.phi) + "_eps" + fmt9(pt.eps);
    CsvRow row;
    row.id = "alg2_" + tag;
    row.channel = channel_tag(cfg);
    row.k_val = cfg.k;
    row.n = pt.n;
    row.p_db = pt.p_db;
    row.phi = pt.phi;
    row.eps_m = fmt9(pt.eps);
    Stopwatch sw;
    try {
      Algorithm2Result res = run_algorithm2(ch, lp, pt.phi, pt.eps, std::nullopt, sol);
      row.goodput_bpcu = fmt9(res.report.total_goodput_bpcu);
      row.total_cep = fmt9(res.report.total_cep);
      row.iterations = std::to_string(res.report.iterations);
      row.feasible = res.feasible ? "feasible" : "infeasible";
      files[pi] = {"scheme_alg2_" + tag + ".txt", scheme_file_text(res.scheme, "alg2 " + tag)};
    } catch (const std::exception&) {
      row.feasible = "failed";
      any_failed = true;
    }
    if (cfg.timings) row.wall_time_ms = fmt9(sw.ms());
    rows[pi] = row;
  });

  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const CsvRow& r : rows) os << r.line() << '\n';
  write_file(std::filesystem::path(cfg.out_dir) / "optimize_constrained.csv", os.str());
  for (const auto& [name, text] : files)
    if (!name.empty()) write_file(std::filesystem::path(cfg.out_dir) / name, text);
  return any_failed ? 1 : 0;
}

int cmd_validate(const ExperimentConfig& cfg) {
  cfg.validate();
  ChannelModel ch = cfg.make_channel();
  std::filesystem::create_directories(cfg.out_dir);
  Solver2Config sol = effective_solver(cfg);
  bool constrained = !cfg.eps_list.empty();
  if (cfg.validate_mode == "grid" && !constrained)
    for (int phi : cfg.phi_list)
      if (phi > 3)
        throw config_error("validate grid mode without eps_m supports Phi <= 3 only");

  struct Point {
    int n;
    double p_db;
    int phi;
    double eps;  // <= 0 means unconstrained
  };
  std::vector<Point> points;
  for (int n : cfg.n_list)
    for (double p : cfg.p_db_list)
      for (int phi : cfg.phi_list) {
        if (constrained)
          for (double e : cfg.eps_list) points.push_back({n, p, phi, e});
        else
          points.push_back({n, p, phi, 0.0});
      }
  for (const Point& pt : points)
    if (pt.n == 0) throw config_error("validate requires finite blocklengths");

  std::vector<CsvRow> rows(points.size());
  std::atomic<bool> any_failed{false};

  parallel_for(static_cast<int>(points.size()), cfg.jobs, [&](int pi) {
    const Point& pt = points[pi];
    LinkParams lp{pt.n, db_to_lin(pt.p_db)};
    CsvRow row;
    row.channel = channel_tag(cfg);
    row.k_val = cfg.k;
    row.n = pt.n;
    row.p_db = pt.p_db;
    row.phi = pt.phi;
    std::string tag = "n" + n_label(pt.n) + "_P" + fmt9(pt.p_db) + "_Phi" +
                      std::to_string(pt.phi);
    if (pt.eps > 0) {
      tag += "_eps" + fmt9(pt.eps);
      row.eps_m = fmt9(pt.eps);
    }
    row.id = "validate_" + tag;
    Stopwatch sw;
    try {
      QuantizationScheme sch;
      GoodputReport rep;
      if (pt.eps > 0) {
        Algorithm2Result res = run_algorithm2(ch, lp, pt.phi, pt.eps, std::nullopt, sol);
        sch = res.scheme;
        rep = res.report;
        row.feasible = res.feasible ? "feasible" : "infeasible";
      } else {
        std::tie(sch, rep) = run_algorithm1(ch, lp, pt.phi, std::nullopt, sol.base);
      }
      row.goodput_bpcu = fmt9(rep.total_goodput_bpcu);
      row.total_cep = fmt9(rep.total_cep);
      row.iterations = std::to_string(rep.iterations);
      std::string gap = "NA", mcg = "NA", mcs = "NA";
      if (cfg.validate_mode == "grid") {
        OracleResult orc = pt.eps > 0
                               ? grid_search_constrained(ch, lp, pt.phi, pt.eps, cfg.grid, sol)
                               : grid_search(ch, lp, pt.phi, cfg.grid, sol.base);
        gap = fmt9(nats_to_bpcu(orc.goodput_nats - rep.total_goodput_nats));
      } else {
        McEstimate est = monte_carlo_goodput(sch, ch, lp, {cfg.mc_draws, cfg.seed, 1});
        mcg = fmt9(nats_to_bpcu(est.goodput_nats));
        mcs = fmt9(nats_to_bpcu(est.std_error));
      }
      row.extra = gap + ',' + mcg + ',' + mcs;
    } catch (const std::exception&) {
      row.feasible = "failed";
      row.extra = "NA,NA,NA";
      any_failed = true;
    }
    if (cfg.timings) row.wall_time_ms = fmt9(sw.ms());
    rows[pi] = row;
  });

  std::ostringstream os;
  os << kCsvHeader << ",gap_bpcu,mc_goodput_bpcu,mc_std_error\n";
  for (const CsvRow& r : rows) os << r.line() << '\n';
  write_file(std::filesystem::path(cfg.out_dir) / "validate.csv", os.str());
  return any_failed ? 1 : 0;
}

}  // namespace fbq
