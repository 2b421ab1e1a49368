#pragma once

// Batch experiment runner: flat key=value spec files, command dispatch,
// atomic CSV/SVG persistence with full seed provenance in every header.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "majperc/couplings.hpp"
#include "majperc/dynamics.hpp"
#include "majperc/enhancement.hpp"
#include "majperc/estimation.hpp"
#include "majperc/grid.hpp"
#include "majperc/oracle.hpp"
#include "majperc/percolation.hpp"

namespace majperc {

// Sampling budget ran out before the requested precision was reached.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentSpec {
  std::string command;
  std::vector<double> p{0.5};
  std::vector<double> t{0.0};
  int n = 32;
  double lambda = 2.0;
  std::uint64_t replicas = 0;  // 0 = per-command default (4096 certify, else 1024)
  std::uint64_t seed = 0;
  BoundaryPolicy policy = BoundaryPolicy::FreeFinite;
  std::string out;          // default: "<command>.csv" (".txt" for reports)
  std::string svg;          // optional curve plot (pc-curve, sweep)
  int threads = 0;          // 0 = leave MAJPERC_THREADS alone
  std::string grid;         // oracle: "WxH"
  std::string check = "law";  // oracle: law | fkg
  std::string kind = "monotone";  // couple: monotone | continuity
  double p2 = -1;           // couple monotone upper density; -1 = p + 0.2
  double delta = 0.1;       // couple continuity
  double t_max = 64.0;      // fixation horizon
  std::vector<int> dist{1}; // cov site separations along the x axis
  double target = 0.5;      // pc-curve crossing probability
  double tol = 0.004;       // pc-curve bracket width
  int L0 = 16, factor = 3, k_max = 1;  // renorm
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": not a number: '" + v + "'");
  }
  if (pos != v.size()) throw std::invalid_argument(key + ": trailing junk in '" + v + "'");
  return x;
}

inline long long parse_int(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  long long x;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": not an integer: '" + v + "'");
  }
  if (pos != v.size()) throw std::invalid_argument(key + ": trailing junk in '" + v + "'");
  return x;
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& v, const std::string& key, Parse one) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(one(trim(item), key));
  if (out.empty()) throw std::invalid_argument(key + ": empty list");
  return out;
}

}  // namespace detail

inline void apply_spec_key(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_int;
  using detail::parse_list;
  if (key == "command") spec.command = value;
  else if (key == "p") spec.p = parse_list<double>(value, key, parse_double);
  else if (key == "t") spec.t = parse_list<double>(value, key, parse_double);
  else if (key == "n") spec.n = static_cast<int>(parse_int(value, key));
  else if (key == "lambda") spec.lambda = parse_double(value, key);
  else if (key == "replicas") spec.replicas = static_cast<std::uint64_t>(parse_int(value, key));
  else if (key == "seed") spec.seed = static_cast<std::uint64_t>(parse_int(value, key));
  else if (key == "policy") spec.policy = boundary_policy_from_string(value);
  else if (key == "out") spec.out = value;
  else if (key == "svg") spec.svg = value;
  else if (key == "threads") spec.threads = static_cast<int>(parse_int(value, key));
  else if (key == "grid") spec.grid = value;
  else if (key == "check") spec.check = value;
  else if (key == "kind") spec.kind = value;
  else if (key == "p2") spec.p2 = parse_double(value, key);
  else if (key == "delta") spec.delta = parse_double(value, key);
  else if (key == "t_max") spec.t_max = parse_double(value, key);
  else if (key == "dist")
    spec.dist = parse_list<int>(value, key, [](const std::string& v, const std::string& k) {
      return static_cast<int>(detail::parse_int(v, k));
    });
  else if (key == "target") spec.target = parse_double(value, key);
  else if (key == "tol") spec.tol = parse_double(value, key);
  else if (key == "L0") spec.L0 = static_cast<int>(parse_int(value, key));
  else if (key == "factor") spec.factor = static_cast<int>(parse_int(value, key));
  else if (key == "k_max") spec.k_max = static_cast<int>(parse_int(value, key));
  else throw std::invalid_argument("unknown key '" + key + "'");
}

inline ExperimentSpec parse_spec(std::istream& in) {
  ExperimentSpec spec;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key=value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    try {
      apply_spec_key(spec, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (spec.command.empty()) throw std::invalid_argument("spec: command is required");
  return spec;
}

inline ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open spec file: " + path);
  return parse_spec(in);
}

inline void validate_spec(const ExperimentSpec& spec) {
  static const char* kCommands[] = {"evolve", "sweep",   "pc-curve", "cov",     "fixation",
                                    "couple", "enhance", "oracle",   "certify", "renorm"};
  bool known = false;
  for (const char* c : kCommands) known |= spec.command == c;
  if (!known) throw std::invalid_argument("command: unknown command '" + spec.command + "'");
  for (double p : spec.p)
    if (!(p >= 0 && p <= 1)) throw std::invalid_argument("p: must be in [0,1]");
  for (double t : spec.t)
    if (t < 0) throw std::invalid_argument("t: must be nonnegative");
  if (spec.n < 1) throw std::invalid_argument("n: must be positive");
  if (spec.lambda < 1) throw std::invalid_argument("lambda: must be at least 1");
  if (spec.p2 != -1 && !(spec.p2 >= 0 && spec.p2 <= 1))
    throw std::invalid_argument("p2: must be in [0,1]");
  if (spec.kind != "monotone" && spec.kind != "continuity")
    throw std::invalid_argument("kind: must be monotone or continuity");
  if (spec.check != "law" && spec.check != "fkg")
    throw std::invalid_argument("check: must be law or fkg");
  if (spec.t_max <= 0) throw std::invalid_argument("t_max: must be positive");
  if (spec.tol <= 0) throw std::invalid_argument("tol: must be positive");
  if (!(spec.target > 0 && spec.target < 1))
    throw std::invalid_argument("target: must be in (0,1)");
  if (spec.L0 < 1) throw std::invalid_argument("L0: must be positive");
  if (spec.factor != 3 && spec.factor != 4) throw std::invalid_argument("factor: must be 3 or 4");
  if (spec.k_max < 0) throw std::invalid_argument("k_max: must be nonnegative");
  for (int d : spec.dist)
    if (d < 0) throw std::invalid_argument("dist: must be nonnegative");
}

namespace detail {

// All artifact writes go through here: tmp file + rename, so a crash
// never leaves a truncated result behind.
inline void atomic_write(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open for writing: " + tmp);
    out << content;
    if (!out) throw std::ios_base::failure("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::ios_base::failure("rename failed: " + path);
}

inline std::string spec_header(const ExperimentSpec& spec) {
  std::ostringstream h;
  h << "# command=" << spec.command << "\n";
  h << "# p=";
  for (std::size_t i = 0; i < spec.p.size(); ++i) h << (i ? "," : "") << fmt17(spec.p[i]);
  h << "\n# t=";
  for (std::size_t i = 0; i < spec.t.size(); ++i) h << (i ? "," : "") << fmt17(spec.t[i]);
  h << "\n# n=" << spec.n << "\n";
  h << "# lambda=" << fmt17(spec.lambda) << "\n";
  h << "# replicas=" << spec.replicas << "\n";
  h << "# seed=" << spec.seed << "\n";
  h << "# policy=" << to_string(spec.policy) << "\n";
  return h.str();
}

// Minimal polyline plot of (x, y) pairs; presentation only, derived from
// the CSV values and never read back.
inline std::string svg_curve(const std::vector<std::pair<double, double>>& pts,
                             const std::string& x_label, const std::string& y_label) {
  const int w = 640, h = 400, m = 50;
  double x_lo = pts.front().first, x_hi = x_lo, y_lo = pts.front().second, y_hi = y_lo;
  for (auto& [x, y] : pts) {
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    y_lo = std::min(y_lo, y);
    y_hi = std::max(y_hi, y);
  }
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi == y_lo) y_hi = y_lo + 1;
  auto px = [&](double x) { return m + (x - x_lo) / (x_hi - x_lo) * (w - 2 * m); };
  auto py = [&](double y) { return h - m - (y - y_lo) / (y_hi - y_lo) * (h - 2 * m); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<line x1=\"" << m << "\" y1=\"" << h - m << "\" x2=\"" << w - m << "\" y2=\"" << h - m
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << h - m
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">" << x_label
    << "</text>\n";
  s << "<text x=\"15\" y=\"" << h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
    << h / 2 << ")\">" << y_label << "</text>\n";
  s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (auto& [x, y] : pts) s << px(x) << "," << py(y) << " ";
  s << "\"/>\n</svg>\n";
  return s.str();
}

inline Rect square_region(int n) { return Rect{0, n - 1, 0, n - 1}; }

inline Rect parse_grid(const std::string& grid) {
  std::size_t x = grid.find('x');
  if (x == std::string::npos) throw std::invalid_argument("grid: expected WxH, got '" + grid + "'");
  int w = static_cast<int>(parse_int(grid.substr(0, x), "grid"));
  int h = static_cast<int>(parse_int(grid.substr(x + 1), "grid"));
  if (w < 1 || h < 1) throw std::invalid_argument("grid: dimensions must be positive");
  return Rect{0, w - 1, 0, h - 1};
}

}  // namespace detail

// ---------------------------------------------------------------------
// Command implementations. Each returns the artifact body; run() owns
// validation, persistence, and the one-line stdout summary.
// ---------------------------------------------------------------------

namespace detail {

inline std::string run_evolve(const ExperimentSpec& spec) {
  Rect r = square_region(spec.n);
  SpinConfig init = random_init(r, spec.p.front(), uniform_field(SeedSpec{spec.seed, 0, "init"}, r));
  ClockStream clocks(SeedSpec{spec.seed, 0, "clock"});
  auto [final_cfg, log] = evolve_trajectory(init, clocks, spec.t.front(), spec.policy);
  (void)final_cfg;
  std::ostringstream csv;
  csv << spec_header(spec) << "time,site_x,site_y,old,new\n";
  for (const FlipEvent& e : log)
    csv << fmt17(e.time) << "," << e.site.x << "," << e.site.y << "," << int(e.old_value) << ","
        << int(e.new_value) << "\n";
  return csv.str();
}

inline std::string run_sweep(const ExperimentSpec& spec,
                             std::vector<std::pair<double, double>>* curve) {
  std::ostringstream csv;
  csv << spec_header(spec) << "p,t,n,lambda,p_hat,ci_lo,ci_hi,successes,replicas,master_seed\n";
  for (double t : spec.t)
    for (double p : spec.p) {
      EventSpec ev = h_crossing_spec(spec.n, spec.lambda, t, p);
      EventProbEstimate e = mc_event_prob(ev, spec.replicas, spec.seed);
      csv << fmt17(p) << "," << fmt17(t) << "," << spec.n << "," << fmt17(spec.lambda) << ","
          << fmt17(e.p_hat) << "," << fmt17(e.ci.lo) << "," << fmt17(e.ci.hi) << ","
          << e.successes << "," << e.replicas << "," << spec.seed << "\n";
      if (curve && t == spec.t.front()) curve->push_back({p, e.p_hat});
    }
  return csv.str();
}

inline std::string run_pc_curve(const ExperimentSpec& spec,
                                std::vector<std::pair<double, double>>* curve) {
  ThresholdOptions opts;
  opts.tol = spec.tol;
  std::ostringstream csv;
  csv << spec_header(spec) << "t,n,lambda,p_star,ci_lo,ci_hi,replicas_used,master_seed\n";
  for (double t : spec.t) {
    ThresholdEstimate est = threshold_search(t, spec.n, spec.lambda, spec.target, spec.seed, opts);
    if (est.budget_exhausted)
      throw BudgetError("pc-curve: replica budget exhausted at t=" + fmt17(t));
    csv << fmt17(t) << "," << spec.n << "," << fmt17(spec.lambda) << "," << fmt17(est.p_star)
        << "," << fmt17(est.ci_lo) << "," << fmt17(est.ci_hi) << "," << est.replicas_used << ","
        << spec.seed << "\n";
    if (curve) curve->push_back({t, est.p_star});
  }
  return csv.str();
}

inline std::string run_cov(const ExperimentSpec& spec) {
  std::ostringstream csv;
  csv << spec_header(spec) << "p,t,dist,cov_hat,ci_lo,ci_hi,replicas,master_seed\n";
  for (int d : spec.dist) {
    CovarianceEstimate e = covariance_estimate(spec.p.front(), spec.t.front(), {0, 0}, {d, 0},
                                               spec.replicas, spec.seed);
    csv << fmt17(spec.p.front()) << "," << fmt17(spec.t.front()) << "," << d << ","
        << fmt17(e.cov_hat) << "," << fmt17(e.ci_lo) << "," << fmt17(e.ci_hi) << "," << e.replicas
        << "," << spec.seed << "\n";
  }
  return csv.str();
}

inline std::string run_fixation(const ExperimentSpec& spec) {
  Rect r = square_region(spec.n);
  struct Row {
    double qt;
    std::uint64_t flips;
    bool timed_out;
  };
  std::vector<Row> rows(spec.replicas);
  parallel_for(spec.replicas, [&](std::uint64_t i) {
    auto rid = static_cast<std::uint32_t>(i);
    SpinConfig init =
        random_init(r, spec.p.front(), uniform_field(SeedSpec{spec.seed, rid, "init"}, r));
    ClockStream clocks(SeedSpec{spec.seed, rid, "clock"});
    QuiescenceResult q = run_to_quiescence(init, clocks, spec.policy, spec.t_max);
    std::uint64_t flips = 0;
    for (std::uint32_t c : q.flip_counts) flips += c;
    rows[i] = {q.quiescence_time.value_or(-1.0), flips, !q.quiescence_time.has_value()};
  });
  std::ostringstream csv;
  csv << spec_header(spec) << "# t_max=" << fmt17(spec.t_max) << "\n";
  csv << "replica_id,quiescence_time,total_flips,timed_out\n";
  for (std::uint64_t i = 0; i < spec.replicas; ++i)
    csv << i << "," << fmt17(rows[i].qt) << "," << rows[i].flips << "," << int(rows[i].timed_out)
        << "\n";
  return csv.str();
}

inline std::string run_couple(const ExperimentSpec& spec) {
  Rect r = square_region(spec.n);
  double p = spec.p.front(), t = spec.t.front();
  double p2 = spec.p2 == -1 ? std::min(1.0, p + 0.2) : spec.p2;
  struct Row {
    int violations;
    std::int64_t lower_ones, upper_ones;
  };
  std::vector<Row> rows(spec.replicas);
  parallel_for(spec.replicas, [&](std::uint64_t i) {
    auto rid = static_cast<std::uint32_t>(i);
    CoupledPair pair =
        spec.kind == "monotone"
            ? monotone_p_pair(p, p2, t, r, spec.seed, rid, spec.policy, /*strict=*/true)
            : continuity_pair(p, spec.delta, t, r, spec.seed, rid, spec.policy).pair;
    rows[i] = {pair.order_violations, pair.lower.count_ones(), pair.upper.count_ones()};
  });
  double mean_lo = 0, mean_hi = 0;
  for (const Row& row : rows) {
    mean_lo += row.lower_ones;
    mean_hi += row.upper_ones;
  }
  mean_lo /= spec.replicas * static_cast<double>(r.area());
  mean_hi /= spec.replicas * static_cast<double>(r.area());
  std::ostringstream csv;
  csv << spec_header(spec) << "# kind=" << spec.kind;
  if (spec.kind == "monotone") csv << " p2=" << fmt17(p2);
  else csv << " delta=" << fmt17(spec.delta);
  csv << "\n# mean_lower_density=" << fmt17(mean_lo)
      << " mean_upper_density=" << fmt17(mean_hi) << "\n";
  csv << "replica_id,kind,order_violations,lower_ones,upper_ones\n";
  for (std::uint64_t i = 0; i < spec.replicas; ++i)
    csv << i << "," << spec.kind << "," << rows[i].violations << "," << rows[i].lower_ones << ","
        << rows[i].upper_ones << "\n";
  return csv.str();
}

inline std::string run_enhance(const ExperimentSpec& spec) {
  Rect r = square_region(spec.n);
  std::vector<ChainStabilityReport> reps(spec.replicas);
  parallel_for(spec.replicas, [&](std::uint64_t i) {
    auto rid = static_cast<std::uint32_t>(i);
    EnhancementField field(r, SeedSpec{spec.seed, rid, "enh"});
    ClockStream clocks(SeedSpec{spec.seed, rid, "clock"});
    SpinConfig init =
        random_init(r, spec.p.front(), uniform_field(SeedSpec{spec.seed, rid, "init"}, r));
    reps[i] = chain_stability_check(init, clocks, field, spec.t.front());
  });
  std::ostringstream csv;
  csv << spec_header(spec) << "instance_seed,chains_checked,connectors_checked,violations\n";
  for (std::uint64_t i = 0; i < spec.replicas; ++i)
    csv << i << "," << reps[i].chains_checked << "," << reps[i].connectors_checked << ","
        << reps[i].violations << "\n";
  return csv.str();
}

inline std::string run_oracle(const ExperimentSpec& spec, std::string* summary) {
  Rect r = spec.grid.empty() ? Rect{0, 2, 0, 2} : parse_grid(spec.grid);
  ExactLaw law = exact_law(r, spec.policy, spec.t.front(), spec.p.front());
  if (spec.check == "law") {
    std::ostringstream csv;
    csv << spec_header(spec) << "# grid=" << r.width() << "x" << r.height()
        << " truncation=" << law.truncation << " tail=" << fmt17(law.tail) << "\n";
    csv << "config_bits,mass\n";
    for (std::uint32_t c = 0; c < law.mass.size(); ++c)
      csv << c << "," << fmt17(law.mass[c]) << "\n";
    *summary = "law with " + std::to_string(law.mass.size()) + " configurations, tail " +
               fmt17(law.tail);
    return csv.str();
  }
  // fkg: horizontal and vertical crossings, both increasing
  auto A = [&](const SpinConfig& c) { return has_h_crossing(c, r); };
  auto B = [&](const SpinConfig& c) { return has_v_crossing(c, r); };
  FkgReport rep = oracle_fkg_check(law, A, B);
  std::ostringstream txt;
  txt << spec_header(spec) << "# grid=" << r.width() << "x" << r.height() << "\n";
  txt << "check=fkg\n";
  txt << "event_a=h_crossing\nevent_b=v_crossing\n";
  txt << "p_a=[" << fmt17(rep.p_a_lower) << "," << fmt17(rep.p_a_upper) << "]\n";
  txt << "p_b=[" << fmt17(rep.p_b_lower) << "," << fmt17(rep.p_b_upper) << "]\n";
  txt << "p_ab=[" << fmt17(rep.p_ab_lower) << "," << fmt17(rep.p_ab_upper) << "]\n";
  txt << "margin_lower=" << fmt17(rep.margin_lower) << "\n";
  txt << "tail=" << fmt17(rep.tail) << "\n";
  txt << "result=" << (rep.pass ? "PASS" : "FAIL") << "\n";
  *summary = rep.pass ? "PASS" : "FAIL";
  return txt.str();
}

inline std::string run_certify(const ExperimentSpec& spec, std::string* summary) {
  CertificateOptions opts;
  opts.replicas = spec.replicas;
  CertificateReport rep = percolation_certificate(spec.p.front(), spec.t.front(), spec.n,
                                                  spec.seed, opts);
  std::ostringstream txt;
  txt << spec_header(spec);
  txt << "event=h_crossing(4n,n)\n";
  txt << "n0_proxy=" << rep.n0_proxy << "\n";
  txt << "decoupling_c=" << fmt17(rep.decoupling_c) << "\n";
  txt << "epsilon=" << fmt17(rep.epsilon) << "\n";
  txt << "failures=" << rep.failures << "\n";
  txt << "q_hat=" << fmt17(rep.q_hat) << "\n";
  txt << "q_upper_95=" << fmt17(rep.q_upper) << "\n";
  txt << "recursion_prediction=" << fmt17(rep.recursion_prediction) << "\n";
  txt << "result=" << (rep.certified ? "CERTIFIED" : "NOT CERTIFIED") << "\n";
  *summary = rep.certified ? "CERTIFIED" : "NOT CERTIFIED";
  return txt.str();
}

inline std::string run_renorm(const ExperimentSpec& spec) {
  RenormOptions opts;
  opts.replicas = spec.replicas;
  std::vector<RenormRow> rows = renorm_trace(spec.p.front(), spec.t.front(), spec.L0, spec.factor,
                                             spec.k_max, spec.seed, opts);
  std::ostringstream csv;
  csv << spec_header(spec) << "# L0=" << spec.L0 << " factor=" << spec.factor
      << " k_max=" << spec.k_max << "\n";
  csv << "k,L,q_hat,ci_lo,ci_hi,failures,replicas,bound_from_prev,bound_satisfied,master_seed\n";
  for (const RenormRow& row : rows)
    csv << row.k << "," << row.L << "," << fmt17(row.q_hat) << "," << fmt17(row.ci_lo) << ","
        << fmt17(row.ci_hi) << "," << row.failures << "," << row.replicas << ","
        << fmt17(row.bound_from_prev) << "," << int(row.bound_satisfied) << "," << spec.seed
        << "\n";
  return csv.str();
}

}  // namespace detail

// Validates, runs the command, persists artifacts atomically, prints a
// one-line summary. Throws std::invalid_argument on validation failure,
// BudgetError when sampling budgets run out, std::ios_base::failure on
// I/O errors; the binary maps these to exit codes 2/3/4.
inline void run(ExperimentSpec spec, std::ostream& log) {
  // certify needs enough replicas for the Wilson upper bound at zero
  // failures to clear epsilon; everything else gets a lighter default
  if (spec.replicas == 0) spec.replicas = spec.command == "certify" ? 4096 : 1024;
  validate_spec(spec);
  if (spec.threads > 0) {
    setenv("MAJPERC_THREADS", std::to_string(spec.threads).c_str(), 1);
  }
  if (spec.out.empty())
    spec.out = spec.command + (spec.command == "oracle" && spec.check == "fkg" ? ".txt"
                               : spec.command == "certify"                     ? ".txt"
                                                                               : ".csv");
  std::string body, summary;
  std::vector<std::pair<double, double>> curve;
  if (spec.command == "evolve") body = detail::run_evolve(spec);
  else if (spec.command == "sweep") body = detail::run_sweep(spec, spec.svg.empty() ? nullptr : &curve);
  else if (spec.command == "pc-curve")
    body = detail::run_pc_curve(spec, spec.svg.empty() ? nullptr : &curve);
  else if (spec.command == "cov") body = detail::run_cov(spec);
  else if (spec.command == "fixation") body = detail::run_fixation(spec);
  else if (spec.command == "couple") body = detail::run_couple(spec);
  else if (spec.command == "enhance") body = detail::run_enhance(spec);
  else if (spec.command == "oracle") body = detail::run_oracle(spec, &summary);
  else if (spec.command == "certify") body = detail::run_certify(spec, &summary);
  else if (spec.command == "renorm") body = detail::run_renorm(spec);
  detail::atomic_write(spec.out, body);
  if (!spec.svg.empty() && !curve.empty())
    detail::atomic_write(spec.svg, detail::svg_curve(curve, spec.command == "pc-curve" ? "t" : "p",
                                                     spec.command == "pc-curve" ? "p_star" : "p_hat"));
  log << (summary.empty() ? "wrote " + spec.out : summary + " (" + spec.out + ")") << "\n";
}

}  // namespace majperc
