// Batch experiment runner for majority-dynamics percolation studies.
// Each subcommand mirrors the key=value spec format; `run` executes a
// spec file directly. Exit codes: 0 ok, 2 validation, 3 budget, 4 I/O.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "majperc/cli.hpp"

namespace {

struct RawArgs {
  std::vector<std::pair<std::string, std::string>> kv;
};

void add_option(CLI::App* cmd, RawArgs& raw, const std::string& key,
                const std::string& help) {
  cmd->add_option_function<std::string>(
      "--" + key, [&raw, key](const std::string& v) { raw.kv.push_back({key, v}); }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"majperc: majority-dynamics percolation experiments"};
  app.require_subcommand(1);

  struct CmdDef {
    const char* name;
    const char* help;
  };
  const CmdDef defs[] = {
      {"evolve", "Single trajectory; CSV columns: time,site_x,site_y,old,new"},
      {"sweep", "Crossing probability over p/t lists; CSV columns: "
                "p,t,n,lambda,p_hat,ci_lo,ci_hi,successes,replicas,master_seed"},
      {"pc-curve", "Threshold p*(t) per t; CSV columns: "
                   "t,n,lambda,p_star,ci_lo,ci_hi,replicas_used,master_seed"},
      {"cov", "Two-point covariance per distance; CSV columns: "
              "p,t,dist,cov_hat,ci_lo,ci_hi,replicas,master_seed"},
      {"fixation", "Quiescence times; CSV columns: "
                   "replica_id,quiescence_time,total_flips,timed_out"},
      {"couple", "Order-violation counts; CSV columns: "
                 "replica_id,kind,order_violations,lower_ones,upper_ones"},
      {"enhance", "Chain stability; CSV columns: "
                  "instance_seed,chains_checked,connectors_checked,violations"},
      {"oracle", "Exact small-graph law (CSV columns: config_bits,mass; tail in "
                 "header) or --check fkg correlation report"},
      {"certify", "Crossing-failure certificate report (text block)"},
      {"renorm", "Multi-scale crossing-failure trace; CSV columns: "
                 "k,L,q_hat,ci_lo,ci_hi,failures,replicas,bound_from_prev,"
                 "bound_satisfied,master_seed"},
  };

  std::vector<std::unique_ptr<RawArgs>> raws;
  std::vector<std::pair<CLI::App*, RawArgs*>> cmds;
  for (const CmdDef& def : defs) {
    CLI::App* cmd = app.add_subcommand(def.name, def.help);
    raws.push_back(std::make_unique<RawArgs>());
    RawArgs& raw = *raws.back();
    add_option(cmd, raw, "p", "density or comma list in [0,1] (default 0.5)");
    add_option(cmd, raw, "t", "time or comma list >= 0 (default 0)");
    add_option(cmd, raw, "n", "window short side (default 32)");
    add_option(cmd, raw, "lambda", "window aspect ratio (default 2)");
    add_option(cmd, raw, "replicas", "replica count (default 1024; certify 4096)");
    add_option(cmd, raw, "seed", "master seed (default 0)");
    add_option(cmd, raw, "policy", "free | frozen0 | frozen1 | periodic");
    add_option(cmd, raw, "out", "output path (default <command>.csv/.txt)");
    add_option(cmd, raw, "svg", "optional SVG curve plot (pc-curve, sweep)");
    add_option(cmd, raw, "threads", "worker cap; sets MAJPERC_THREADS");
    add_option(cmd, raw, "grid", "oracle grid WxH, at most 9 sites");
    add_option(cmd, raw, "check", "oracle: law | fkg");
    add_option(cmd, raw, "kind", "couple: monotone | continuity");
    add_option(cmd, raw, "p2", "couple monotone upper density (default p+0.2)");
    add_option(cmd, raw, "delta", "couple continuity density increment");
    add_option(cmd, raw, "t_max", "fixation horizon (default 64)");
    add_option(cmd, raw, "dist", "cov distances, comma list (default 1)");
    add_option(cmd, raw, "target", "pc-curve crossing probability (default 0.5)");
    add_option(cmd, raw, "tol", "pc-curve bracket width (default 0.004)");
    add_option(cmd, raw, "L0", "renorm base scale (default 16)");
    add_option(cmd, raw, "factor", "renorm scale factor, 3 or 4");
    add_option(cmd, raw, "k_max", "renorm recursion depth (default 1)");
    cmds.push_back({cmd, &raw});
  }

  std::string spec_path;
  CLI::App* run_cmd = app.add_subcommand("run", "Execute a key=value spec file");
  run_cmd->add_option("specfile", spec_path, "flat key=value file, # comments")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    majperc::ExperimentSpec spec;
    if (run_cmd->parsed()) {
      spec = majperc::parse_spec_file(spec_path);
    } else {
      for (auto& [cmd, raw] : cmds) {
        if (!cmd->parsed()) continue;
        spec.command = cmd->get_name();
        for (auto& [key, value] : raw->kv) majperc::apply_spec_key(spec, key, value);
      }
    }
    majperc::run(std::move(spec), std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "majperc: " << e.what() << "\n";
    return 2;
  } catch (const majperc::BudgetError& e) {
    std::cerr << "majperc: " << e.what() << "\n";
    return 3;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "majperc: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "majperc: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
