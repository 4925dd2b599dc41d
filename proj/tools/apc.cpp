// apc: additive-combinatorics pipeline CLI.  Lemma verification suites,
// density-increment pipeline runs, extremal searches and bound reports.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "apsift/checks.hpp"
#include "apsift/extremal.hpp"
#include "apsift/increment.hpp"
#include "apsift/trace.hpp"

namespace {

std::vector<std::int64_t> parse_group_descriptor(const std::string& s) {
  // q^n | N | N1xN2x...
  auto caret = s.find('^');
  if (caret != std::string::npos) {
    std::int64_t q = std::stoll(s.substr(0, caret));
    std::int64_t n = std::stoll(s.substr(caret + 1));
    if (q < 2 || n < 1) throw std::invalid_argument("bad group descriptor: " + s);
    return std::vector<std::int64_t>(static_cast<std::size_t>(n), q);
  }
  std::vector<std::int64_t> factors;
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto next = s.find('x', pos);
    if (next == std::string::npos) next = s.size();
    factors.push_back(std::stoll(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  if (factors.empty()) throw std::invalid_argument("bad group descriptor: " + s);
  return factors;
}

int max_threads_from_env() {
  const char* v = std::getenv("APC_THREADS");
  if (!v) return 1;
  int t = std::atoi(v);
  return t >= 1 ? t : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"additive-combinatorics density-increment pipeline"};
  app.require_subcommand(1);
  (void)max_threads_from_env();  // parallelism cap; all current paths are single-threaded

  // verify
  auto* verify = app.add_subcommand("verify", "run seeded property suites");
  std::string suite = "all";
  std::uint64_t seed = 42;
  std::int64_t size_cap = 1 << 20;
  verify->add_option("--suite", suite, "harmonic|bohr|sifting|periodicity|increment|all")
      ->check(CLI::IsMember({"harmonic", "bohr", "sifting", "periodicity", "increment", "all"}));
  verify->add_option("--seed", seed, "RNG seed");
  verify->add_option("--size-cap", size_cap, "largest group size the generators may use");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "run the density-increment drive");
  std::string mode, group_desc, set_path, config_path, out_path;
  pipeline->add_option("--mode", mode, "ff|cyclic")
      ->required()
      ->check(CLI::IsMember({"ff", "cyclic"}));
  pipeline->add_option("--group", group_desc, "group descriptor (q^n, N, or N1xN2x...)")
      ->required();
  pipeline->add_option("--set", set_path, "input set file")->required();
  pipeline->add_option("--config", config_path, "JSON config overrides");
  pipeline->add_option("--out", out_path, "trace output path (default: stdout)");
  std::string dump_autocorr;
  pipeline->add_option("--dump-autocorr", dump_autocorr,
                       "write mu_A o mu_A of the input as index,value CSV");
  std::uint64_t pipe_seed = 1;
  pipeline->add_option("--seed", pipe_seed, "RNG seed");

  // search
  auto* search = app.add_subcommand("search", "extremal progression-free search");
  std::int64_t search_n = 0;
  std::string search_group;
  std::int64_t budget = 50'000'000;
  double curve_c = 0.2;
  search->add_option("--n", search_n, "interval length N");
  search->add_option("--group", search_group, "group descriptor");
  search->add_option("--budget", budget, "node budget");
  search->add_option("--c", curve_c, "constant for the reported bound curves");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "brute-force oracles");
  auto* oracle_inc = oracle->add_subcommand("increment", "best density increment over subspaces");
  std::string oracle_set;
  int oracle_codim = 1;
  oracle_inc->add_option("--set", oracle_set, "input set file")->required();
  oracle_inc->add_option("--codim", oracle_codim, "max codimension");

  // bound
  auto* bound = app.add_subcommand("bound", "evaluate the headline bound curves");
  double bound_n = 0, bound_c = 1.0;
  bound->add_option("--n", bound_n, "N")->required();
  bound->add_option("--c", bound_c, "constant c");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*verify) {
      auto checks = apsift::checks::run_suite(suite, seed, size_cap);
      bool all = true;
      for (const auto& c : checks) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
        all = all && c.pass;
      }
      return all ? 0 : 1;
    }

    if (*pipeline) {
      auto [g_file, a] = apsift::read_set_file(set_path);
      apsift::GroupSpec g = apsift::GroupSpec::make(parse_group_descriptor(group_desc));
      if (g != g_file) {
        std::cerr << "error: --group disagrees with the set file header\n";
        return 2;
      }
      apsift::PipelineConfig cfg;
      cfg.seed = pipe_seed;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::invalid_argument("cannot open config: " + config_path);
        nlohmann::json j;
        in >> j;
        cfg = apsift::config_from_json(j);
      }
      if (!dump_autocorr.empty()) {
        apsift::ProbMeasure mu = apsift::normalized_indicator(g, a);
        apsift::GroupFn gg = apsift::convolve(mu.fn, mu.fn, apsift::Conv::circ);
        std::ofstream dump(dump_autocorr);
        if (!dump) throw std::invalid_argument("cannot write: " + dump_autocorr);
        dump << apsift::fn_to_csv(gg);
      }
      auto tr = apsift::drive(g, a, mode, cfg);
      auto j = apsift::trace_to_json(tr, cfg);
      if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        std::ofstream out(out_path);
        if (!out) throw std::invalid_argument("cannot write trace: " + out_path);
        out << j.dump(2) << "\n";
      }
      if (tr.status == "complete") return 0;
      if (tr.status == "falsified") return 1;
      return 3;
    }

    if (*search) {
      if ((search_n > 0) == !search_group.empty()) {
        std::cerr << "error: give exactly one of --n or --group\n";
        return 2;
      }
      std::cout << "domain,max_size,exact,behrend_size,behrend_ref,curve_main,curve_ff\n";
      if (search_n > 0) {
        auto r = apsift::max_apfree_interval(search_n, budget, false);
        auto beh = apsift::behrend_lower(search_n);
        double nn = static_cast<double>(search_n);
        double beh_ref = std::exp(-curve_c * std::sqrt(std::log(nn))) * nn;
        double cm = 0, cf = 0;
        if (search_n >= 16) {
          auto bc = apsift::bound_curves(nn, curve_c);
          cm = bc.main;
          cf = bc.ff;
        }
        std::cout << "interval:" << search_n << ',' << r.size << ',' << (r.exact ? 1 : 0) << ','
                  << beh.size() << ',' << beh_ref << ',' << cm << ',' << cf << "\n";
      } else {
        apsift::GroupSpec g = apsift::GroupSpec::make(parse_group_descriptor(search_group));
        auto r = apsift::max_apfree_group(g, budget, false);
        double cm = 0, cf = 0;
        if (g.size() >= 16) {
          auto bc = apsift::bound_curves(static_cast<double>(g.size()), curve_c);
          cm = bc.main;
          cf = bc.ff;
        }
        std::cout << "group:" << g.descriptor() << ',' << r.size << ',' << (r.exact ? 1 : 0)
                  << ",,," << cm << ',' << cf << "\n";
      }
      return 0;
    }

    if (*oracle_inc) {
      auto [g, a] = apsift::read_set_file(oracle_set);
      auto fam = apsift::subspace_family(g, oracle_codim);
      auto best = apsift::increment_oracle(g, a, fam);
      apsift::ordered_json j;
      j["host_index"] = best.host_index;
      j["host_size"] = best.host.size();
      j["translate"] = g.residues(best.translate);
      j["density"] = best.density;
      j["base_density"] = static_cast<double>(a.size()) / static_cast<double>(g.size());
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*bound) {
      auto bc = apsift::bound_curves(bound_n, bound_c);
      std::cout << "main " << bc.main << "\nff " << bc.ff << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const apsift::internal_error& e) {
    std::cerr << "falsified: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
