#pragma once

// Command-line front end. Every stochastic run embeds its model, seed and
// worker count so any output can be replayed; identical invocations produce
// identical bytes.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "acceptance.hpp"
#include "hazard.hpp"
#include "limitchain.hpp"
#include "parallel.hpp"
#include "pointproc.hpp"
#include "ram.hpp"
#include "records.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace sieve::cli {

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

inline std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) out.push_back(std::stod(p));
  return out;
}

inline std::vector<long long> parse_longs(const std::string& s) {
  std::vector<long long> out;
  for (const auto& p : split(s, ',')) out.push_back(std::stoll(p));
  return out;
}

// "gem:1", "beta:2:3", "atoms:0.3,0.7:0.5,0.5", or a JSON object
inline HazardModel parse_model(const std::string& spec) {
  if (spec.empty()) throw std::invalid_argument("--model is required");
  if (spec.front() == '{') return HazardModel::from_json(nlohmann::json::parse(spec));
  auto parts = split(spec, ':');
  if (parts[0] == "gem" && parts.size() == 2) return HazardModel::gem(std::stod(parts[1]));
  if (parts[0] == "beta" && parts.size() == 3)
    return HazardModel::beta(std::stod(parts[1]), std::stod(parts[2]));
  if (parts[0] == "atoms" && parts.size() == 3)
    return HazardModel::atoms(parse_doubles(parts[1]), parse_doubles(parts[2]), true);
  throw std::invalid_argument("unrecognized model spec '" + spec +
                              "' (use gem:T, beta:A:B, atoms:H1,H2:W1,W2, or JSON)");
}

inline nlohmann::json finite_or_string(double v) {
  if (std::isinf(v)) return v > 0 ? "infinity" : "-infinity";
  return v;
}

struct Output {
  std::ostream& stdout_stream;
  std::string path;  // empty: write to stdout

  void write(const std::string& text) const {
    if (path.empty()) {
      stdout_stream << text;
      if (text.empty() || text.back() != '\n') stdout_stream << '\n';
    } else {
      std::ofstream f(path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
      f << text;
      if (text.empty() || text.back() != '\n') f << '\n';
    }
  }
};

}  // namespace detail

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"residual allocation sampling: simulation, exact laws, and verification"};
  app.require_subcommand(1);

  std::string model_spec;
  std::string format = "json";
  std::string out_path;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  // simulate
  auto* sim = app.add_subcommand("simulate", "sample configurations and their statistics");
  long long sim_n = 0;
  std::uint64_t sim_reps = 1;
  long long sim_maxj = 5;
  sim->add_option("--model", model_spec, "hazard model")->required();
  sim->add_option("--n", sim_n, "sample size")->required();
  sim->add_option("--replicates", sim_reps, "number of replicates");
  sim->add_option("--seed", seed, "rng seed")->required();
  sim->add_option("--workers", workers, "worker threads");
  sim->add_option("--format", format, "json|csv");
  sim->add_option("--out", out_path, "output path (default stdout)");
  sim->add_option("--max-j", sim_maxj, "largest small-count index reported");

  // exact
  auto* exact = app.add_subcommand("exact", "finite-sample probabilities and potentials");
  std::string op;
  long long arg_i = 0, arg_j = 0, arg_k = 0, arg_l = 0, arg_m = 0, arg_n = 0, arg_n2 = 0;
  std::string arg_counts;
  double arg_theta = 0.0;
  exact->add_option("--model", model_spec, "hazard model")->required();
  exact->add_option("--op", op, "operation")->required();
  exact->add_option("--i", arg_i, "moment index i");
  exact->add_option("--j", arg_j, "index j");
  exact->add_option("--k", arg_k, "index k");
  exact->add_option("--l", arg_l, "chain state l");
  exact->add_option("--m", arg_m, "chain state m");
  exact->add_option("--n", arg_n, "sample size");
  exact->add_option("--n2", arg_n2, "target state for transitions");
  exact->add_option("--counts", arg_counts, "comma-separated count vector");
  exact->add_option("--out", out_path, "output path (default stdout)");

  // limit
  auto* limit = app.add_subcommand("limit", "closed-form limit laws");
  limit->add_option("--model", model_spec, "hazard model")->required();
  limit->add_option("--op", op, "law")->required();
  limit->add_option("--j", arg_j, "index j");
  limit->add_option("--k", arg_k, "index k");
  limit->add_option("--m", arg_m, "state m");
  limit->add_option("--n", arg_n, "target state n");
  limit->add_option("--theta", arg_theta, "gem parameter for closed forms");
  limit->add_option("--counts", arg_counts, "comma-separated count tuple");
  limit->add_option("--out", out_path, "output path (default stdout)");

  // interleave
  auto* inter = app.add_subcommand("interleave", "one interleaving trace of the limit picture");
  long long inter_bars = 3, inter_stars = 5;
  inter->add_option("--model", model_spec, "hazard model")->required();
  inter->add_option("--k", inter_bars, "renewal points to resolve");
  inter->add_option("--j", inter_stars, "birth gaps to resolve");
  inter->add_option("--seed", seed, "rng seed")->required();
  inter->add_option("--out", out_path, "output path (default stdout)");

  // records
  auto* rec = app.add_subcommand("records", "record chains and occupation solvers");
  std::string p0_spec = "geometric:0.5";
  std::string flavor = "weak";
  long long rec_jmax = 10;
  std::uint64_t rec_reps = 1;
  long long rec_steps = 1000000;
  rec->add_option("--p0", p0_spec, "initial law: geometric:S, entrance:MODEL, list:P1,P2,...");
  rec->add_option("--op", op, "weak|strict|occupation|potential|hitting|simulate")->required();
  rec->add_option("--i", arg_i, "from state");
  rec->add_option("--j", arg_j, "to state");
  rec->add_option("--jmax", rec_jmax, "solve up to this state");
  rec->add_option("--flavor", flavor, "weak|strict (simulate)");
  rec->add_option("--steps", rec_steps, "draw budget per replicate (simulate)");
  rec->add_option("--replicates", rec_reps, "replicates (simulate)");
  rec->add_option("--seed", seed, "rng seed (simulate)");
  rec->add_option("--out", out_path, "output path (default stdout)");

  // identities
  auto* ident = app.add_subcommand("identities", "pure numeric identity residuals");
  ident->add_option("--out", out_path, "output path (default stdout)");

  // verify
  auto* verify = app.add_subcommand("verify", "run verification suites, emit a manifest");
  std::string suite_name = "all";
  std::uint64_t verify_seed = 42;
  verify->add_option("--suite", suite_name, "suite name or 'all'");
  verify->add_option("--seed", verify_seed, "rng seed (acceptance default 42)");
  verify->add_option("--workers", workers, "worker threads");
  verify->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  detail::Output sink{out, out_path};

  try {
    if (sim->parsed()) {
      auto model = detail::parse_model(model_spec);
      struct Row {
        std::uint64_t id;
        Configuration cfg;
        SampleStatistics stats;
      };
      std::uint64_t per = sim_reps / workers;
      std::uint64_t extra = sim_reps % workers;
      std::vector<std::uint64_t> base(workers, 0);
      for (unsigned w = 1; w < workers; ++w)
        base[w] = base[w - 1] + per + (w - 1 < extra ? 1 : 0);
      std::vector<std::vector<Row>> rows(workers);
      auto parts = run_replicates<std::vector<Row>>(
          sim_reps, workers, seed, [&](std::vector<Row>& acc, Rng& rng) {
            Row r;
            r.cfg = sample_configuration(model, sim_n, rng);
            r.stats = sample_statistics(r.cfg, sim_maxj);
            acc.push_back(std::move(r));
          });
      for (unsigned w = 0; w < workers; ++w) {
        for (std::uint64_t i = 0; i < parts[w].size(); ++i) parts[w][i].id = base[w] + i;
        rows[w] = std::move(parts[w]);
      }
      if (format == "csv") {
        std::ostringstream csv;
        csv << "# model=" << model.to_json().dump() << " seed=" << seed << " n=" << sim_n
            << " replicates=" << sim_reps << " workers=" << workers << "\n";
        csv << "replicate,n,m_max,l";
        csv << ",k0";
        for (long long j = 1; j <= sim_maxj; ++j) csv << ",k" << j;
        csv << "\n";
        for (const auto& worker_rows : rows)
          for (const auto& r : worker_rows) {
            csv << r.id << "," << r.cfg.n << "," << r.cfg.m_max << "," << r.stats.ties_with_max
                << "," << r.stats.missing_values;
            for (long long v : r.stats.small_counts) csv << "," << v;
            csv << "\n";
          }
        sink.write(csv.str());
      } else {
        nlohmann::json j;
        j["command"] = "simulate";
        j["model"] = model.to_json();
        j["n"] = sim_n;
        j["replicates"] = sim_reps;
        j["seed"] = seed;
        j["workers"] = workers;
        j["rows"] = nlohmann::json::array();
        for (const auto& worker_rows : rows)
          for (const auto& r : worker_rows) {
            nlohmann::json row = r.cfg.to_json();
            row["replicate"] = r.id;
            row["l"] = r.stats.ties_with_max;
            row["k0"] = r.stats.missing_values;
            row["k"] = r.stats.small_counts;
            j["rows"].push_back(std::move(row));
          }
        sink.write(j.dump(2));
      }
      return 0;
    }

    if (exact->parsed() || limit->parsed()) {
      auto model = detail::parse_model(model_spec);
      nlohmann::json args;
      double value = kNaN;
      nlohmann::json extra;
      bool have_extra = false;

      auto limit_value = [&](const std::string& name) -> std::optional<double> {
        LimitLaw law(model);
        if (name == "entrance") {
          args["m"] = arg_m;
          return law.entrance_pmf(arg_m);
        }
        if (name == "entrance-tail") {
          args["m"] = arg_m;
          return law.entrance_tail(arg_m);
        }
        if (name == "transition") {
          args["m"] = arg_m;
          args["n"] = arg_n;
          return law.transition_pmf(arg_m, arg_n);
        }
        if (name == "fdd") {
          auto counts = detail::parse_longs(arg_counts);
          args["counts"] = counts;
          return law.fdd_counts_pmf(counts);
        }
        if (name == "gap") {
          args["j"] = arg_j;
          args["k"] = arg_k;
          return arg_k == 0 ? 1.0 : law.gap_tail(arg_j, arg_k);
        }
        if (name == "hitting") {
          args["j"] = arg_j;
          return law.gap_hitting(arg_j);
        }
        if (name == "meangap") {
          args["j"] = arg_j;
          return law.mean_gap(arg_j);
        }
        if (name == "meanq") {
          args["j"] = arg_j;
          return law.mean_tail_count(arg_j);
        }
        if (name == "n0tail") {
          args["k"] = arg_k;
          return law.n0_tail_integral(arg_k);
        }
        if (name == "n0tail-gem") {
          args["k"] = arg_k;
          args["theta"] = arg_theta;
          return LimitLaw::n0_tail_gem(arg_theta, arg_k);
        }
        if (name == "meank") {
          args["j"] = arg_j;
          return law.mean_small_count(arg_j);
        }
        if (name == "meank0") return law.mean_empty_count();
        return std::nullopt;
      };

      if (auto v = limit_value(op)) {
        value = *v;
      } else if (op == "mu") {
        args["i"] = arg_i;
        args["j"] = arg_j;
        value = mu_moment(model, arg_i, arg_j);
      } else if (op == "mulog") {
        value = mu_log(model);
      } else if (op == "config-prob") {
        auto counts = detail::parse_longs(arg_counts);
        args["counts"] = counts;
        value = exact_config_probability(model, counts);
      } else if (op == "qstar") {
        args["l"] = arg_l;
        args["m"] = arg_m;
        value = qstar_transition(model, arg_l, arg_m);
      } else if (op == "decrement") {
        args["l"] = arg_l;
        args["m"] = arg_m;
        value = decrement_transition(model, arg_l, arg_m);
      } else if (op == "potential") {
        args["n"] = arg_n;
        args["m"] = arg_m;
        value = finite_potential(model, arg_n, arg_m);
      } else if (op == "reversed") {
        args["n"] = arg_n;
        args["l"] = arg_l;
        args["m"] = arg_m;
        auto table = finite_potential_table(model, arg_n);
        value = reversed_transition(model, table, arg_l, arg_m);
      } else if (op == "gaps-from-counts") {
        auto counts = detail::parse_longs(arg_counts);
        args["counts"] = counts;
        long long total = 0;
        for (long long c : counts) total += c;
        extra = gaps_from_counts(counts, total);
        have_extra = true;
      } else {
        throw std::invalid_argument("unknown op '" + op + "'");
      }

      nlohmann::json j;
      j["command"] = exact->parsed() ? "exact" : "limit";
      j["model"] = model.to_json();
      j["law"] = op;
      j["args"] = args;
      if (have_extra)
        j["value"] = extra;
      else
        j["value"] = detail::finite_or_string(value);
      sink.write(j.dump(2));
      return 0;
    }

    if (inter->parsed()) {
      auto model = detail::parse_model(model_spec);
      Rng rng(seed);
      YuleProcess yule(rng);
      RenewalProcess renewal(model, DelayMode::stationary, rng);
      auto seq = build_limit_sequences(yule, renewal, inter_bars, inter_stars);
      nlohmann::json j;
      j["command"] = "interleave";
      j["model"] = model.to_json();
      j["seed"] = seed;
      j["k"] = inter_bars;
      j["j"] = inter_stars;
      j["symbols"] = seq.trace.symbols;
      j["q"] = seq.q;
      j["n"] = seq.n;
      j["censored"] = seq.trace.censored_last_count;
      j["censored_tail"] = seq.censored_tail;
      j["g"] = seq.g;
      sink.write(j.dump(2));
      return 0;
    }

    if (rec->parsed()) {
      auto parts = detail::split(p0_spec, ':');
      InitialLaw law;
      std::function<long long(Rng&)> draw;
      if (parts[0] == "geometric" && parts.size() == 2) {
        double s = std::stod(parts[1]);
        if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("geometric parameter in (0,1)");
        law = InitialLaw{
            [s](long long j) { return s * std::pow(1.0 - s, static_cast<double>(j - 1)); },
            [s](long long i) { return std::pow(1.0 - s, static_cast<double>(i - 1)); }};
        draw = [s](Rng& rng) { return 1 + rng.geometric_failures(s); };
      } else if (parts[0] == "entrance" && parts.size() >= 2) {
        std::string rest = p0_spec.substr(std::string("entrance:").size());
        auto model = detail::parse_model(rest);
        auto shared = std::make_shared<LimitLaw>(model);
        law = InitialLaw{[shared](long long j) { return shared->entrance_pmf(j); },
                         [shared](long long i) { return shared->entrance_tail(i - 1); }};
        draw = [shared](Rng& rng) { return shared->sample_entrance(rng); };
      } else if (parts[0] == "list" && parts.size() == 2) {
        auto probs = detail::parse_doubles(parts[1]);
        law = InitialLaw{[probs](long long j) {
                           return (j >= 1 && j <= static_cast<long long>(probs.size()))
                                      ? probs[static_cast<std::size_t>(j) - 1]
                                      : 0.0;
                         },
                         nullptr};
      } else {
        throw std::invalid_argument("unrecognized --p0 '" + p0_spec + "'");
      }

      nlohmann::json j;
      j["command"] = "records";
      j["p0"] = p0_spec;
      j["op"] = op;
      if (op == "weak") {
        j["args"] = {{"i", arg_i}, {"j", arg_j}};
        j["value"] = weak_record_transition(law, arg_i, arg_j);
      } else if (op == "strict") {
        j["args"] = {{"i", arg_i}, {"j", arg_j}};
        j["value"] = strict_record_transition(law, arg_i, arg_j);
      } else if (op == "occupation") {
        auto spec = weak_record_spec(law);
        auto occ = occupation_law(spec, arg_j);
        j["args"] = {{"j", arg_j}};
        j["value"] = {{"hitting", occ.hitting}, {"stay", occ.stay}, {"mean", occ.mean}};
      } else if (op == "potential") {
        j["args"] = {{"jmax", rec_jmax}};
        j["value"] = solve_potential(weak_record_spec(law), rec_jmax);
      } else if (op == "hitting") {
        j["args"] = {{"jmax", rec_jmax}};
        j["value"] = solve_hitting(weak_record_spec(law), rec_jmax);
      } else if (op == "simulate") {
        if (!draw) throw std::invalid_argument("--p0 list does not support simulation");
        RecordFlavor fl = flavor == "strict" ? RecordFlavor::strict : RecordFlavor::weak;
        Rng rng(seed);
        j["seed"] = seed;
        j["args"] = {{"flavor", flavor}, {"jmax", rec_jmax}, {"replicates", rec_reps}};
        j["paths"] = nlohmann::json::array();
        for (std::uint64_t r = 0; r < rec_reps; ++r) {
          auto res = simulate_record_chain(draw, fl, rec_steps, rec_jmax, rng);
          j["paths"].push_back({{"path", res.path},
                                {"occupation", res.occupation},
                                {"complete", res.complete}});
        }
      } else {
        throw std::invalid_argument("unknown op '" + op + "'");
      }
      sink.write(j.dump(2));
      return 0;
    }

    if (ident->parsed()) {
      auto result = acceptance::run_identities();
      sink.write(acceptance::to_json(result).dump(2));
      return result.pass ? 0 : 2;
    }

    if (verify->parsed()) {
      std::vector<acceptance::SuiteResult> results;
      if (suite_name == "all") {
        results = acceptance::run_all(verify_seed, workers);
      } else {
        results.push_back(acceptance::run_suite(suite_name, verify_seed, workers));
      }
      auto manifest = acceptance::manifest(results, verify_seed);
      sink.write(manifest.dump(2));
      return manifest["pass"].get<bool>() ? 0 : 2;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace sieve::cli
