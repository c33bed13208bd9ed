// Command-line surface: validation, TV and truncated CK distances, continuity
// bounds, approximate-bisimulation checks, product encoders and the CSV
// sweeps behind the two shipped figures.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ckdist/ckdist.hpp"

namespace {

std::string fmt(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return buf;
}

std::string fmt_csv(double value) { return fmt(value, 17); }

ckdist::TraceOptions trace_options(double prune_threshold) {
  ckdist::TraceOptions options;
  options.prune_threshold = prune_threshold;
  if (const char* env = std::getenv("CKDIST_NODE_BUDGET")) {
    char* end = nullptr;
    const unsigned long long parsed = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || parsed == 0)
      throw ckdist::Error(ckdist::Errc::ParseError,
                          "CKDIST_NODE_BUDGET must be a positive integer");
    options.node_budget = static_cast<std::size_t>(parsed);
  }
  return options;
}

std::vector<double> parse_params(const std::string& text) {
  std::vector<double> params;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string piece =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      params.push_back(std::stod(piece, &used));
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw ckdist::Error(ckdist::Errc::ParseError,
                          "cannot parse parameter '" + piece + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return params;
}

std::string state_set_names(const ckdist::LabeledMarkovChain& chain,
                            std::uint32_t mask) {
  std::string out = "{";
  bool first = true;
  for (std::size_t s = 0; s < chain.num_states(); ++s) {
    if (!(mask & (1u << s))) continue;
    if (!first) out += ",";
    out += chain.states()[s];
    first = false;
  }
  return out + "}";
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ckdist::Error(ckdist::Errc::IoError, "cannot write '" + path + "'");
  return out;
}

void write_figure2(std::ostream& out) {
  out << "m,delta,bound\n";
  for (std::size_t m = 2; m <= 10; ++m)
    for (int j = 1; j <= 200; ++j) {
      const double delta = (2.0 * j - 1.0) / 400.0;  // midpoints of 200 bins in (0,1)
      out << m << ',' << fmt_csv(delta) << ','
          << fmt_csv(ckdist::ck_upper_bound(delta, m)) << '\n';
    }
}

void write_figure3(std::ostream& out, const ckdist::TraceOptions& options) {
  out << "epsilon,k,s_k,bound\n";
  const auto reference = ckdist::onegin();
  for (const double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto biased = ckdist::bias_onegin(eps);
    const auto report = ckdist::ck_truncated(reference, biased, 15, options);
    const double bound = ckdist::ck_upper_bound(eps, 2);
    for (const auto& row : report.per_horizon)
      out << fmt_csv(eps) << ',' << row.horizon << ',' << fmt_csv(row.partial_sum)
          << ',' << fmt_csv(bound) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cantor-Kantorovich distances between labeled Markov chains"};
  app.require_subcommand(1);
  int digits = 12;
  app.add_option("--digits", digits, "significant digits for numeric output")
      ->capture_default_str();

  std::string chain_a, chain_b, relation_path, out_path, params_text;
  std::optional<int> horizon;
  std::optional<double> precision, epsilon, delta, d_lower, d_upper, eps_threshold;
  std::optional<std::int64_t> bound_k;
  double prune_threshold = 0.0;
  std::size_t bound_m = 0;
  int figure = 0;
  bool show_trace = false;

  auto* cmd_validate = app.add_subcommand("validate", "Check a chain file");
  cmd_validate->add_option("chain", chain_a, "chain file")->required();

  auto* cmd_tv = app.add_subcommand("tv", "Finite-horizon total variation");
  cmd_tv->add_option("chain_a", chain_a)->required();
  cmd_tv->add_option("chain_b", chain_b)->required();
  cmd_tv->add_option("--horizon", horizon, "word length k")->required();
  cmd_tv->add_option("--prune-threshold", prune_threshold,
                     "drop words below this mass in both chains (uncertified)");

  auto* cmd_ck = app.add_subcommand("ck", "Truncated CK distance with error bound");
  cmd_ck->add_option("chain_a", chain_a)->required();
  cmd_ck->add_option("chain_b", chain_b)->required();
  cmd_ck->add_option("--horizon", horizon, "truncation horizon k");
  cmd_ck->add_option("--precision", precision, "target precision; picks k");
  cmd_ck->add_option("--prune-threshold", prune_threshold,
                     "drop words below this mass in both chains (uncertified)");
  cmd_ck->add_flag("--trace", show_trace, "print the per-horizon rows");

  auto* cmd_bound = app.add_subcommand("bound", "Continuity-bound calculators");
  cmd_bound->add_option("--delta", delta, "bisimulation tolerance");
  cmd_bound->add_option("--d-lower", d_lower, "known lower bound on the CK distance");
  cmd_bound->add_option("--d-upper", d_upper, "known upper bound on the CK distance");
  cmd_bound->add_option("--eps", eps_threshold, "trace-probability tolerance");
  cmd_bound->add_option("--m", bound_m, "alphabet size")->required();
  cmd_bound->add_option("--k", bound_k, "horizon");

  auto* cmd_bisim = app.add_subcommand("bisim", "Check an approximate bisimulation");
  cmd_bisim->add_option("chain_a", chain_a)->required();
  cmd_bisim->add_option("chain_b", chain_b)->required();
  cmd_bisim->add_option("relation", relation_path, "relation file")->required();
  cmd_bisim->add_option("--epsilon", epsilon, "tolerance to check against");

  auto* cmd_encode = app.add_subcommand("encode-product", "Write a product encoder");
  cmd_encode->add_option("--params", params_text, "comma-separated parameters")
      ->required();
  cmd_encode->add_option("--out", out_path, "output chain file")->required();

  auto* cmd_sweep = app.add_subcommand("sweep", "CSV sweeps for the figures");
  cmd_sweep->add_option("--figure", figure, "2 or 3")->required();
  cmd_sweep->add_option("--out", out_path, "output CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (cmd_validate->parsed()) {
      const auto chain = ckdist::load_chain(chain_a);
      std::cout << "valid: " << chain.num_states() << " states, "
                << chain.alphabet_size() << " labels\n";
      return 0;
    }

    if (cmd_tv->parsed()) {
      const auto options = trace_options(prune_threshold);
      const auto a = ckdist::load_chain(chain_a);
      const auto b = ckdist::load_chain(chain_b);
      if (*horizon < 1)
        throw ckdist::Error(ckdist::Errc::OutOfRange, "horizon must be at least 1");
      auto level = ckdist::initial_level(a, b);
      for (int i = 2; i <= *horizon; ++i) level = ckdist::extend(level, a, b, options);
      std::cout << "horizon = " << *horizon << '\n';
      std::cout << "tv = " << fmt(level.tv, digits) << '\n';
      std::cout << "tv_halfsum = " << fmt(ckdist::tv_direct(level), digits) << '\n';
      return 0;
    }

    if (cmd_ck->parsed()) {
      if (horizon.has_value() == precision.has_value())
        throw ckdist::Error(ckdist::Errc::ParseError,
                            "give exactly one of --horizon and --precision");
      const auto options = trace_options(prune_threshold);
      const auto a = ckdist::load_chain(chain_a);
      const auto b = ckdist::load_chain(chain_b);
      ckdist::require_same_alphabet(a, b);
      const int k = horizon ? *horizon
                            : ckdist::horizon_for_precision(*precision,
                                                            a.alphabet_size());
      const auto report = ckdist::ck_truncated(a, b, k, options);
      std::cout << "horizon = " << report.horizon << '\n';
      if (show_trace)
        for (const auto& row : report.per_horizon)
          std::cout << "  i = " << row.horizon << "  tv = " << fmt(row.tv, digits)
                    << "  s_i = " << fmt(row.partial_sum, digits) << '\n';
      std::cout << "s_k = " << fmt(report.s_k, digits) << '\n';
      std::cout << "error_bound = " << fmt(report.error_bound, digits) << '\n';
      std::cout << "interval = [" << fmt(report.s_k, digits) << ", "
                << fmt(report.s_k + report.error_bound, digits) << "]\n";
      std::cout << "certified = " << (report.certified ? "true" : "false") << '\n';
      return 0;
    }

    if (cmd_bound->parsed()) {
      const int given = int(delta.has_value()) + int(d_lower.has_value()) +
                        int(d_upper.has_value());
      if (given != 1)
        throw ckdist::Error(ckdist::Errc::ParseError,
                            "give exactly one of --delta, --d-lower, --d-upper");
      if (delta) {
        if (bound_k)
          std::cout << "tv_bisim_bound = "
                    << fmt(ckdist::tv_bisim_bound(*delta, *bound_k), digits) << '\n';
        else
          std::cout << "ck_upper_bound = "
                    << fmt(ckdist::ck_upper_bound(*delta, bound_m), digits) << '\n';
      } else if (d_lower) {
        std::cout << "bisim_impossibility_threshold = "
                  << fmt(ckdist::bisim_impossibility_threshold(*d_lower, bound_m),
                         digits)
                  << '\n';
      } else if (eps_threshold) {
        std::cout << "max_safe_horizon = "
                  << ckdist::max_safe_horizon(*eps_threshold, *d_upper, bound_m)
                  << '\n';
      } else if (bound_k) {
        std::cout << "tv_from_ck_bound = "
                  << fmt(ckdist::tv_from_ck_bound(*d_upper, *bound_k, bound_m), digits)
                  << '\n';
      } else {
        throw ckdist::Error(ckdist::Errc::ParseError,
                            "--d-upper needs --eps (horizon) or --k (TV bound)");
      }
      return 0;
    }

    if (cmd_bisim->parsed()) {
      const auto a = ckdist::load_chain(chain_a);
      const auto b = ckdist::load_chain(chain_b);
      const auto relation = ckdist::load_relation(relation_path, a, b);
      if (epsilon) {
        const auto verdict = ckdist::check_bisim(relation, *epsilon, a, b);
        if (verdict.accepted) {
          std::cout << "verdict = accept\n";
        } else {
          const auto& w = *verdict.witness;
          std::cout << "verdict = reject\n";
          std::cout << "witness_condition = " << w.condition << '\n';
          if (w.condition != 2)
            std::cout << "witness_pair = (" << a.states()[w.s1] << ", "
                      << b.states()[w.s2] << ")\n";
          if (w.condition != 1) {
            std::cout << "witness_set1 = " << state_set_names(a, w.set1) << '\n';
            std::cout << "witness_set2 = " << state_set_names(b, w.set2) << '\n';
            std::cout << "witness_gap = " << fmt(w.gap, digits) << '\n';
          }
        }
      } else {
        const auto minimal = ckdist::minimal_epsilon(relation, a, b);
        std::cout << "minimal_epsilon = " << fmt(minimal.value, digits) << '\n';
        std::cout << "exact_bisimulation = " << (minimal.exact ? "true" : "false")
                  << '\n';
      }
      return 0;
    }

    if (cmd_encode->parsed()) {
      const ckdist::ProductSpec spec{parse_params(params_text)};
      const auto chain = ckdist::encode_product(spec);
      ckdist::save_chain(chain, out_path);
      std::cout << "wrote " << out_path << " (" << chain.num_states() << " states)\n";
      return 0;
    }

    if (cmd_sweep->parsed()) {
      auto out = open_output(out_path);
      if (figure == 2) {
        write_figure2(out);
      } else if (figure == 3) {
        write_figure3(out, trace_options(prune_threshold));
      } else {
        std::cerr << "unknown figure " << figure << " (expected 2 or 3)\n";
        return 1;
      }
      std::cout << "wrote " << out_path << '\n';
      return 0;
    }
  } catch (const ckdist::Error& e) {
    std::cerr << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
