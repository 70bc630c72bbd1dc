#include "bcq/cli.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "bcq/bounds.hpp"
#include "bcq/error.hpp"
#include "bcq/model_io.hpp"
#include "bcq/montecarlo.hpp"
#include "bcq/rates.hpp"
#include "bcq/report_io.hpp"

namespace bcq::cli {
namespace {

using nlohmann::json;

struct Invocation {
  int code = 0;
  std::string payload;
};

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::kHolds:
      return 0;
    case Verdict::kViolated:
      return 1;
    default:
      return 3;
  }
}

std::vector<std::string> labels_of(const SequenceModel& model) {
  std::vector<std::string> out;
  out.reserve(model.block_count());
  for (std::size_t b = 0; b < model.block_count(); ++b) out.push_back(model.block_label(b));
  return out;
}

// "--block all" keeps everything; an index keeps that block only.
std::optional<std::size_t> parse_block(const std::string& spec, std::size_t block_count) {
  if (spec == "all") return std::nullopt;
  std::size_t pos = 0;
  unsigned long idx = 0;
  try {
    idx = std::stoul(spec, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != spec.size() || spec.empty()) {
    throw InvalidInput("--block expects an index or \"all\", got \"" + spec + "\"");
  }
  if (idx >= block_count) {
    throw InvalidInput("block index " + std::to_string(idx) + " out of range (model has " +
                       std::to_string(block_count) + " blocks)");
  }
  return idx;
}

void filter_report(BoundReport& rep, std::optional<std::size_t> block) {
  if (!block) return;
  std::vector<BoundRow> kept;
  for (BoundRow& r : rep.rows) {
    if (r.block == *block) kept.push_back(std::move(r));
  }
  rep.rows = std::move(kept);
}

struct VerifyOpts {
  std::string path, check, block = "all", format = "tsv";
  std::string psi = "auto", phi = "auto";
  long n = 1, N = 1, k = 1;
  long m = -1, H = -1, l = -1;  // -1 = per-check default
  long g = 2, budget = kDefaultWitnessBudget, N_max = 5;
};

// Flags that are meaningful per check id; anything else passed with the
// check is a user error, not something to ignore silently.
const std::map<std::string, std::set<std::string>>& allowed_flags() {
  static const std::map<std::string, std::set<std::string>> kAllowed = {
      {"generalized-bc", {"--m", "--H"}},
      {"switch-identity", {"--N"}},
      {"power-coefficient", {"--n", "--H"}},
      {"markov-coefficient", {"--n"}},
      {"recursion-product", {"--n", "--k", "--H"}},
      {"weighted-series", {"--H"}},
      {"chung-erdos", {"--n"}},
      {"second-moment", {"--n"}},
      {"first-bc", {"--l", "--m", "--phi"}},
      {"second-bc", {"--n", "--N", "--psi"}},
      {"erdos-renyi", {"--n", "--l"}},
      {"kochen-stone", {"--m", "--l", "--g", "--budget", "--N-max"}},
  };
  return kAllowed;
}

Invocation do_verify(const VerifyOpts& o, const CLI::App& cmd, std::ostream& err) {
  auto it = allowed_flags().find(o.check);
  if (it == allowed_flags().end()) {
    std::string known;
    for (const auto& [id, flags] : allowed_flags()) known += (known.empty() ? "" : ", ") + id;
    err << "error: unknown check id \"" << o.check << "\" (known: " << known << ")\n";
    return {2, ""};
  }
  for (const char* flag : {"--n", "--N", "--m", "--H", "--k", "--l", "--g", "--budget",
                           "--N-max", "--psi", "--phi"}) {
    if (cmd.count(flag) > 0 && !it->second.contains(flag)) {
      err << "error: flag " << flag << " does not apply to check " << o.check << "\n";
      return {2, ""};
    }
  }

  ModelSpecDocument doc = parse_model(o.path);
  const SequenceModel& model = doc.model;
  const long m = o.m >= 0 ? o.m : (o.check == "first-bc" ? 64 : 1);
  const long l = o.l >= 0 ? o.l : (o.check == "first-bc" ? 3 : 1);
  long H = o.H;
  if (H < 0) {
    if (o.check == "power-coefficient") H = o.n + 5;
    else if (o.check == "recursion-product") H = o.n + o.k + 3;
    else H = 16;
  }

  BoundReport rep;
  if (o.check == "generalized-bc") {
    rep = generalized_bc_series(model, m, H).report;
  } else if (o.check == "switch-identity") {
    rep = switch_identity_check(model, o.N);
  } else if (o.check == "power-coefficient") {
    rep = power_coefficient(model, o.n, H).report;
  } else if (o.check == "markov-coefficient") {
    rep = markov_power_coefficient(model, o.n).report;
  } else if (o.check == "recursion-product") {
    rep = theorem21_recursion_check(model, o.n, o.k, H);
  } else if (o.check == "weighted-series") {
    rep = weighted_divergence_series(model, H).report;
  } else if (o.check == "chung-erdos") {
    rep = chung_erdos(model, o.n);
  } else if (o.check == "second-moment") {
    rep = second_moment_ratio(model, o.n).report;
  } else if (o.check == "first-bc") {
    rep = first_bc_quantitative(model, convergence_rate(model, l), l, m);
  } else if (o.check == "second-bc") {
    rep = second_bc_quantitative(model, divergence_rate(model, o.n + o.N - 1), o.n, o.N);
  } else if (o.check == "erdos-renyi") {
    RateFunction psi = divergence_rate(model, 2 * o.n);
    CorrelationRate phi2(model);
    rep = erdos_renyi_schedule(model, psi, phi2, o.n, l).report;
  } else {  // kochen-stone
    RateFunction premise = divergence_rate(model, o.N_max);
    if (o.g < 2) throw InvalidInput("--g must be an integer factor >= 2");
    const long mult = o.g;
    auto g = [mult](long i) { return mult * i; };
    rep = kochen_stone_quantitative(model, premise, m, l, g,
                                    "g(i) = " + std::to_string(mult) + "i", o.budget)
              .report;
  }
  rep.add_param("model", doc.name);

  filter_report(rep, parse_block(o.block, model.block_count()));
  std::string payload =
      o.format == "json" ? canonical_json(report_to_json(rep)) : report_to_tsv(rep);
  return {exit_for(rep.overall()), std::move(payload)};
}

struct RatesOpts {
  std::string path, block = "all", format = "tsv";
  bool psi = false, phi = false, corr = false;
  long N_max = 5, l_max = 8, l = 1, n = 1;
  long budget = kDefaultScanBudget;
};

Invocation do_rates(const RatesOpts& o, std::ostream& err) {
  if (static_cast<int>(o.psi) + static_cast<int>(o.phi) + static_cast<int>(o.corr) != 1) {
    err << "error: exactly one of --psi, --phi, --corr is required\n";
    return {2, ""};
  }
  ModelSpecDocument doc = parse_model(o.path);
  const SequenceModel& model = doc.model;
  std::vector<std::string> labels = labels_of(model);
  std::optional<std::size_t> block = parse_block(o.block, model.block_count());

  if (o.corr) {
    CorrelationRate cr(model, o.budget);
    ParamList params{{"model", doc.name},
                     {"l", std::to_string(o.l)},
                     {"n", std::to_string(o.n)},
                     {"budget", std::to_string(o.budget)}};
    json entries = json::array();
    std::ostringstream tsv;
    tsv << "# rate\tcorr\n";
    for (const auto& [k, v] : params) tsv << "# param\t" << k << "\t" << v << "\n";
    tsv << "block\tlabel\tstatus\tindex\tratio\tnote\n";
    bool any_applicable = false;
    for (std::size_t b = 0; b < model.block_count(); ++b) {
      if (block && *block != b) continue;
      CorrelationEntry e = cr.at(b, o.l, o.n);
      any_applicable = any_applicable || e.status == RateStatus::kApplicable;
      const bool ok = e.status == RateStatus::kApplicable;
      entries.push_back(json{{"block", b},
                             {"label", labels[b]},
                             {"status", rate_status_name(e.status)},
                             {"index", ok ? json(e.index) : json(nullptr)},
                             {"ratio", ok ? json(e.achieved_ratio.str()) : json(nullptr)},
                             {"note", e.note}});
      tsv << b << "\t" << labels[b] << "\t" << rate_status_name(e.status) << "\t"
          << (ok ? std::to_string(e.index) : "-") << "\t"
          << (ok ? e.achieved_ratio.str() : "-") << "\t" << e.note << "\n";
    }
    json j{{"rate", "corr"}, {"params", json::array()}, {"entries", std::move(entries)}};
    for (const auto& [k, v] : params) j["params"].push_back(json::array({k, v}));
    std::string payload = o.format == "json" ? canonical_json(j) : tsv.str();
    return {any_applicable ? 0 : 3, std::move(payload)};
  }

  RateFunction rf;
  std::string which;
  ParamList params{{"model", doc.name}};
  if (o.psi) {
    which = "psi";
    params.emplace_back("N-max", std::to_string(o.N_max));
    params.emplace_back("budget", std::to_string(o.budget));
    rf = divergence_rate(model, o.N_max, o.budget);
  } else {
    which = "phi";
    params.emplace_back("l-max", std::to_string(o.l_max));
    rf = convergence_rate(model, o.l_max);
  }
  if (block) {
    rf = RateFunction({rf.table(*block)});
    labels = {labels[*block]};
  }
  bool applicable = false;
  for (std::size_t b = 0; b < rf.block_count(); ++b) {
    applicable = applicable || rf.table(b).status == RateStatus::kApplicable;
  }
  std::string payload = o.format == "json"
                            ? canonical_json(rates_to_json(rf, which, labels, params))
                            : rates_to_tsv(rf, which, labels, params);
  return {applicable ? 0 : 3, std::move(payload)};
}

struct SimulateOpts {
  std::string path, block = "all", format = "tsv";
  long trials = 10000;
  std::uint64_t seed = 0;
  double delta = 0.01;
  long horizon = -1;
  std::vector<long> union_range, pattern, pairwise;
  bool assert_oracle = false;
};

Invocation do_simulate(const SimulateOpts& o, std::ostream& err) {
  const int queries = static_cast<int>(!o.union_range.empty()) +
                      static_cast<int>(!o.pattern.empty()) +
                      static_cast<int>(!o.pairwise.empty());
  if (queries != 1) {
    err << "error: exactly one of --union, --pattern, --pairwise is required\n";
    return {2, ""};
  }
  Query query = !o.union_range.empty() ? Query::union_range(o.union_range[0], o.union_range[1])
                : !o.pattern.empty()   ? Query::pattern(o.pattern[0], o.pattern[1])
                                       : Query::pairwise(o.pairwise[0], o.pairwise[1]);

  ModelSpecDocument doc = parse_model(o.path);
  const SequenceModel& model = doc.model;
  const long horizon = o.horizon >= 0 ? o.horizon : query.max_index();
  SimulationPlan plan(model, horizon, o.trials, o.seed, query);
  Estimate est = estimate_query(plan, o.delta);

  std::vector<std::string> labels = labels_of(model);
  std::optional<std::size_t> block = parse_block(o.block, model.block_count());
  ParamList params{{"model", doc.name},
                   {"seed", std::to_string(o.seed)},
                   {"horizon", std::to_string(horizon)}};

  // Oracle comparison against the exact analytic backend, when requested.
  struct OracleRow {
    std::size_t block;
    Rational exact;
    bool pass;
  };
  std::vector<OracleRow> oracle;
  bool oracle_failed = false;
  if (o.assert_oracle) {
    BlockFunction exact = !o.union_range.empty()
                              ? model.union_probability(o.union_range[0], o.union_range[1])
                          : !o.pattern.empty()
                              ? model.pattern_probability(o.pattern[0], o.pattern[1])
                              : model.pairwise_joint(o.pairwise[0], o.pairwise[1]);
    const Rational eps(mpq_class(est.epsilon));
    for (std::size_t b = 0; b < est.points.size(); ++b) {
      if (block && *block != b) continue;
      if (!est.points[b]) continue;
      const Rational diff = (*est.points[b] - exact.value(b)).abs();
      const bool pass = diff <= eps;
      oracle_failed = oracle_failed || !pass;
      oracle.push_back({b, exact.value(b), pass});
    }
  }

  if (block) {
    Estimate cut = est;
    cut.points = {est.points[*block]};
    // Re-key the single retained block to index 0 in the generic serializers.
    std::vector<std::string> cut_labels = {labels[*block]};
    est = std::move(cut);
    labels = std::move(cut_labels);
    params.emplace_back("block", std::to_string(*block));
  }

  std::string payload;
  if (o.format == "json") {
    json j = estimate_to_json(est, labels, params);
    if (o.assert_oracle) {
      json rows = json::array();
      for (const OracleRow& r : oracle) {
        rows.push_back(json{{"block", r.block}, {"exact", r.exact.str()}, {"pass", r.pass}});
      }
      j["oracle"] = std::move(rows);
    }
    payload = canonical_json(j);
  } else {
    payload = estimate_to_tsv(est, labels, params);
    if (o.assert_oracle) {
      std::ostringstream extra;
      for (const OracleRow& r : oracle) {
        extra << "# oracle\tblock " << r.block << "\texact " << r.exact.str() << "\t"
              << (r.pass ? "pass" : "FAIL") << "\n";
      }
      payload += extra.str();
    }
  }
  return {oracle_failed ? 1 : 0, std::move(payload)};
}

Invocation dispatch(const std::vector<std::string>& args, std::ostream& err);

Invocation do_report(const std::string& path, std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << "error: " << path << ": cannot open file\n";
    return {2, ""};
  }
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    err << "error: " << path << ": not valid JSON: " << e.what() << "\n";
    return {2, ""};
  }
  for (const char* key : {"version", "command", "args", "exit_code", "output"}) {
    if (!manifest.contains(key)) {
      err << "error: " << path << ": manifest is missing field \"" << key << "\"\n";
      return {2, ""};
    }
  }
  const auto recorded_args = manifest.at("args").get<std::vector<std::string>>();
  if (recorded_args.empty() || recorded_args.front() == "report") {
    err << "error: " << path << ": manifest does not record a replayable command\n";
    return {2, ""};
  }
  if (manifest.at("version").get<std::string>() != kToolVersion) {
    err << "warning: manifest was written by " << manifest.at("version").get<std::string>()
        << ", this is " << kToolVersion << "\n";
  }

  Invocation replay = dispatch(recorded_args, err);
  const int want_code = manifest.at("exit_code").get<int>();
  const std::string want_output = manifest.at("output").get<std::string>();
  if (replay.code == want_code && replay.payload == want_output) {
    err << "replay: bit-exact (exit " << replay.code << ", " << replay.payload.size()
        << " bytes)\n";
    return {0, std::move(replay.payload)};
  }
  err << "replay: MISMATCH";
  if (replay.code != want_code) {
    err << " (exit " << replay.code << ", manifest says " << want_code << ")";
  }
  if (replay.payload != want_output) err << " (output differs)";
  err << "\n";
  return {1, std::move(replay.payload)};
}

Invocation dispatch(const std::vector<std::string>& args, std::ostream& err) {
  CLI::App app{"exact verification of conditional Borel-Cantelli bounds on finite models"};
  app.name("bcq");
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  VerifyOpts vo;
  CLI::App* vc = app.add_subcommand("verify", "run one bound check against a model file");
  vc->add_option("model", vo.path, "model file (JSON)")->required();
  vc->add_option("--check", vo.check, "check id, e.g. chung-erdos")->required();
  vc->add_option("--n", vo.n, "first event index / union length");
  vc->add_option("--N", vo.N, "telescoping steps or divergence level");
  vc->add_option("--m", vo.m, "pattern length, horizon (first-bc) or search start");
  vc->add_option("--H", vo.H, "evaluation horizon");
  vc->add_option("--k", vo.k, "recursion step count");
  vc->add_option("--l", vo.l, "dyadic level");
  vc->add_option("--g", vo.g, "window factor: g(i) = FACTOR*i (kochen-stone)");
  vc->add_option("--budget", vo.budget, "witness search budget");
  vc->add_option("--N-max", vo.N_max, "depth of the auto-extracted divergence table");
  vc->add_option("--psi", vo.psi, "divergence rate source (only \"auto\")")
      ->check(CLI::IsMember({"auto"}));
  vc->add_option("--phi", vo.phi, "convergence rate source (only \"auto\")")
      ->check(CLI::IsMember({"auto"}));
  vc->add_option("--block", vo.block, "conditioning block index or \"all\"");
  vc->add_option("--format", vo.format, "tsv or json")->check(CLI::IsMember({"tsv", "json"}));

  RatesOpts ro;
  CLI::App* rc = app.add_subcommand("rates", "extract rate tables from a model file");
  rc->add_option("model", ro.path, "model file (JSON)")->required();
  rc->add_flag("--psi", ro.psi, "divergence rate psi(N)");
  rc->add_flag("--phi", ro.phi, "convergence rate phi(l)");
  rc->add_flag("--corr", ro.corr, "correlation rate phi(l, n)");
  rc->add_option("--N-max", ro.N_max, "largest divergence level");
  rc->add_option("--l-max", ro.l_max, "largest convergence level");
  rc->add_option("--l", ro.l, "correlation level");
  rc->add_option("--n", ro.n, "correlation start index");
  rc->add_option("--budget", ro.budget, "scan budget");
  rc->add_option("--block", ro.block, "conditioning block index or \"all\"");
  rc->add_option("--format", ro.format, "tsv or json")->check(CLI::IsMember({"tsv", "json"}));

  SimulateOpts so;
  CLI::App* sc = app.add_subcommand("simulate", "Monte Carlo estimate of a path query");
  sc->add_option("model", so.path, "model file (JSON)")->required();
  sc->add_option("--trials", so.trials, "trials per conditioning block");
  sc->add_option("--seed", so.seed, "root seed of the substream tree");
  sc->add_option("--delta", so.delta, "confidence parameter");
  sc->add_option("--horizon", so.horizon, "sampled path length");
  sc->add_option("--union", so.union_range, "union query: FROM TO")->expected(2);
  sc->add_option("--pattern", so.pattern, "pattern query: N M")->expected(2);
  sc->add_option("--pairwise", so.pairwise, "pairwise joint query: I K")->expected(2);
  sc->add_flag("--assert-oracle", so.assert_oracle,
               "compare against the exact backend; exit 1 outside the CI");
  sc->add_option("--block", so.block, "conditioning block index or \"all\"");
  sc->add_option("--format", so.format, "tsv or json")->check(CLI::IsMember({"tsv", "json"}));

  std::string manifest_path;
  CLI::App* pc = app.add_subcommand("report", "replay a manifest and confirm reproducibility");
  pc->add_option("manifest", manifest_path, "manifest file written by --manifest")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    return {0, app.help()};
  } catch (const CLI::CallForAllHelp&) {
    return {0, app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::CallForVersion&) {
    return {0, std::string(kToolVersion) + "\n"};
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return {2, ""};
  }

  try {
    if (app.got_subcommand(vc)) return do_verify(vo, *vc, err);
    if (app.got_subcommand(rc)) return do_rates(ro, err);
    if (app.got_subcommand(sc)) return do_simulate(so, err);
    return do_report(manifest_path, err);
  } catch (const UndefinedCoefficient& e) {
    err << "inapplicable: " << e.what() << "\n";
    return {3, ""};
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return {2, ""};
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return {2, ""};
  }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  // --manifest is handled here so the recorded argument list is exactly what
  // a replay must re-run.
  std::vector<std::string> rest;
  std::optional<std::string> manifest_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--manifest") {
      if (i + 1 >= args.size()) {
        err << "error: --manifest requires a file path\n";
        return 2;
      }
      manifest_path = args[++i];
    } else if (args[i].rfind("--manifest=", 0) == 0) {
      manifest_path = args[i].substr(std::string("--manifest=").size());
    } else {
      rest.push_back(args[i]);
    }
  }
  if (manifest_path && !rest.empty() && rest.front() == "report") {
    err << "error: report does not take --manifest\n";
    return 2;
  }

  const auto start = std::chrono::steady_clock::now();
  Invocation inv = dispatch(rest, err);
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);

  out << inv.payload;

  if (manifest_path) {
    json manifest{{"version", kToolVersion},
                  {"command", rest.empty() ? "" : rest.front()},
                  {"args", rest},
                  {"exit_code", inv.code},
                  {"output", inv.payload},
                  {"wall_clock_ms", elapsed.count()}};
    std::ofstream mf(*manifest_path, std::ios::binary);
    if (!mf) {
      err << "error: cannot write manifest to " << *manifest_path << "\n";
      return 2;
    }
    mf << canonical_json(manifest);
  }
  return inv.code;
}

}  // namespace bcq::cli
