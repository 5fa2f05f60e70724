#include "ipdsaw/cli.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "ipdsaw/continuum.hpp"
#include "ipdsaw/errors.hpp"
#include "ipdsaw/geometry.hpp"
#include "ipdsaw/io.hpp"
#include "ipdsaw/model.hpp"
#include "ipdsaw/parallel.hpp"
#include "ipdsaw/rescaling.hpp"
#include "ipdsaw/sampler.hpp"
#include "ipdsaw/stats.hpp"
#include "ipdsaw/walk.hpp"

namespace ipdsaw::cli {

namespace {

using io::format_number;
using io::Json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_beta(const std::string& s) {
  if (s == "critical") return model::critical_beta();
  try {
    std::size_t pos = 0;
    const double b = std::stod(s, &pos);
    if (pos != s.size()) throw UsageError("--beta: expected a number or 'critical'");
    return b;
  } catch (const std::logic_error&) {
    throw UsageError("--beta: expected a number or 'critical'");
  }
}

bool is_critical(double beta) { return std::abs(beta - model::critical_beta()) <= 1e-9; }

// Options shared by the subcommands; each subcommand registers the ones it uses.
struct Common {
  std::string beta = "critical";
  std::int64_t length = 0;
  std::uint64_t seed = 1;
  std::uint64_t replicas = 1;
  int jobs = 0;
  std::uint64_t budget = 0;
  double dt = 1e-4;
  double epsilon = 0.02;
  std::string out;
};

void add_beta(CLI::App* a, Common& c) {
  a->add_option("--beta", c.beta, "coupling: a positive number or 'critical'")->capture_default_str();
}
void add_length(CLI::App* a, Common& c, bool required) {
  auto* o = a->add_option("--length", c.length, "polymer length L")->check(CLI::PositiveNumber);
  if (required) o->required();
}
void add_seed(CLI::App* a, Common& c) {
  a->add_option("--seed", c.seed, "master seed")->capture_default_str();
}
void add_replicas(CLI::App* a, Common& c, std::uint64_t def) {
  c.replicas = def;
  a->add_option("--replicas", c.replicas, "number of replicas")->capture_default_str()->check(CLI::PositiveNumber);
}
void add_jobs(CLI::App* a, Common& c) {
  a->add_option("--jobs", c.jobs, "worker threads (0: IPDSAW_JOBS or all cores)")->capture_default_str();
}
void add_budget(CLI::App* a, Common& c) {
  a->add_option("--budget", c.budget, "rejection attempts per sample (0: 200 ceil(L^{2/3}))")->capture_default_str();
}
void add_out(CLI::App* a, Common& c) {
  a->add_option("--out", c.out, "output file (stdout when omitted)");
}

// Writes data to --out (atomically, with a manifest) or to stdout.
void emit(const Common& c, const CLI::App& sub, const std::string& data, std::uint64_t replicas,
          std::ostream& out) {
  if (c.out.empty()) {
    out << data;
    return;
  }
  io::write_atomic(c.out, data);
  io::RunManifest m;
  m.command = sub.get_name();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name.empty()) continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      std::string joined;
      for (std::size_t i = 0; i < res.size(); ++i) joined += (i ? "," : "") + res[i];
      m.parameters[name] = joined;
    } else if (std::string d = opt->get_default_str(); !d.empty()) {
      if (d.size() >= 2 && d.front() == '[' && d.back() == ']') d = d.substr(1, d.size() - 2);
      m.parameters[name] = d;
    }
  }
  m.master_seed = c.seed;
  m.replica_count = replicas;
  m.output_paths = {c.out};
  m.created = io::utc_timestamp();
  io::write_atomic(io::manifest_path(c.out), m.to_json().dump(2) + "\n");
}

// --- subcommands ---------------------------------------------------------------

int cmd_params(const Common& c, const CLI::App& sub, std::ostream& out) {
  const double beta = parse_beta(c.beta);
  const auto p = model::make_params(beta);
  Json j;
  j["beta"] = p.beta;
  j["critical"] = is_critical(beta);
  j["x"] = p.ratio();
  j["c_beta"] = p.c_beta;
  j["sigma2"] = p.sigma2;
  j["gamma_beta"] = p.gamma_beta;
  emit(c, sub, j.dump(2) + "\n", 0, out);
  return kExitOk;
}

int cmd_sample_polymer(const Common& c, const CLI::App& sub, std::ostream& out) {
  const double beta = parse_beta(c.beta);
  if (!is_critical(beta)) throw DomainError("sample-polymer: only the critical point is supported");
  const auto& params = model::critical_params();
  const std::uint64_t budget = c.budget ? c.budget : sampler::default_budget(c.length);
  const auto records = parallel::run_replicas(
      c.replicas, c.seed,
      [&](std::size_t i, Rng& rng) {
        const auto s = sampler::sample_critical_walk(c.length, params, rng, budget);
        const auto l = model::from_walk(s.walk.values, s.xi);
        Json j;
        j["seed_index"] = i;
        j["L"] = l.total_length();
        j["N"] = l.size();
        j["attempts"] = s.attempts;
        j["y_L"] = sampler::terminal_zero_run(s);
        j["stretches"] = l.stretches();
        return j.dump() + "\n";
      },
      static_cast<unsigned>(c.jobs));
  std::string data;
  for (const auto& r : records) data += r;
  emit(c, sub, data, c.replicas, out);
  return kExitOk;
}

int cmd_sample_limit(const Common& c, const CLI::App& sub, const std::string& method, std::size_t grid,
                     std::ostream& out) {
  const auto p = model::make_params(parse_beta(c.beta));
  continuum::LimitSettings st;
  st.sigma2 = p.sigma2;
  st.d_sigma2 = p.sigma2 / 4.0;
  st.dt = c.dt;
  st.epsilon = c.epsilon;
  if (c.budget) st.budget = c.budget;
  if (method == "last-zero") {
    st.method = continuum::Conditioning::last_zero;
  } else if (method == "epsilon") {
    st.method = continuum::Conditioning::epsilon;
  } else {
    throw UsageError("--method must be last-zero or epsilon");
  }
  if (grid < 1) throw UsageError("--grid must be positive");
  const auto records = parallel::run_replicas(
      c.replicas, c.seed,
      [&](std::size_t i, Rng& rng) {
        const auto s = continuum::sample_conditioned_limit(st, rng);
        std::vector<double> b, d;
        for (std::size_t k = 0; k <= grid; ++k) {
          const double sv = static_cast<double>(k) / static_cast<double>(grid);
          b.push_back(s.B_tilde(sv));
          d.push_back(s.D_tilde(sv));
        }
        Json j;
        j["seed_index"] = i;
        j["a1"] = s.a1;
        j["max_abs_B"] = s.B.max_abs();
        j["D_a1"] = s.D.values.back();
        j["attempts"] = s.attempts;
        j["B_tilde"] = b;
        j["D_tilde"] = d;
        return j.dump() + "\n";
      },
      static_cast<unsigned>(c.jobs));
  std::string data;
  for (const auto& r : records) data += r;
  emit(c, sub, data, c.replicas, out);
  return kExitOk;
}

int cmd_enumerate(const Common& c, const CLI::App& sub, std::ostream& out) {
  const double beta = parse_beta(c.beta);
  const auto law = model::exact_polymer_law(c.length, beta);
  io::CsvTable t;
  t.header = {"N", "stretches", "H", "probability"};
  for (std::size_t i = 0; i < law.configs.size(); ++i) {
    const auto& l = law.configs[i];
    std::string s;
    for (std::size_t k = 0; k < l.size(); ++k) s += (k ? " " : "") + std::to_string(l[k]);
    t.add_row({std::to_string(l.size()), s, std::to_string(model::hamiltonian(l)),
               format_number(law.probabilities[i])});
  }
  emit(c, sub, t.str(), 0, out);
  return kExitOk;
}

int cmd_verify(const Common& c, const CLI::App& sub, double tol, std::ostream& out) {
  const double beta = parse_beta(c.beta);
  const auto params = model::make_params(beta);
  const auto polymer = model::exact_polymer_law(c.length, beta);
  const auto walks = sampler::conditioned_walk_law_exact(c.length, params);
  const double tv = sampler::total_variation(polymer, sampler::pushforward_polymer(walks));
  const bool ok = tv < tol;
  std::ostringstream os;
  os << "L=" << c.length << " beta=" << format_number(beta) << " configurations=" << polymer.configs.size()
     << " total_variation=" << format_number(tv) << " tol=" << format_number(tol) << " "
     << (ok ? "OK" : "FAIL") << "\n";
  emit(c, sub, os.str(), 0, out);
  return ok ? kExitOk : kExitFailure;
}

struct TailOptions {
  std::string kind = "x1";
  std::string start = "zero";
  double lo = 100, hi = 100000;
  int bootstrap = 100;
};

int cmd_stats_tail(const Common& c, const CLI::App& sub, const TailOptions& o, std::ostream& out) {
  const auto params = model::make_params(parse_beta(c.beta));
  walk::StartLaw start;
  if (o.start == "zero") {
    start = walk::StartLaw::zero;
  } else if (o.start == "mu") {
    start = walk::StartLaw::mu;
  } else {
    throw UsageError("--start must be zero or mu");
  }
  if (!(o.hi > o.lo) || !(o.lo >= 1)) throw UsageError("need 1 <= --lo < --hi");
  const sampler::Steppers steppers(params);
  const auto horizon = static_cast<std::int64_t>(std::floor(o.hi));
  std::vector<std::vector<std::int64_t>> groups;
  if (o.kind == "x1") {
    const auto w = parallel::run_replicas(
        c.replicas, c.seed,
        [&](std::size_t, Rng& rng) {
          // Excursions past the cap only matter as "beyond the range".
          const auto e = sampler::sample_first_excursion(steppers, start, horizon, rng);
          return e.weight.value_or(horizon + 1);
        },
        static_cast<unsigned>(c.jobs));
    groups.reserve(w.size());
    for (auto v : w) groups.push_back({v});
  } else if (o.kind == "renewal") {
    groups = parallel::run_replicas(
        c.replicas, c.seed,
        [&](std::size_t, Rng& rng) { return sampler::renewal_points(steppers, start, horizon, rng); },
        static_cast<unsigned>(c.jobs));
  } else {
    throw UsageError("--kind must be x1 or renewal");
  }
  stats::TailFitOptions fo;
  fo.kind = stats::TailKind::mass;
  fo.bootstrap = o.bootstrap;
  fo.seed = c.seed;
  const auto fit = stats::fit_tail_exponent(groups, {o.lo, o.hi}, fo);
  io::CsvTable t;
  t.header = {"kind", "start", "beta", "replicas", "lo", "hi", "exponent", "std_error", "prefactor", "points", "bins"};
  t.add_row({o.kind, o.start, format_number(params.beta), std::to_string(c.replicas), format_number(o.lo),
             format_number(o.hi), format_number(fit.exponent), format_number(fit.std_error),
             format_number(fit.prefactor), std::to_string(fit.points), std::to_string(fit.bins)});
  emit(c, sub, t.str(), c.replicas, out);
  return kExitOk;
}

int cmd_stats_yl(const Common& c, const CLI::App& sub, std::int64_t kmax, std::ostream& out) {
  const auto& params = model::critical_params();
  if (!is_critical(parse_beta(c.beta))) throw DomainError("stats-yl: only the critical point is supported");
  const std::uint64_t budget = c.budget ? c.budget : sampler::default_budget(c.length);
  const auto y = parallel::run_replicas(
      c.replicas, c.seed,
      [&](std::size_t, Rng& rng) {
        return sampler::terminal_zero_run(sampler::sample_critical_walk(c.length, params, rng, budget));
      },
      static_cast<unsigned>(c.jobs));
  const auto table = stats::yl_table(y, kmax, 1);
  io::CsvTable t;
  t.header = {"L", "replicas", "k", "survival", "survival_se", "ratio", "ratio_se", "at_risk", "expected_ratio"};
  for (const auto& r : table.rows) {
    t.add_row({std::to_string(c.length), std::to_string(table.replicas), std::to_string(r.k),
               format_number(r.survival), format_number(r.survival_se), format_number(r.ratio),
               format_number(r.ratio_se), std::to_string(r.at_risk), format_number(1.0 / params.c_beta)});
  }
  emit(c, sub, t.str(), c.replicas, out);
  return kExitOk;
}

int cmd_shape(const Common& c, const CLI::App& sub, stats::ShapeConfig cfg, std::ostream& out) {
  if (!is_critical(parse_beta(c.beta))) throw DomainError("shape: only the critical point is supported");
  cfg.seed = c.seed;
  cfg.replicas = c.replicas;
  cfg.budget = c.budget;
  cfg.jobs = static_cast<unsigned>(c.jobs);
  cfg.continuum.dt = c.dt;
  cfg.continuum.epsilon = c.epsilon;
  const auto ref = stats::continuum_reference(cfg);
  const auto rows = stats::shape_experiment(cfg, ref);
  io::CsvTable t;
  t.header = {"L", "group", "replicas", "continuum_replicas", "extension_mean", "extension_se",
              "extension_median", "height_mean", "height_se", "terminal_com_mean", "terminal_com_se",
              "ks_extension", "ks_height", "ks_terminal_com", "area_min", "area_max", "area_exact",
              "hausdorff_checked", "hausdorff_mean", "hausdorff_se", "hausdorff_max", "hausdorff_violations"};
  for (const auto& r : rows) {
    t.add_row({std::to_string(r.L), std::to_string(r.group), std::to_string(r.replicas),
               std::to_string(ref.replicas), format_number(r.extension.mean), format_number(r.extension.se),
               format_number(r.median_extension), format_number(r.height.mean), format_number(r.height.se),
               format_number(r.terminal_com.mean), format_number(r.terminal_com.se),
               format_number(r.ks_extension), format_number(r.ks_height), format_number(r.ks_terminal),
               format_number(r.area_min), format_number(r.area_max), r.area_exact ? "1" : "0",
               std::to_string(r.hausdorff_checked), format_number(r.hausdorff.mean),
               format_number(r.hausdorff.se), format_number(r.hausdorff_max),
               std::to_string(r.hausdorff_bound_violations)});
  }
  emit(c, sub, t.str(), c.replicas, out);
  return kExitOk;
}

int cmd_hausdorff(const Common& c, const CLI::App& sub, const std::string& in, double pitch, std::ostream& out) {
  std::vector<model::StretchConfig> configs;
  if (!in.empty()) {
    std::ifstream is(in);
    if (!is) throw ValidationError("cannot open " + in);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      configs.push_back(io::stretch_config_from_json(Json::parse(line)));
    }
  } else {
    if (c.length < 1) throw UsageError("hausdorff: give --in or --length");
    const std::uint64_t budget = c.budget ? c.budget : sampler::default_budget(c.length);
    configs = parallel::run_replicas(
        c.replicas, c.seed,
        [&](std::size_t, Rng& rng) { return sampler::sample_critical_polymer(c.length, rng, budget).config; },
        static_cast<unsigned>(c.jobs));
  }
  const auto rows = parallel::run_replicas(
      configs.size(), 0,
      [&](std::size_t i, Rng&) {
        const auto& l = configs[i];
        const std::int64_t L = l.total_length();
        const auto scale = geometry::critical_scale(L);
        const auto band = geometry::polymer_band(l);
        const auto occ = geometry::rescale(geometry::occupied_set(model::to_lattice(l)), scale);
        const double h = pitch > 0 ? pitch : geometry::default_pitch(scale);
        const auto r = geometry::hausdorff(band, occ, h);
        const double threshold = 1.0 / std::cbrt(static_cast<double>(L));
        return std::vector<std::string>{std::to_string(i), std::to_string(L), std::to_string(l.size()),
                                        format_number(r.distance), format_number(r.error_bound),
                                        format_number(threshold),
                                        r.distance + r.error_bound <= threshold ? "1" : "0"};
      },
      static_cast<unsigned>(c.jobs));
  io::CsvTable t;
  t.header = {"record", "L", "N", "distance", "error_bound", "threshold", "within"};
  for (const auto& r : rows) t.add_row(r);
  emit(c, sub, t.str(), configs.size(), out);
  return kExitOk;
}

std::vector<std::string> replay_args(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open manifest " + path);
  const auto m = io::RunManifest::from_json(Json::parse(is));
  std::vector<std::string> args{m.command};
  for (const auto& [k, v] : m.parameters.items()) {
    args.push_back("--" + k);
    args.push_back(v.get<std::string>());
  }
  return args;
}

int dispatch(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args = raw;
  if (!args.empty() && args[0] == "--replay") {
    if (args.size() != 2) throw UsageError("usage: ipdsaw --replay <manifest.json>");
    args = replay_args(args[1]);
  }

  CLI::App app{"Critical IPDSAW simulation toolkit", "ipdsaw"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kToolkitVersion);
  app.footer("Exit codes: 0 ok, 1 failed check, 2 usage, 3 budget exhausted. "
             "IPDSAW_JOBS sets the default worker count. --replay <manifest> reruns a manifest.");
  Common c;

  auto* params = app.add_subcommand("params", "model constants at beta");
  add_beta(params, c);
  add_out(params, c);

  auto* sp = app.add_subcommand("sample-polymer", "exact critical polymer samples (JSON Lines)");
  add_beta(sp, c);
  add_length(sp, c, true);
  add_seed(sp, c);
  add_replicas(sp, c, 1);
  add_jobs(sp, c);
  add_budget(sp, c);
  add_out(sp, c);

  std::string method = "last-zero";
  std::size_t grid = 200;
  auto* sl = app.add_subcommand("sample-limit", "conditioned (B, D) pairs in area time (JSON Lines)");
  add_beta(sl, c);
  add_seed(sl, c);
  add_replicas(sl, c, 1);
  add_jobs(sl, c);
  add_budget(sl, c);
  sl->add_option("--dt", c.dt, "time step")->capture_default_str()->check(CLI::PositiveNumber);
  sl->add_option("--epsilon", c.epsilon, "tolerance for the epsilon method")->capture_default_str();
  sl->add_option("--method", method, "last-zero or epsilon")->capture_default_str();
  sl->add_option("--grid", grid, "area-time grid points")->capture_default_str();
  add_out(sl, c);

  auto* en = app.add_subcommand("enumerate", "exact polymer law (CSV)");
  add_beta(en, c);
  add_length(en, c, true);
  add_out(en, c);

  double tol = 1e-12;
  auto* vb = app.add_subcommand("verify-theorem-b", "polymer law vs pushforward of the conditioned walk law");
  add_beta(vb, c);
  add_length(vb, c, true);
  vb->add_option("--tol", tol, "total-variation tolerance")->capture_default_str();
  add_out(vb, c);

  TailOptions tail;
  auto* st = app.add_subcommand("stats-tail", "tail exponent of X_1 or of the renewal mass (CSV)");
  add_beta(st, c);
  add_seed(st, c);
  add_replicas(st, c, 100000);
  add_jobs(st, c);
  st->add_option("--kind", tail.kind, "x1 or renewal")->capture_default_str();
  st->add_option("--start", tail.start, "zero or mu")->capture_default_str();
  st->add_option("--lo", tail.lo, "fit range start")->capture_default_str();
  st->add_option("--hi", tail.hi, "fit range end (also the cap / horizon)")->capture_default_str();
  st->add_option("--bootstrap", tail.bootstrap, "bootstrap resamples")->capture_default_str();
  add_out(st, c);

  std::int64_t kmax = 10;
  auto* yl = app.add_subcommand("stats-yl", "tail table of the terminal zero run y_L (CSV)");
  add_beta(yl, c);
  add_length(yl, c, true);
  add_seed(yl, c);
  add_replicas(yl, c, 10000);
  add_jobs(yl, c);
  add_budget(yl, c);
  yl->add_option("--kmax", kmax, "largest k")->capture_default_str();
  add_out(yl, c);

  stats::ShapeConfig shape;
  auto* sh = app.add_subcommand("shape", "convergence table against the continuum (CSV)");
  add_beta(sh, c);
  add_seed(sh, c);
  add_replicas(sh, c, 200);
  add_jobs(sh, c);
  add_budget(sh, c);
  sh->add_option("--lengths", shape.lengths, "comma-separated lengths")->delimiter(',')->capture_default_str();
  sh->add_option("--groups", shape.seed_groups, "seed groups")->capture_default_str();
  sh->add_option("--continuum-replicas", shape.continuum_replicas, "continuum reference size")->capture_default_str();
  sh->add_option("--hausdorff-replicas", shape.hausdorff_replicas, "paths per group checked (0: all)")->capture_default_str();
  sh->add_option("--dt", c.dt, "continuum time step")->capture_default_str();
  sh->add_option("--epsilon", c.epsilon, "continuum epsilon")->capture_default_str();
  add_out(sh, c);

  std::string in;
  double pitch = 0.0;
  auto* hd = app.add_subcommand("hausdorff", "band vs occupied set distance per path (CSV)");
  hd->add_option("--in", in, "JSON Lines configurations (from sample-polymer)");
  add_length(hd, c, false);
  add_seed(hd, c);
  add_replicas(hd, c, 1);
  add_jobs(hd, c);
  add_budget(hd, c);
  hd->add_option("--pitch", pitch, "point-cloud pitch (0: default)")->capture_default_str();
  add_out(hd, c);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  if (*params) return cmd_params(c, *params, out);
  if (*sp) return cmd_sample_polymer(c, *sp, out);
  if (*sl) return cmd_sample_limit(c, *sl, method, grid, out);
  if (*en) return cmd_enumerate(c, *en, out);
  if (*vb) return cmd_verify(c, *vb, tol, out);
  if (*st) return cmd_stats_tail(c, *st, tail, out);
  if (*yl) return cmd_stats_yl(c, *yl, kmax, out);
  if (*sh) return cmd_shape(c, *sh, shape, out);
  if (*hd) return cmd_hausdorff(c, *hd, in, pitch, out);
  return kExitUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BudgetError& e) {
    err << "budget exhausted: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ipdsaw::cli
