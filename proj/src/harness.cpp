#include "violin/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "violin/hard_instances.hpp"
#include "violin/kernels.hpp"
#include "violin/parallel.hpp"
#include "violin/rl.hpp"

namespace violin {

using nlohmann::json;

StationaryThresholds ExperimentConfig::thresholds() const {
  StationaryThresholds th = paired_thresholds(smoothness(family), eps);
  if (eps_h) th.eps_h = *eps_h;
  return th;
}

void ExperimentConfig::validate() const {
  if (family != Family::Linear && family != Family::Logistic && family != Family::TwoLayer)
    throw std::invalid_argument("config: family must be linear, logistic or two_layer");
  if (dim < 1) throw std::invalid_argument("config: dim must be >= 1");
  if (num_hypotheses < 1) throw std::invalid_argument("config: num_hypotheses must be >= 1");
  if (family == Family::TwoLayer && hidden < 1) throw std::invalid_argument("config: hidden must be >= 1");
  if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("config: seeds must be a nonempty list");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw std::invalid_argument("config: seeds must be distinct");
  if (mode == SupervisionMode::FiniteDiff) fd.validate();
  if (ascent.restarts < 1 || ascent.steps < 0) throw std::invalid_argument("config: ascent.restarts must be >= 1");
  if (learning_rate && !(*learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be positive");
  if (search_budget < 1) throw std::invalid_argument("config: search_budget must be >= 1");
  (void)thresholds();
}

namespace {

template <typename T>
T take(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("config: key '") + key + "' has the wrong type");
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* s) { return k == s; }) == known.end())
      throw std::invalid_argument("config: unknown key '" + where + k + "'");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  reject_unknown(j,
                 {"family", "dim", "num_hypotheses", "hidden", "horizon", "learner", "supervision", "finite_diff",
                  "ascent", "learning_rate", "thresholds", "seeds", "output_dir", "threads", "search_budget"},
                 "");
  ExperimentConfig c;
  c.family = parse_family(take<std::string>(j, "family", "linear"));
  c.dim = take<std::size_t>(j, "dim", c.dim);
  c.num_hypotheses = take<std::size_t>(j, "num_hypotheses", c.num_hypotheses);
  c.hidden = take<std::size_t>(j, "hidden", c.hidden);
  c.horizon = take<std::size_t>(j, "horizon", c.horizon);
  const auto learner = take<std::string>(j, "learner", "hedge");
  if (learner == "hedge")
    c.learner = LearnerKind::Hedge;
  else if (learner == "ftl")
    c.learner = LearnerKind::Ftl;
  else
    throw std::invalid_argument("config: learner must be 'hedge' or 'ftl'");
  const auto mode = take<std::string>(j, "supervision", "finite_diff");
  if (mode == "finite_diff")
    c.mode = SupervisionMode::FiniteDiff;
  else if (mode == "analytic")
    c.mode = SupervisionMode::Analytic;
  else
    throw std::invalid_argument("config: supervision must be 'finite_diff' or 'analytic'");
  if (j.contains("finite_diff")) {
    const auto& f = j["finite_diff"];
    reject_unknown(f, {"alpha1", "alpha2"}, "finite_diff.");
    c.fd.alpha1 = take<double>(f, "alpha1", c.fd.alpha1);
    c.fd.alpha2 = take<double>(f, "alpha2", c.fd.alpha2);
  }
  if (j.contains("ascent")) {
    const auto& a = j["ascent"];
    reject_unknown(a, {"restarts", "steps"}, "ascent.");
    c.ascent.restarts = take<int>(a, "restarts", c.ascent.restarts);
    c.ascent.steps = take<int>(a, "steps", c.ascent.steps);
  }
  if (j.contains("learning_rate")) c.learning_rate = take<double>(j, "learning_rate", 0.0);
  const auto s = smoothness(c.family);
  c.eps = s.zeta_3rd > 0 ? std::min(0.1, s.zeta_3rd / 16.0) : 0.1;
  if (j.contains("thresholds")) {
    const auto& t = j["thresholds"];
    reject_unknown(t, {"eps", "eps_h"}, "thresholds.");
    c.eps = take<double>(t, "eps", c.eps);
    if (t.contains("eps_h")) c.eps_h = take<double>(t, "eps_h", 0.0);
  }
  if (j.contains("seeds")) c.seeds = take<std::vector<std::uint64_t>>(j, "seeds", {});
  c.output_dir = take<std::string>(j, "output_dir", c.output_dir.string());
  c.threads = take<std::size_t>(j, "threads", 0);
  c.search_budget = take<std::size_t>(j, "search_budget", c.search_budget);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_env_overrides(ExperimentConfig& cfg) {
  if (const char* dir = std::getenv("VIOLIN_OUTPUT_DIR"); dir && *dir) cfg.output_dir = dir;
  if (const char* th = std::getenv("VIOLIN_THREADS"); th && *th) {
    try {
      cfg.threads = std::stoul(th);
    } catch (...) {
      throw std::invalid_argument("VIOLIN_THREADS must be a nonnegative integer");
    }
  }
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["family"] = std::string(family_name(c.family));
  j["dim"] = c.dim;
  j["num_hypotheses"] = c.num_hypotheses;
  j["hidden"] = c.hidden;
  j["horizon"] = c.horizon;
  j["learner"] = c.learner == LearnerKind::Hedge ? "hedge" : "ftl";
  j["supervision"] = c.mode == SupervisionMode::Analytic ? "analytic" : "finite_diff";
  j["finite_diff"] = {{"alpha1", c.fd.alpha1}, {"alpha2", c.fd.alpha2}};
  j["ascent"] = {{"restarts", c.ascent.restarts}, {"steps", c.ascent.steps}};
  if (c.learning_rate) j["learning_rate"] = *c.learning_rate;
  const auto th = c.thresholds();
  j["thresholds"] = {{"eps", th.eps_g}, {"eps_h", th.eps_h}};
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir.string();
  j["threads"] = c.threads;
  j["search_budget"] = c.search_budget;
  return j.dump(2) + "\n";
}

Instance make_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 1));
  std::vector<ModelParams> members;
  for (std::size_t k = 0; k < cfg.num_hypotheses; ++k) {
    switch (cfg.family) {
      case Family::Linear: members.push_back(ModelParams::linear(rng.unit_sphere(cfg.dim))); break;
      case Family::Logistic: members.push_back(ModelParams::logistic(rng.unit_sphere(cfg.dim))); break;
      case Family::TwoLayer: {
        Matrix w1(cfg.hidden, cfg.dim);
        for (std::size_t r = 0; r < cfg.hidden; ++r) {
          Vec row = rng.gaussian(cfg.dim);
          double l1 = 0.0;
          for (double v : row) l1 += std::abs(v);
          const double scale = (0.5 + 0.5 * rng.uniform()) / l1;
          for (std::size_t c = 0; c < cfg.dim; ++c) w1(r, c) = row[c] * scale;
        }
        Vec w2 = rng.gaussian(cfg.hidden);
        double l1 = 0.0;
        for (double v : w2) l1 += std::abs(v);
        for (double& v : w2) v /= l1;
        members.push_back(ModelParams::two_layer(std::move(w1), std::move(w2)));
        break;
      }
      default: throw std::invalid_argument("make_instance: unsupported family");
    }
  }
  const std::size_t truth = rng.index(cfg.num_hypotheses);
  return {HypothesisSet(std::move(members)), truth};
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_header() {
  return "step,seed,real_reward,virtual_reward,delta1,delta2,delta3,delta4,queries,local_regret_prefix,"
         "standard_regret_prefix\n";
}

std::string ledger_csv_rows(const RunLedger& ledger, const Vec& local_prefix, const Vec& standard_prefix) {
  std::string out;
  for (std::size_t i = 0; i < ledger.records.size(); ++i) {
    const auto& r = ledger.records[i];
    const double lp = i < local_prefix.size() ? local_prefix[i] : std::nan("");
    const double sp = i < standard_prefix.size() ? standard_prefix[i] : std::nan("");
    out += std::to_string(r.step) + "," + std::to_string(ledger.seed) + "," + format_number(r.real_reward) + "," +
           format_number(r.virtual_reward) + "," + format_number(r.delta.d1) + "," + format_number(r.delta.d2) + "," +
           format_number(r.delta.d3) + "," + format_number(r.delta.d4) + "," + std::to_string(r.queries) + "," +
           format_number(lp) + "," + format_number(sp) + "\n";
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

std::string manifest_text(const ExperimentConfig& cfg, const std::vector<std::string>& files) {
  const auto th = cfg.thresholds();
  std::ostringstream m;
  m << "tool = violin " << kVersion << "\n";
  m << "compiler = " << __VERSION__ << "\n";
  m << "simd_backend = " << kernels::backend_name(kernels::active_backend()) << "\n";
  m << "family = " << family_name(cfg.family) << "\n";
  m << "seeds =";
  for (auto s : cfg.seeds) m << " " << s;
  m << "\n";
  m << "horizon = " << cfg.horizon << "\n";
  m << "eps_g = " << format_number(th.eps_g) << "\n";
  m << "eps_h = " << format_number(th.eps_h) << "\n";
  if (smoothness(cfg.family).zeta_3rd == 0.0 && !cfg.eps_h)
    m << "eps_h_note = zeta_3rd is 0 for this family; eps_h defaults to -0.5\n";
  for (const auto& f : files) m << "file = " << f << "\n";
  return m.str();
}

struct SeedOutput {
  std::string rows;
};

SeedOutput run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  const Instance inst = make_instance(cfg, seed);
  const ModelParams& truth = inst.theta[inst.truth];
  BanditConfig bc;
  bc.learner = cfg.learner;
  bc.mode = cfg.mode;
  bc.fd = cfg.fd;
  bc.ascent = cfg.ascent;
  bc.learning_rate = cfg.learning_rate;
  bc.horizon = cfg.horizon;
  bc.thresholds = cfg.thresholds();
  RunLedger ledger = run_violin(inst.theta, truth, cfg.horizon, bc, derive_seed(seed, 2));
  ledger.seed = seed;
  const LocalMaxSet set = find_local_max_set(truth, bc.thresholds, cfg.search_budget, derive_seed(seed, 3));
  Vec local_prefix;
  if (set.status != LocalMaxSet::Status::Empty) local_prefix = local_regret(ledger, set).prefix;
  Vec standard_prefix;
  if (optimal_action(truth)) standard_regret(ledger, truth, &standard_prefix);
  return {ledger_csv_rows(ledger, local_prefix, standard_prefix)};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool dry_run) {
  cfg.validate();
  if (cfg.threads > 0) set_thread_count(cfg.threads);
  ExperimentResult res;
  res.dir = cfg.output_dir;
  std::filesystem::create_directories(res.dir);
  std::vector<std::string> names;
  if (!dry_run) {
    names.push_back("config.json");
    for (auto s : cfg.seeds) names.push_back("ledger_seed_" + std::to_string(s) + ".csv");
    names.push_back("aggregate.csv");
  }
  names.push_back("manifest.txt");
  if (!dry_run) {
    std::vector<SeedOutput> outputs(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), [&](std::size_t i) { outputs[i] = run_seed(cfg, cfg.seeds[i]); });
    write_file(res.dir / "config.json", config_to_json(cfg));
    res.files.push_back(res.dir / "config.json");
    // aggregate ordered by (seed, step)
    std::vector<std::size_t> order(cfg.seeds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cfg.seeds[a] < cfg.seeds[b]; });
    std::string aggregate = csv_header();
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      const auto p = res.dir / ("ledger_seed_" + std::to_string(cfg.seeds[i]) + ".csv");
      write_file(p, csv_header() + outputs[i].rows);
      res.files.push_back(p);
    }
    for (std::size_t i : order) aggregate += outputs[i].rows;
    write_file(res.dir / "aggregate.csv", aggregate);
    res.files.push_back(res.dir / "aggregate.csv");
  }
  write_file(res.dir / "manifest.txt", manifest_text(cfg, names));
  res.files.push_back(res.dir / "manifest.txt");
  return res;
}

std::string report(std::istream& csv) {
  std::string line;
  if (!std::getline(csv, line) || line + "\n" != csv_header()) throw std::runtime_error("report: unexpected CSV header");
  struct Row {
    std::size_t steps = 0;
    double local = 0, standard = 0;
    std::uint64_t queries = 0;
    Vec rewards;
  };
  std::map<std::uint64_t, Row> rows;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 11) throw std::runtime_error("report: malformed row: " + line);
    auto& r = rows[std::stoull(f[1])];
    r.steps = std::stoull(f[0]);
    r.rewards.push_back(std::stod(f[2]));
    r.queries = std::stoull(f[8]);
    r.local = std::stod(f[9]);
    r.standard = std::stod(f[10]);
  }
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%10s %8s %10s %16s %16s %16s\n", "seed", "steps", "queries", "local_regret",
                "standard_regret", "tail_reward");
  out << buf;
  for (const auto& [seed, r] : rows) {
    const std::size_t tail = std::max<std::size_t>(1, r.rewards.size() / 10);
    double mean = 0.0;
    for (std::size_t i = r.rewards.size() - tail; i < r.rewards.size(); ++i) mean += r.rewards[i];
    mean /= static_cast<double>(tail);
    std::snprintf(buf, sizeof buf, "%10llu %8zu %10llu %16.6g %16.6g %16.6g\n", static_cast<unsigned long long>(seed),
                  r.steps, static_cast<unsigned long long>(r.queries), r.local, r.standard, mean);
    out << buf;
  }
  return out.str();
}

namespace {

struct CheckContext {
  std::ostream& out;
  int failures = 0;
  void report(const std::string& name, bool ok, const std::string& detail = {}) {
    out << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) out << "  " << detail;
    out << "\n";
    if (!ok) ++failures;
  }
};

void check_kernels(CheckContext& c, Rng& rng) {
  const auto& s = kernels::scalar_table();
  double worst = 0.0;
  const bool have = kernels::backend_supported(kernels::Backend::Avx2);
  if (have) {
    const auto& v = kernels::table(kernels::Backend::Avx2);
    for (std::size_t n : {1, 3, 4, 7, 16, 33, 100}) {
      const Vec x = rng.gaussian(n), y = rng.gaussian(n);
      const double a = s.dot(x.data(), y.data(), n), b = v.dot(x.data(), y.data(), n);
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
  }
  c.report("kernels: avx2 dot agrees with scalar", worst < 1e-12,
           have ? "max rel diff " + format_number(worst) : "avx2 unavailable, scalar only");
}

void check_model(CheckContext& c, Rng& rng) {
  for (Family f : {Family::Linear, Family::Logistic}) {
    const auto sm = smoothness(f);
    bool ok = true;
    for (int k = 0; k < 1000; ++k) {
      const Vec t = rng.unit_sphere(3);
      const ModelParams m = f == Family::Linear ? ModelParams::linear(t) : ModelParams::logistic(t);
      const Vec a = rng.uniform_ball(3, 2.0);
      if (norm2(grad_a(m, a)) > sm.zeta_g || symmetric_spectral_norm(hess_a(m, a)) > sm.zeta_h) ok = false;
    }
    c.report(std::string("model: smoothness bounds hold for ") + std::string(family_name(f)), ok);
  }
}

void check_online(CheckContext& c, Rng& rng) {
  const auto p = PosteriorWeights::uniform(5);
  Vec l = rng.gaussian(5);
  Vec l2 = l;
  for (double& v : l2) v += 3.0;
  const auto a = exp_weights_update(p, l, 0.7);
  const auto b = exp_weights_update(p, l2, 0.7);
  double diff = 0.0;
  for (std::size_t i = 0; i < 5; ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  c.report("online: exponential weights shift invariant", diff < 1e-12);
}

void check_bandit(CheckContext& c, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.dim = 4;
  cfg.num_hypotheses = 6;
  const Instance inst = make_instance(cfg, seed);
  BanditConfig bc;
  const auto l1 = run_violin(inst.theta, inst.theta[inst.truth], 30, bc, seed);
  const auto l2 = run_violin(inst.theta, inst.theta[inst.truth], 30, bc, seed);
  bool same = l1.records.size() == l2.records.size();
  for (std::size_t i = 0; same && i < l1.records.size(); ++i)
    same = l1.records[i].action == l2.records[i].action && l1.records[i].real_reward == l2.records[i].real_reward;
  c.report("bandit: identical seeds give identical ledgers", same);
  std::size_t viol = 0;
  for (const auto& o : lemma1_check(l1, inst.theta[inst.truth], 0.1, {0.1, -0.5}))
    if (!o.holds) ++viol;
  c.report("bandit: improvement inequality on a linear run", viol == 0, std::to_string(viol) + " violations");
}

void check_rl(CheckContext& c, std::uint64_t seed) {
  Rng rng(seed);
  rl::MdpSpec spec;
  spec.d = 2;
  spec.H = 3;
  spec.init = {Vec{0.2, -0.1}, 0.0};
  spec.reward.state_weights = {1.0, -0.5};
  spec.reward.action_cost = 1.0;
  spec.noise = {rl::NoiseModel::Kind::TwoPoint, Vec{0.6, -0.8}};
  const auto hat = rl::make_random_dynamics(2, 4, rng);
  const auto truth = rl::make_random_dynamics(2, 4, rng);
  const auto psi = rl::PolicyParams::projected(Matrix(2, 2, {0.3, -0.2, 0.1, 0.4}));
  const auto t = rl::telescoping_check(hat, truth, psi, spec, spec.init.center);
  c.report("rl: telescoping identity by enumeration", std::abs(t.lhs - t.rhs) <= 1e-10,
           "|lhs-rhs| = " + format_number(std::abs(t.lhs - t.rhs)));
  const auto tau = rl::rollout(truth, psi, spec, seed);
  const auto tau2 = rl::rollout(truth, psi, spec, seed + 1);
  c.report("rl: dynamics loss vanishes at the truth", rl::dynamics_loss(truth, tau, tau2) == 0.0);
}

void check_hard(CheckContext& c, std::uint64_t seed) {
  const auto p = build_packing(5, 0.7, seed, 2000);
  c.report("hard: packing passes exhaustive audit", packing_is_valid(p), std::to_string(p.points.size()) + " points");
  const auto seq = eluder_sequence_sparse(6);
  const auto ok = verify_eluder(seq, 1.0);
  c.report("hard: sparse eluder sequence verifies", std::all_of(ok.begin(), ok.end(), [](bool b) { return b; }));
}

void check_metrics(CheckContext& c, Rng& rng) {
  const ModelParams env = ModelParams::linear(rng.unit_sphere(3));
  const auto set = find_local_max_set(env, {0.1, -0.5}, 8, 1);
  bool ok = set.status == LocalMaxSet::Status::Analytic;
  for (const auto& m : set.members) ok = ok && is_approx_local_max(env, m, {0.1, -0.5}) && eta(env, m) >= set.worst_value;
  c.report("metrics: stored local maxima re-pass the detector", ok);
}

}  // namespace

int run_checks(const std::string& selector, std::uint64_t seed, std::ostream& out) {
  static const std::vector<std::string> known{"all", "kernels", "model", "online", "bandit", "rl", "hard", "metrics"};
  if (std::find(known.begin(), known.end(), selector) == known.end())
    throw std::invalid_argument("unknown check selector '" + selector + "'");
  CheckContext c{out};
  Rng rng(seed);
  const auto want = [&](const char* s) { return selector == "all" || selector == s; };
  if (want("kernels")) check_kernels(c, rng);
  if (want("model")) check_model(c, rng);
  if (want("online")) check_online(c, rng);
  if (want("bandit")) check_bandit(c, seed);
  if (want("rl")) check_rl(c, seed);
  if (want("hard")) check_hard(c, seed);
  if (want("metrics")) check_metrics(c, rng);
  return c.failures;
}

}  // namespace violin
