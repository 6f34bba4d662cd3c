#include "fshawkes/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fshawkes/math_util.hpp"

namespace fshawkes {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

Realization load_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open events file: " + path);

  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  ++lineno;
  if (line.rfind("time,dim,state", 0) != 0) {
    parse_fail(path, lineno, "expected header `time,dim,state`");
  }

  struct Row {
    double time;
    int dim;
    int state;
  };
  std::vector<Row> rows;
  int meta_dims = 0, meta_states = 0;
  bool saw_terminal = false;
  Row terminal{0.0, 0, 0};

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::sscanf(line.c_str(), "# dims=%d states=%d", &meta_dims,
                  &meta_states);
      continue;
    }
    Row r;
    char extra;
    if (std::sscanf(line.c_str(), "%lf,%d,%d%c", &r.time, &r.dim, &r.state,
                    &extra) != 3) {
      parse_fail(path, lineno, "malformed row: `" + line + "`");
    }
    if (saw_terminal) {
      parse_fail(path, lineno, "rows after the terminal z(T) record");
    }
    if (r.dim == 0) {
      terminal = r;
      saw_terminal = true;
      continue;
    }
    if (r.dim < 0) parse_fail(path, lineno, "negative dimension index");
    if (r.state < 1) parse_fail(path, lineno, "state index must be >= 1");
    if (!rows.empty() && r.time < rows.back().time) {
      parse_fail(path, lineno, "event times must be ascending");
    }
    if (!rows.empty() && r.time == rows.back().time &&
        r.state != rows.back().state) {
      parse_fail(path, lineno,
                 "events at the same time carry conflicting state labels");
    }
    rows.push_back(r);
  }
  if (!saw_terminal) {
    parse_fail(path, lineno, "missing terminal record `T,0,z(T)`");
  }
  if (terminal.state < 1) {
    parse_fail(path, lineno, "terminal state must be >= 1");
  }
  if (!rows.empty() && terminal.time < rows.back().time) {
    parse_fail(path, lineno, "horizon earlier than the last event");
  }

  Realization out;
  out.horizon = terminal.time;
  int max_dim = meta_dims, max_state = std::max(meta_states, terminal.state);
  for (const Row& r : rows) {
    max_dim = std::max(max_dim, r.dim);
    max_state = std::max(max_state, r.state);
    out.events.push_back(Event{r.time, r.dim});
  }
  out.num_dims = std::max(max_dim, 1);
  out.num_states = std::max(max_state, 1);

  // Reconstruct the sparse state path: the label at the next distinct
  // observation reveals the post-transition state of the current one.
  const int initial = rows.empty() ? terminal.state : rows.front().state;
  std::vector<std::pair<double, int>> switches;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const int post = (n + 1 < rows.size()) ? rows[n + 1].state : terminal.state;
    if (post != rows[n].state &&
        (n + 1 >= rows.size() || rows[n + 1].time > rows[n].time)) {
      switches.emplace_back(rows[n].time, post);
    }
  }
  out.states = StatePath(initial, std::move(switches), out.horizon);
  out.validate();
  return out;
}

void save_events(const Realization& data, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "time,dim,state\n";
  out << "# dims=" << data.num_dims << " states=" << data.num_states << "\n";
  for (const Event& ev : data.events) {
    out << ev.time << ',' << ev.dim << ','
        << data.states.state_at(ev.time) << "\n";
  }
  out << data.horizon << ",0," << data.states.state_at(data.horizon) << "\n";
}

// --------------------------------------------------------------------------
// RunConfig
// --------------------------------------------------------------------------

BasisSet RunConfig::basis() const {
  return BasisSet(basis_functions, support_end);
}

Priors RunConfig::priors(int num_states) const {
  Priors p;
  if (dirichlet_alpha.size() == 1) {
    p.dirichlet_alpha =
        Eigen::VectorXd::Constant(num_states, dirichlet_alpha[0]);
  } else {
    if (static_cast<int>(dirichlet_alpha.size()) != num_states) {
      throw std::invalid_argument(
          "RunConfig: Dirichlet alpha length does not match the state count");
    }
    p.dirichlet_alpha = Eigen::Map<const Eigen::VectorXd>(
        dirichlet_alpha.data(), static_cast<Eigen::Index>(num_states));
  }
  p.weight_variance = sigma2;
  p.validate();
  return p;
}

void RunConfig::validate() const {
  if (basis_functions.empty()) {
    throw std::invalid_argument("RunConfig: at least one basis function");
  }
  if (!(support_end > 0.0)) {
    throw std::invalid_argument("RunConfig: support_end must be positive");
  }
  if (!(sigma2 > 0.0)) {
    throw std::invalid_argument("RunConfig: sigma2 must be positive");
  }
  for (double a : dirichlet_alpha) {
    if (!(a > 0.0)) {
      throw std::invalid_argument("RunConfig: alpha entries must be positive");
    }
  }
  if (has_model) model.validate();
}

namespace {

json params_to_json(const ModelParams& p) {
  json j;
  j["lambda_bar"] = std::vector<double>(
      p.lambda_bar.data(), p.lambda_bar.data() + p.lambda_bar.size());
  json trans = json::array();
  for (const Eigen::MatrixXd& phi : p.transition) {
    json mat = json::array();
    for (int r = 0; r < phi.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < phi.cols(); ++c) row.push_back(phi(r, c));
      mat.push_back(row);
    }
    trans.push_back(mat);
  }
  j["transition"] = trans;
  json weights = json::array();
  for (const auto& per_state : p.weights) {
    json states = json::array();
    for (const Eigen::VectorXd& w : per_state) {
      states.push_back(std::vector<double>(w.data(), w.data() + w.size()));
    }
    weights.push_back(states);
  }
  j["weights"] = weights;
  return j;
}

ModelParams params_from_json(const json& j) {
  ModelParams p;
  const auto lb = j.at("lambda_bar").get<std::vector<double>>();
  p.lambda_bar = Eigen::Map<const Eigen::VectorXd>(
      lb.data(), static_cast<Eigen::Index>(lb.size()));
  for (const json& mat : j.at("transition")) {
    const std::size_t k = mat.size();
    Eigen::MatrixXd phi(k, k);
    for (std::size_t r = 0; r < k; ++r) {
      const auto row = mat[r].get<std::vector<double>>();
      if (row.size() != k) {
        throw std::runtime_error("config: transition matrix must be square");
      }
      for (std::size_t c = 0; c < k; ++c) {
        phi(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            row[c];
      }
    }
    p.transition.push_back(std::move(phi));
  }
  for (const json& states : j.at("weights")) {
    std::vector<Eigen::VectorXd> per_state;
    for (const json& wj : states) {
      const auto w = wj.get<std::vector<double>>();
      per_state.push_back(Eigen::Map<const Eigen::VectorXd>(
          w.data(), static_cast<Eigen::Index>(w.size())));
    }
    p.weights.push_back(std::move(per_state));
  }
  return p;
}

json config_to_json(const RunConfig& c, bool include_threads) {
  json j;
  json basis = json::array();
  for (const BasisFunction& f : c.basis_functions) {
    basis.push_back({{"alpha", f.alpha_shape},
                     {"beta", f.beta_shape},
                     {"scale", f.scale},
                     {"shift", f.shift}});
  }
  j["basis"] = basis;
  j["support_end"] = c.support_end;
  j["alpha"] = c.dirichlet_alpha;
  j["sigma2"] = c.sigma2;
  j["iterations"] = c.iterations;
  j["burn_in"] = c.burn_in;
  j["thin"] = c.thin;
  j["nodes_per_interval"] = c.nodes_per_interval;
  j["tol"] = c.tol;
  j["ll_grid_points"] = c.ll_grid_points;
  j["seed"] = c.seed;
  if (include_threads) j["threads"] = c.threads;
  if (c.has_model) {
    j["simulation"] = {{"horizon", c.horizon},
                       {"initial_state", c.initial_state},
                       {"model", params_to_json(c.model)}};
  }
  return j;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config parse error in " + path + ": " +
                             e.what());
  }
  RunConfig c;
  for (const json& f : j.at("basis")) {
    c.basis_functions.push_back(BasisFunction{
        f.at("alpha").get<double>(), f.at("beta").get<double>(),
        f.at("scale").get<double>(), f.value("shift", 0.0)});
  }
  c.support_end = j.at("support_end").get<double>();
  if (j.contains("alpha")) {
    if (j["alpha"].is_number()) {
      c.dirichlet_alpha = {j["alpha"].get<double>()};
    } else {
      c.dirichlet_alpha = j["alpha"].get<std::vector<double>>();
    }
  }
  c.sigma2 = j.value("sigma2", 1.0);
  c.iterations = j.value("iterations", 200);
  c.burn_in = j.value("burn_in", -1);
  c.thin = j.value("thin", 1);
  c.nodes_per_interval = j.value("nodes_per_interval", 100);
  c.tol = j.value("tol", 1e-6);
  c.ll_grid_points = j.value("ll_grid_points", -1LL);
  c.seed = j.value("seed", std::uint64_t{1});
  c.threads = j.value("threads", 1);
  if (j.contains("simulation")) {
    const json& sim = j["simulation"];
    c.has_model = true;
    c.horizon = sim.at("horizon").get<double>();
    c.initial_state = sim.value("initial_state", 1);
    c.model = params_from_json(sim.at("model"));
  }
  c.validate();
  return c;
}

void save_config(const RunConfig& config, const std::string& path) {
  std::ofstream out = open_out(path);
  out << config_to_json(config, true).dump(2) << "\n";
}

RunConfig fixture_config() {
  const SimConfig sim = builtin_sim_fixture();
  RunConfig c;
  c.basis_functions = sim.basis.functions();
  c.support_end = sim.basis.support_end();
  c.dirichlet_alpha = {1.0};
  c.sigma2 = 1.0;
  c.iterations = 200;
  c.nodes_per_interval = 100;
  c.seed = sim.seed;
  c.has_model = true;
  c.model = sim.params;
  c.horizon = sim.horizon;
  c.initial_state = sim.initial_state;
  return c;
}

std::uint64_t config_hash(const RunConfig& config) {
  return fnv1a(config_to_json(config, false).dump());
}

// --------------------------------------------------------------------------
// Posterior files
// --------------------------------------------------------------------------

namespace {

void write_vector(std::ofstream& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << v[i];
}

void write_sample(std::ofstream& out, const ModelParams& p, int index) {
  out << "lambda " << index;
  write_vector(out, p.lambda_bar);
  out << "\n";
  for (int i = 1; i <= p.num_dims(); ++i) {
    const Eigen::MatrixXd& phi = p.transition[static_cast<std::size_t>(i - 1)];
    out << "phi " << index << ' ' << i;
    for (int r = 0; r < phi.rows(); ++r) {
      for (int c = 0; c < phi.cols(); ++c) out << ' ' << phi(r, c);
    }
    out << "\n";
    for (int k = 1; k <= p.num_states(); ++k) {
      out << "w " << index << ' ' << i << ' ' << k;
      write_vector(out, p.weights[static_cast<std::size_t>(i - 1)]
                                 [static_cast<std::size_t>(k - 1)]);
      out << "\n";
    }
  }
}

void write_header(std::ofstream& out, const std::string& kind, int m, int k,
                  int d, std::uint64_t hash, std::size_t samples) {
  out << "fshawkes_posterior 1\n"
      << "kind " << kind << "\n"
      << "dims " << m << "\n"
      << "states " << k << "\n"
      << "feature_dim " << d << "\n"
      << "config_hash " << std::hex << hash << std::dec << "\n"
      << "samples " << samples << "\n";
}

}  // namespace

void save_posterior(const GibbsChain& chain, std::uint64_t config_hash,
                    const std::string& path) {
  if (chain.samples.empty()) {
    throw std::invalid_argument("save_posterior: empty chain");
  }
  std::ofstream out = open_out(path);
  const ModelParams& first = chain.samples.front();
  write_header(out, "gibbs", first.num_dims(), first.num_states(),
               first.feature_dim(), config_hash, chain.samples.size());
  out << "begin_samples\n";
  for (std::size_t s = 0; s < chain.samples.size(); ++s) {
    write_sample(out, chain.samples[s], static_cast<int>(s));
  }
  out << "end_samples\n";
}

void save_posterior(const MeanFieldState& state, int num_draws,
                    std::uint64_t draw_seed, std::uint64_t config_hash,
                    const std::string& path) {
  std::ofstream out = open_out(path);
  write_header(out, "meanfield", state.num_dims, state.num_states,
               state.feature_dim, config_hash,
               static_cast<std::size_t>(num_draws));
  out << "begin_factors\n";
  for (int i = 1; i <= state.num_dims; ++i) {
    out << "gamma " << i << ' ' << state.gamma_shape[i - 1] << ' '
        << state.gamma_rate << "\n";
    const Eigen::MatrixXd& dir =
        state.transition_dirichlet[static_cast<std::size_t>(i - 1)];
    out << "dirichlet " << i;
    for (int r = 0; r < dir.rows(); ++r) {
      for (int c = 0; c < dir.cols(); ++c) out << ' ' << dir(r, c);
    }
    out << "\n";
    for (int k = 1; k <= state.num_states; ++k) {
      out << "wmean " << i << ' ' << k;
      write_vector(out, state.weight_mean[static_cast<std::size_t>(i - 1)]
                                         [static_cast<std::size_t>(k - 1)]);
      out << "\n";
      const Eigen::MatrixXd& cov =
          state.weight_cov[static_cast<std::size_t>(i - 1)]
                          [static_cast<std::size_t>(k - 1)];
      out << "wcov " << i << ' ' << k;
      for (Eigen::Index r = 0; r < cov.rows(); ++r) {
        for (Eigen::Index c = 0; c < cov.cols(); ++c) out << ' ' << cov(r, c);
      }
      out << "\n";
    }
  }
  out << "end_factors\n";
  out << "begin_samples\n";
  std::mt19937_64 rng(draw_seed);
  for (int s = 0; s < num_draws; ++s) {
    write_sample(out, sample_params(state, rng), s);
  }
  out << "end_samples\n";
}

PosteriorFile load_posterior(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open posterior file: " + path);

  PosteriorFile pf;
  std::string line;
  std::size_t lineno = 0;
  std::size_t n_samples = 0;

  auto next_tokens = [&](std::istringstream& ss, const std::string& key) {
    std::string k;
    ss >> k;
    if (k != key) parse_fail(path, lineno, "expected `" + key + "`");
  };

  // Header
  {
    std::getline(in, line);
    ++lineno;
    if (line.rfind("fshawkes_posterior", 0) != 0) {
      parse_fail(path, lineno, "not a posterior file");
    }
    auto read_kv = [&](const std::string& key) -> std::string {
      std::getline(in, line);
      ++lineno;
      std::istringstream ss(line);
      next_tokens(ss, key);
      std::string v;
      ss >> v;
      return v;
    };
    pf.kind = read_kv("kind");
    pf.num_dims = std::stoi(read_kv("dims"));
    pf.num_states = std::stoi(read_kv("states"));
    pf.feature_dim = std::stoi(read_kv("feature_dim"));
    pf.config_hash = std::stoull(read_kv("config_hash"), nullptr, 16);
    n_samples = std::stoull(read_kv("samples"));
  }

  const int m = pf.num_dims, k = pf.num_states, d = pf.feature_dim;
  ModelParams blank;
  blank.lambda_bar = Eigen::VectorXd::Zero(m);
  blank.transition.assign(static_cast<std::size_t>(m),
                          Eigen::MatrixXd::Zero(k, k));
  blank.weights.assign(
      static_cast<std::size_t>(m),
      std::vector<Eigen::VectorXd>(static_cast<std::size_t>(k),
                                   Eigen::VectorXd::Zero(d)));
  pf.samples.assign(n_samples, blank);

  pf.factors.num_dims = m;
  pf.factors.num_states = k;
  pf.factors.feature_dim = d;
  pf.factors.gamma_shape = Eigen::VectorXd::Zero(m);
  pf.factors.transition_dirichlet.assign(static_cast<std::size_t>(m),
                                         Eigen::MatrixXd::Zero(k, k));
  pf.factors.weight_mean.assign(
      static_cast<std::size_t>(m),
      std::vector<Eigen::VectorXd>(static_cast<std::size_t>(k),
                                   Eigen::VectorXd::Zero(d)));
  pf.factors.weight_cov.assign(
      static_cast<std::size_t>(m),
      std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(k),
                                   Eigen::MatrixXd::Zero(d, d)));

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "begin_factors" || line == "end_factors" ||
        line == "begin_samples" || line == "end_samples") {
      continue;
    }
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "gamma") {
      int i;
      ss >> i;
      pf.has_factors = true;
      ss >> pf.factors.gamma_shape[i - 1] >> pf.factors.gamma_rate;
    } else if (tag == "dirichlet") {
      int i;
      ss >> i;
      Eigen::MatrixXd& dir =
          pf.factors.transition_dirichlet[static_cast<std::size_t>(i - 1)];
      for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) ss >> dir(r, c);
      }
    } else if (tag == "wmean") {
      int i, s;
      ss >> i >> s;
      Eigen::VectorXd& v = pf.factors.weight_mean[static_cast<std::size_t>(
          i - 1)][static_cast<std::size_t>(s - 1)];
      for (int j = 0; j < d; ++j) ss >> v[j];
    } else if (tag == "wcov") {
      int i, s;
      ss >> i >> s;
      Eigen::MatrixXd& cov = pf.factors.weight_cov[static_cast<std::size_t>(
          i - 1)][static_cast<std::size_t>(s - 1)];
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) ss >> cov(r, c);
      }
    } else if (tag == "lambda") {
      std::size_t idx;
      ss >> idx;
      if (idx >= n_samples) parse_fail(path, lineno, "sample index range");
      for (int i = 0; i < m; ++i) ss >> pf.samples[idx].lambda_bar[i];
    } else if (tag == "phi") {
      std::size_t idx;
      int i;
      ss >> idx >> i;
      Eigen::MatrixXd& phi =
          pf.samples.at(idx).transition[static_cast<std::size_t>(i - 1)];
      for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) ss >> phi(r, c);
      }
    } else if (tag == "w") {
      std::size_t idx;
      int i, s;
      ss >> idx >> i >> s;
      Eigen::VectorXd& v =
          pf.samples.at(idx).weights[static_cast<std::size_t>(i - 1)]
                                    [static_cast<std::size_t>(s - 1)];
      for (int j = 0; j < d; ++j) ss >> v[j];
    } else {
      parse_fail(path, lineno, "unknown record `" + tag + "`");
    }
    if (ss.fail()) parse_fail(path, lineno, "short record `" + tag + "`");
  }
  return pf;
}

ModelParams posterior_mean(const PosteriorFile& posterior) {
  if (posterior.has_factors) {
    return posterior_mean_params(posterior.factors);
  }
  if (posterior.samples.empty()) {
    throw std::invalid_argument("posterior_mean: no samples");
  }
  ModelParams mean = posterior.samples.front();
  for (std::size_t s = 1; s < posterior.samples.size(); ++s) {
    const ModelParams& p = posterior.samples[s];
    mean.lambda_bar += p.lambda_bar;
    for (std::size_t i = 0; i < mean.transition.size(); ++i) {
      mean.transition[i] += p.transition[i];
      for (std::size_t st = 0; st < mean.weights[i].size(); ++st) {
        mean.weights[i][st] += p.weights[i][st];
      }
    }
  }
  const double n = static_cast<double>(posterior.samples.size());
  mean.lambda_bar /= n;
  for (auto& phi : mean.transition) {
    phi /= n;
    for (int r = 0; r < phi.rows(); ++r) phi.row(r) /= phi.row(r).sum();
  }
  for (auto& per_state : mean.weights) {
    for (auto& w : per_state) w /= n;
  }
  return mean;
}

}  // namespace fshawkes
