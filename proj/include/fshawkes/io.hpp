#ifndef FSHAWKES_IO_HPP
#define FSHAWKES_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fshawkes/basis.hpp"
#include "fshawkes/gibbs.hpp"
#include "fshawkes/meanfield.hpp"
#include "fshawkes/simulator.hpp"
#include "fshawkes/types.hpp"

namespace fshawkes {

// ---------------------------------------------------------------------------
// Event files: CSV with header `time,dim,state`, one row per event in
// ascending time order, and a trailing terminal record `T,0,z(T)` closing
// the observation window. The state column records z at the event, i.e.
// the PRE-transition state (the path is left-continuous); the next row's
// label reveals the post-transition state. An optional `# dims=M states=K`
// comment right after the header pins the dimension/state counts, which
// are otherwise inferred from the data.
// ---------------------------------------------------------------------------

Realization load_events(const std::string& path);
void save_events(const Realization& data, const std::string& path);

// ---------------------------------------------------------------------------
// Run configuration (JSON): basis declarations, prior hyperparameters,
// solver budgets, the random seed, and optionally a generative model +
// horizon for `simulate`.
// ---------------------------------------------------------------------------

struct RunConfig {
  std::vector<BasisFunction> basis_functions;
  double support_end = 6.0;  // T_f

  std::vector<double> dirichlet_alpha = {1.0};  // broadcast if length 1
  double sigma2 = 1.0;

  int iterations = 200;
  int burn_in = -1;
  int thin = 1;
  int nodes_per_interval = 100;
  double tol = 1e-6;
  long long ll_grid_points = -1;
  std::uint64_t seed = 1;
  int threads = 1;

  bool has_model = false;
  ModelParams model;
  double horizon = 0.0;
  int initial_state = 1;

  BasisSet basis() const;
  Priors priors(int num_states) const;
  void validate() const;
};

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& config, const std::string& path);

// The built-in simulation configuration as a full RunConfig (model included).
RunConfig fixture_config();

// Fingerprint of the semantically meaningful fields (everything except the
// thread budget). Equal configs hash equal; any change to a field that can
// alter results changes the hash.
std::uint64_t config_hash(const RunConfig& config);

// ---------------------------------------------------------------------------
// Posterior files: line-oriented text with full double precision. Gibbs
// runs store the thinned parameter samples; mean-field runs store the
// factor parameters plus posterior draws.
// ---------------------------------------------------------------------------

struct PosteriorFile {
  std::string kind;  // "gibbs" or "meanfield"
  int num_dims = 0;
  int num_states = 0;
  int feature_dim = 0;
  std::uint64_t config_hash = 0;
  std::vector<ModelParams> samples;
  bool has_factors = false;
  MeanFieldState factors;
};

void save_posterior(const GibbsChain& chain, std::uint64_t config_hash,
                    const std::string& path);
void save_posterior(const MeanFieldState& state, int num_draws,
                    std::uint64_t draw_seed, std::uint64_t config_hash,
                    const std::string& path);
PosteriorFile load_posterior(const std::string& path);

// Posterior-mean parameters: factor means when available, otherwise the
// sample average (transition rows renormalized).
ModelParams posterior_mean(const PosteriorFile& posterior);

}  // namespace fshawkes

#endif
