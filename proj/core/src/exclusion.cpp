#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cbounds/mc_harness.hpp"
#include "cbounds/parallel.hpp"
#include "cbounds/simulators.hpp"

namespace cbounds {

namespace {

std::size_t wrap(long v, long L) {
  const long r = v % L;
  return static_cast<std::size_t>(r < 0 ? r + L : r);
}

// Nearest-neighbour geometry of the torus; edge e joins site e / d to its
// successor in direction e % d.
class Torus {
 public:
  Torus(int d, long L) : d_(static_cast<std::size_t>(d)), L_(static_cast<std::size_t>(L)), strides_(d_) {
    std::size_t s = 1;
    for (std::size_t k = 0; k < d_; ++k) {
      strides_[k] = s;
      s *= L_;
    }
    volume_ = s;
  }

  std::size_t volume() const { return volume_; }
  std::size_t edges() const { return volume_ * d_; }

  std::size_t step(std::size_t site, std::size_t k) const {
    const std::size_t c = (site / strides_[k]) % L_;
    return c + 1 < L_ ? site + strides_[k] : site - (L_ - 1) * strides_[k];
  }

  std::pair<std::size_t, std::size_t> edge(std::size_t e) const {
    const std::size_t s = e / d_;
    return {s, step(s, e % d_)};
  }

  std::size_t coordinate(std::size_t site, std::size_t k) const { return (site / strides_[k]) % L_; }

 private:
  std::size_t d_;
  std::size_t L_;
  std::vector<std::size_t> strides_;
  std::size_t volume_ = 0;
};

struct Window {
  std::vector<std::size_t> sites;
  std::vector<double> table;  // empty: product indicator over sites

  double operator()(const std::vector<std::uint8_t>& eta) const {
    if (table.empty()) {
      for (std::size_t s : sites)
        if (!eta[s]) return 0.0;
      return 1.0;
    }
    std::size_t bits = 0;
    for (std::size_t i = 0; i < sites.size(); ++i)
      if (eta[sites[i]]) bits |= std::size_t{1} << i;
    return table[bits];
  }
};

Window make_window(const SepConfig& config) {
  Window w;
  if (const auto* occ = std::get_if<OccupationSet>(&config.functional)) {
    for (const auto& x : occ->sites) w.sites.push_back(config.site_index(x));
  } else {
    const auto& loc = std::get<LocalFunction>(config.functional);
    for (const auto& x : loc.window) w.sites.push_back(config.site_index(x));
    w.table = loc.table;
  }
  return w;
}

void check_horizons(const std::vector<double>& horizons) {
  require(!horizons.empty(), ErrorCode::InvalidArgument, "at least one horizon is required");
  require(horizons.front() >= 0.0, ErrorCode::InvalidArgument, "horizons must be nonnegative");
  require(std::is_sorted(horizons.begin(), horizons.end()), ErrorCode::InvalidArgument,
          "horizons must be nondecreasing");
}

}  // namespace

std::size_t SepConfig::volume() const {
  std::size_t v = 1;
  for (int k = 0; k < d; ++k) v *= static_cast<std::size_t>(L);
  return v;
}

std::size_t SepConfig::site_index(const std::vector<long>& x) const {
  require(x.size() == static_cast<std::size_t>(d), ErrorCode::DimensionMismatch, "site must have d coordinates");
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (std::size_t k = 0; k < x.size(); ++k) {
    idx += wrap(x[k], L) * stride;
    stride *= static_cast<std::size_t>(L);
  }
  return idx;
}

void SepConfig::validate() const {
  require(d >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  require(L >= 4 && L % 2 == 0, ErrorCode::InvalidArgument, "torus side must be even and >= 4");
  require(edge_rate > 0.0, ErrorCode::NonPositiveParameter, "edge_rate must be positive");
  require(initial.size() == volume(), ErrorCode::DimensionMismatch, "initial configuration has the wrong size");
  for (auto b : initial) require(b <= 1, ErrorCode::InvalidArgument, "configuration entries must be 0 or 1");
  auto inside = [&](const std::vector<long>& x) {
    require(x.size() == static_cast<std::size_t>(d), ErrorCode::DimensionMismatch, "site must have d coordinates");
    for (long c : x) require(c >= 0 && c < L, ErrorCode::InvalidArgument, "functional site outside the torus");
  };
  if (const auto* occ = std::get_if<OccupationSet>(&functional)) {
    for (const auto& x : occ->sites) inside(x);
  } else {
    const auto& loc = std::get<LocalFunction>(functional);
    require(loc.window.size() < 24, ErrorCode::InvalidArgument, "local function window too large");
    for (const auto& x : loc.window) inside(x);
    require(loc.table.size() == (std::size_t{1} << loc.window.size()), ErrorCode::DimensionMismatch,
            "local function table must have 2^|window| entries");
  }
}

std::vector<std::uint8_t> bernoulli_configuration(std::size_t volume, double density, RngStream& rng) {
  require(density >= 0.0 && density <= 1.0, ErrorCode::InvalidArgument, "density must lie in [0, 1]");
  std::vector<std::uint8_t> eta(volume);
  for (auto& b : eta) b = rng.bernoulli(density) ? 1 : 0;
  return eta;
}

SepRun simulate_sep(const SepConfig& config, const std::vector<double>& horizons, RngStream& rng) {
  config.validate();
  check_horizons(horizons);
  const Torus torus(config.d, config.L);
  const Window f = make_window(config);

  std::vector<std::uint8_t> in_window(torus.volume(), 0);
  for (std::size_t s : f.sites) in_window[s] = 1;
  std::vector<std::size_t> near;  // edges touching the window
  for (std::size_t e = 0; e < torus.edges(); ++e) {
    const auto [a, b] = torus.edge(e);
    if (in_window[a] || in_window[b]) near.push_back(e);
  }
  const double near_rate = config.edge_rate * static_cast<double>(near.size());
  const double far_rate = config.edge_rate * static_cast<double>(torus.edges() - near.size());

  SepRun run;
  run.horizons = horizons;
  std::vector<std::uint8_t> eta = config.initial;
  auto swap_edge = [&](std::size_t e) {
    const auto [a, b] = torus.edge(e);
    std::swap(eta[a], eta[b]);
  };
  // Exchanges away from the window do not change f, so between two window
  // events they are applied as a Poisson number of uniform far edges.
  auto advance_far = [&](double dt) {
    if (far_rate <= 0.0 || dt <= 0.0) return;
    const std::uint64_t n = rng.poisson(far_rate * dt);
    run.events += n;
    for (std::uint64_t i = 0; i < n; ++i) {
      std::size_t e;
      do {
        e = rng.index(torus.edges());
        const auto [a, b] = torus.edge(e);
        if (!in_window[a] && !in_window[b]) break;
      } while (true);
      swap_edge(e);
    }
  };

  double t = 0.0;
  double F = 0.0;
  double value = f(eta);
  std::size_t h = 0;
  while (h < horizons.size()) {
    const double next = near_rate > 0.0 ? t + rng.exponential(near_rate) : std::numeric_limits<double>::infinity();
    while (h < horizons.size() && horizons[h] <= next) {
      advance_far(horizons[h] - t);
      F += value * (horizons[h] - t);
      t = horizons[h];
      run.F.push_back(F);
      ++h;
    }
    if (h == horizons.size()) break;
    advance_far(next - t);
    F += value * (next - t);
    t = next;
    swap_edge(near[rng.index(near.size())]);
    ++run.events;
    value = f(eta);
  }
  run.final_config = std::move(eta);
  return run;
}

SepSiteRun simulate_sep_sites(const SepConfig& config, const std::vector<double>& horizons, long stride,
                              RngStream& rng) {
  config.validate();
  check_horizons(horizons);
  require(stride >= 1, ErrorCode::InvalidArgument, "stride must be >= 1");
  const Torus torus(config.d, config.L);

  SepSiteRun run;
  run.horizons = horizons;
  std::vector<std::int32_t> slot(torus.volume(), -1);
  for (std::size_t s = 0; s < torus.volume(); ++s) {
    bool sampled = true;
    for (std::size_t k = 0; k < static_cast<std::size_t>(config.d); ++k)
      sampled = sampled && torus.coordinate(s, k) % static_cast<std::size_t>(stride) == 0;
    if (sampled) {
      slot[s] = static_cast<std::int32_t>(run.sites.size());
      run.sites.push_back(s);
    }
  }
  std::vector<std::uint8_t> eta = config.initial;
  std::vector<double> last(run.sites.size(), 0.0);
  std::vector<double> acc(run.sites.size(), 0.0);
  auto touch = [&](std::size_t site, double t) {
    const std::int32_t i = slot[site];
    if (i < 0) return;
    const auto ui = static_cast<std::size_t>(i);
    if (eta[site]) acc[ui] += t - last[ui];
    last[ui] = t;
  };
  auto record = [&](double T) {
    std::vector<double> occ(run.sites.size());
    for (std::size_t i = 0; i < occ.size(); ++i) occ[i] = acc[i] + (eta[run.sites[i]] ? T - last[i] : 0.0);
    run.occupation.push_back(std::move(occ));
  };

  const double rate = config.edge_rate * static_cast<double>(torus.edges());
  const std::uint64_t n_edges = torus.edges();
  double t = 0.0;
  std::size_t h = 0;
  while (h < horizons.size()) {
    t += rng.exponential(rate);
    while (h < horizons.size() && horizons[h] <= t) record(horizons[h++]);
    if (h == horizons.size()) break;
    ++run.events;
    const auto [a, b] = torus.edge(rng.index(n_edges));
    if (eta[a] == eta[b]) continue;
    touch(a, t);
    touch(b, t);
    std::swap(eta[a], eta[b]);
  }
  return run;
}

CoupledSepProbe simulate_sep_coupled(const SepConfig& config, const std::vector<long>& x,
                                     const std::vector<double>& probe_times, const std::vector<long>& offsets,
                                     RngStream& rng) {
  config.validate();
  check_horizons(probe_times);
  const Torus torus(config.d, config.L);
  const std::size_t sx = config.site_index(x);
  const std::size_t sy = torus.step(sx, 0);
  require(config.initial[sx] != config.initial[sy], ErrorCode::InvalidArgument,
          "coupled start needs eta(x) != eta(y)");

  std::vector<std::uint8_t> eta1 = config.initial;
  std::vector<std::uint8_t> eta2 = config.initial;
  std::swap(eta2[sx], eta2[sy]);
  std::size_t d1 = sx;
  std::size_t d2 = sy;
  bool coalesced = false;

  std::vector<std::size_t> probe_sites;
  for (long off : offsets) {
    std::vector<long> z = x;
    z[0] += off;
    probe_sites.push_back(config.site_index(z));
  }

  CoupledSepProbe out;
  out.times = probe_times;
  out.offsets = offsets;
  out.coalescence = std::numeric_limits<double>::infinity();

  auto check_invariant = [&] {
    for (std::size_t s = 0; s < eta1.size(); ++s) {
      const bool differs = eta1[s] != eta2[s];
      const bool expected = !coalesced && (s == d1 || s == d2);
      if (differs != expected) fail(ErrorCode::InvariantBroken, "coupled copies differ off the discrepancy set");
    }
  };

  // Clocks ring at rate 2 edge_rate per edge; ring times inside an interval are
  // uniform order statistics, so the k-th of n is a Beta(k, n - k + 1) fraction.
  const double ring_rate = 2.0 * config.edge_rate * static_cast<double>(torus.edges());
  const std::uint64_t n_edges = torus.edges();
  double t = 0.0;
  for (double probe : probe_times) {
    if (!coalesced && probe > t) {
      const std::uint64_t n = rng.poisson(ring_rate * (probe - t));
      for (std::uint64_t k = 0; k < n; ++k) {
        ++out.events;
        const auto [a, b] = torus.edge(rng.index(n_edges));
        const bool heads = rng.coin();
        if ((a == d1 && b == d2) || (a == d2 && b == d1)) {
          std::swap(heads ? eta1[a] : eta2[a], heads ? eta1[b] : eta2[b]);
          coalesced = true;
          std::gamma_distribution<double> g1(static_cast<double>(k + 1));
          std::gamma_distribution<double> g2(static_cast<double>(n - k));
          const double u = g1(rng);
          out.coalescence = t + (probe - t) * u / (u + g2(rng));
          break;
        }
        if (!heads) continue;
        std::swap(eta1[a], eta1[b]);
        std::swap(eta2[a], eta2[b]);
        if (d1 == a) d1 = b; else if (d1 == b) d1 = a;
        if (d2 == a) d2 = b; else if (d2 == b) d2 = a;
      }
    }
    t = std::max(t, probe);
    check_invariant();
    std::vector<std::uint8_t> row(probe_sites.size(), 0);
    if (!coalesced)
      for (std::size_t j = 0; j < probe_sites.size(); ++j) row[j] = probe_sites[j] == d1 || probe_sites[j] == d2;
    out.indicator.push_back(std::move(row));
  }
  return out;
}

VarianceCurve occupation_variance_curve(int d, long L, const std::vector<double>& T_grid, std::size_t replicas,
                                        const RngStreamSpec& rng, long stride) {
  check_horizons(T_grid);
  require(replicas >= 2, ErrorCode::InvalidArgument, "at least two replicas are required");
  require(static_cast<double>(L) >= 10.0 * std::sqrt(T_grid.back()), ErrorCode::TorusTooSmall,
          "torus side must be at least 10 sqrt(max T)");
  if (stride <= 0) stride = d == 1 ? 1 : std::max(1L, L / 20);

  SepConfig base;
  base.d = d;
  base.L = L;
  base.edge_rate = SepConfig::default_edge_rate(d);
  base.functional = OccupationSet{{std::vector<long>(static_cast<std::size_t>(d), 0)}};

  struct Replica {
    std::vector<double> sq;  // site-averaged (F - T/2)^2 per horizon
    std::uint64_t events = 0;
  };
  // The product Bernoulli(1/2) law is invariant, so E F = T/2 exactly.
  const auto reps = parallel_map<Replica>(replicas, [&](std::size_t r) {
    RngStream stream(rng.child(r));
    SepConfig config = base;
    config.initial = bernoulli_configuration(config.volume(), 0.5, stream);
    const SepSiteRun run = simulate_sep_sites(config, T_grid, stride, stream);
    Replica rep;
    rep.events = run.events;
    for (std::size_t h = 0; h < T_grid.size(); ++h) {
      std::vector<double> sq(run.sites.size());
      for (std::size_t i = 0; i < sq.size(); ++i) {
        const double dev = run.occupation[h][i] - 0.5 * T_grid[h];
        sq[i] = dev * dev;
      }
      rep.sq.push_back(stable_sum(std::move(sq)) / static_cast<double>(run.sites.size()));
    }
    return rep;
  });

  VarianceCurve out;
  out.T = T_grid;
  for (const auto& rep : reps) out.events += rep.events;
  RngStream boot(rng.with_tag(rng.stream_tag + "/variance-bootstrap"));
  constexpr std::size_t kResamples = 1000;
  for (std::size_t h = 0; h < T_grid.size(); ++h) {
    std::vector<double> v(replicas);
    for (std::size_t r = 0; r < replicas; ++r) v[r] = reps[r].sq[h];
    out.var.push_back(stable_sum(v) / static_cast<double>(replicas));
    std::vector<double> means(kResamples);
    for (auto& m : means) {
      std::vector<double> pick(replicas);
      for (auto& p : pick) p = v[boot.index(replicas)];
      m = stable_sum(std::move(pick)) / static_cast<double>(replicas);
    }
    std::sort(means.begin(), means.end());
    out.ci_lo.push_back(means[static_cast<std::size_t>(0.025 * kResamples)]);
    out.ci_hi.push_back(means[static_cast<std::size_t>(0.975 * kResamples) - 1]);
  }
  return out;
}

}  // namespace cbounds
