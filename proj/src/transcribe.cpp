#include "delayoc/transcribe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace delayoc {

namespace {

std::int64_t pick_substeps(const TranscribeConfig& cfg) {
  if (cfg.q < 1) throw std::invalid_argument("q must be positive");
  if (cfg.substeps > 0) {
    if (cfg.substeps % (2 * cfg.q) != 0) throw std::invalid_argument("substeps must be a multiple of 2q");
    return cfg.substeps;
  }
  std::int64_t s = 2 * cfg.q;
  while (s < 64) s += 2 * cfg.q;
  return s;
}

template <class T>
T terminal_dist2(const ProblemDef& def, std::span<const T> x) {
  T d(0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& bound = def.terminal[i];
    if (!bound) continue;
    if (value_of(x[i]) < bound->lo) {
      const T e = T(bound->lo) - x[i];
      d += e * e;
    } else if (value_of(x[i]) > bound->hi) {
      const T e = x[i] - T(bound->hi);
      d += e * e;
    }
  }
  return d;
}

double l2_norm(std::span<const double> v, double weight) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s * weight);
}

}  // namespace

Transcription::Transcription(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice,
                             TranscribeConfig cfg)
    : problem_(problem), lattice_(lattice), lp_(lift_problem(problem, lattice)), cfg_(cfg) {
  icfg_.substeps_per_h = pick_substeps(cfg_);
  icfg_.validate();
  const auto m = static_cast<std::size_t>(problem_->m());
  size_ = static_cast<std::size_t>(lattice_.N * cfg_.q) * m;
  width_ = lattice_.h.to_double() / static_cast<double>(cfg_.q);
  dead_.assign(size_, false);
  const Rational b = problem_->def().b;
  for (std::int64_t g = 0; g < lattice_.N * cfg_.q; ++g) {
    const Rational start = lattice_.a + lattice_.h * Rational(g, cfg_.q);
    if (start >= b) {
      for (std::size_t j = 0; j < m; ++j) dead_[static_cast<std::size_t>(g) * m + j] = true;
    }
  }
}

template <class T>
T Transcription::evaluate(std::span<const T> z, StackedPath<T>& path, std::int64_t first_block) const {
  const auto m = static_cast<std::size_t>(problem_->m());
  const std::int64_t per_sample = icfg_.substeps_per_h / cfg_.q;
  const std::int64_t q = cfg_.q;
  BlockControlFn<T> ctl = [&](std::int64_t block, std::int64_t step, double, std::span<T> out) {
    const auto idx = static_cast<std::size_t>(block * q + step / per_sample) * m;
    std::copy_n(z.begin() + static_cast<std::ptrdiff_t>(idx), m, out.begin());
  };
  integrate_lifted_into<T>(lp_, ctl, icfg_, path, first_block);
  T c = cost_lifted<T>(lp_, path, ctl, icfg_);
  const auto xb = lifted_state_at_b<T>(lp_, path);
  return c + terminal_dist2<T>(problem_->def(), xb) * cfg_.rho;
}

double Transcription::objective(std::span<const double> z) const {
  if (z.size() != size_) throw std::invalid_argument("decision vector has the wrong size");
  StackedPath<double> path(lp_.blocks(), icfg_.substeps_per_h, problem_->n(), lattice_.a.to_double(),
                           lattice_.h.to_double() / static_cast<double>(icfg_.substeps_per_h));
  try {
    return evaluate<double>(z, path, 0);
  } catch (const IntegrationError&) {
    return std::numeric_limits<double>::infinity();
  }
}

std::vector<double> Transcription::gradient(std::span<const double> z, bool parallel) const {
  if (z.size() != size_) throw std::invalid_argument("decision vector has the wrong size");
  const int n = problem_->n();
  const double dt = lattice_.h.to_double() / static_cast<double>(icfg_.substeps_per_h);
  StackedPath<double> base(lp_.blocks(), icfg_.substeps_per_h, n, lattice_.a.to_double(), dt);
  evaluate<double>(z, base, 0);

  std::vector<double> grad(size_, 0.0);
  const std::size_t per_block = static_cast<std::size_t>(cfg_.q) * static_cast<std::size_t>(problem_->m());
  const auto count = static_cast<std::int64_t>(size_);
  std::exception_ptr failure;

#pragma omp parallel if (parallel)
  {
    StackedPath<Dual> path(lp_.blocks(), icfg_.substeps_per_h, n, lattice_.a.to_double(), dt);
    std::vector<Dual> zd(size_);
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < count; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      if (dead_[cu]) continue;
      try {
        const auto block = static_cast<std::int64_t>(cu / per_block);
        for (std::int64_t i = 0; i < block; ++i) {
          for (std::int64_t j = 0; j <= icfg_.substeps_per_h; ++j) {
            auto src = base.node(i, j);
            auto dst = path.node(i, j);
            for (int e = 0; e < n; ++e) dst[e] = Dual(src[e]);
          }
          for (std::int64_t j = 0; j < icfg_.substeps_per_h; ++j) {
            auto sl = base.slope_left(i, j);
            auto sr = base.slope_right(i, j);
            auto dl = path.slope_left(i, j);
            auto dr = path.slope_right(i, j);
            for (int e = 0; e < n; ++e) {
              dl[e] = Dual(sl[e]);
              dr[e] = Dual(sr[e]);
            }
          }
        }
        for (std::size_t k = 0; k < size_; ++k) zd[k] = Dual(z[k], k == cu ? 1.0 : 0.0);
        grad[cu] = evaluate<Dual>(zd, path, block).d;
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return grad;
}

void Transcription::project(std::span<double> z) const {
  const auto m = static_cast<std::size_t>(problem_->m());
  for (std::size_t k = 0; k < z.size(); ++k) {
    const auto& bound = problem_->def().omega[k % m];
    if (bound) z[k] = std::clamp(z[k], bound->lo, bound->hi);
  }
}

double Transcription::terminal_residual(std::span<const double> z) const {
  StackedPath<double> path(lp_.blocks(), icfg_.substeps_per_h, problem_->n(), lattice_.a.to_double(),
                           lattice_.h.to_double() / static_cast<double>(icfg_.substeps_per_h));
  evaluate<double>(z, path, 0);
  const auto xb = lifted_state_at_b<double>(lp_, path);
  return std::sqrt(terminal_dist2<double>(problem_->def(), xb));
}

ControlSignal Transcription::control(std::span<const double> z) const {
  return ControlSignal::sampled(problem_, lattice_, cfg_.q, std::vector<double>(z.begin(), z.end()));
}

double objective(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice,
                 std::span<const double> z, const TranscribeConfig& cfg) {
  return Transcription(std::move(problem), lattice, cfg).objective(z);
}

std::vector<double> objective_grad(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice,
                                   std::span<const double> z, const TranscribeConfig& cfg) {
  return Transcription(std::move(problem), lattice, cfg).gradient(z);
}

SolveResult solve(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice,
                  const SolveOptions& opts) {
  const Transcription tr(problem, lattice, opts.transcription);
  const double w = tr.sample_width();
  std::vector<double> z(tr.size(), 0.0);
  if (opts.seed) {
    if (opts.seed->size() != tr.size()) throw std::invalid_argument("seed has the wrong size");
    z = *opts.seed;
  }
  tr.project(z);
  double fz = tr.objective(z);
  if (!std::isfinite(fz)) throw IntegrationError("objective is not finite at the initial iterate", 0.0);

  std::vector<double> trial(z.size()), step(z.size());
  double alpha = 1.0;
  double step_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const auto g = tr.gradient(z, opts.parallel);

    // Projected unit step in the L2 metric decides convergence.
    for (std::size_t k = 0; k < z.size(); ++k) trial[k] = z[k] - g[k] / w;
    tr.project(trial);
    for (std::size_t k = 0; k < z.size(); ++k) step[k] = trial[k] - z[k];
    step_norm = l2_norm(step, w);
    if (step_norm <= opts.tolerance) {
      converged = true;
      break;
    }

    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t k = 0; k < z.size(); ++k) trial[k] = z[k] - alpha * g[k] / w;
      tr.project(trial);
      double decrease = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) decrease += g[k] * (z[k] - trial[k]);
      const double ft = tr.objective(trial);
      if (std::isfinite(ft) && ft <= fz - opts.armijo * decrease) {
        accepted = true;
        z.swap(trial);
        fz = ft;
        break;
      }
      alpha *= opts.shrink;
    }
    if (!accepted) break;
    alpha = std::min(alpha * 2.0, 1e6);
  }

  ControlSignal u = tr.control(z);
  Trajectory x = integrate_dde(problem, lattice, u, tr.integrator());
  const double cost = cost_delayed(*problem, lattice, x, u, tr.integrator());
  const double resid = tr.terminal_residual(z);
  SolveResult res{std::move(z), std::move(u), std::move(x), cost, fz, resid, step_norm, it, converged};
  return res;
}

}  // namespace delayoc
