#include "qbt/monitor.hpp"

#include "qbt/csv.hpp"
#include "qbt/parallel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <variant>

namespace qbt {

namespace {

using cd = std::complex<double>;
template <int D>
using Mat = Eigen::Matrix<cd, D, D>;
template <int D>
using Super = Eigen::Matrix<cd, D * D, D * D>;
template <int D>
using Vec = Eigen::Matrix<cd, D * D, 1>;

template <int D>
double trace_product(const Mat<D>& a, const Mat<D>& b) {
  return a.cwiseProduct(b.transpose()).sum().real();
}

template <int D>
bool is_scalar_identity(const Mat<D>& m, double& value) {
  value = m(0, 0).real();
  for (int j = 0; j < D; ++j)
    for (int i = 0; i < D; ++i) {
      const cd expected = i == j ? cd(value, 0) : cd(0, 0);
      if (m(i, j) != expected) return false;
    }
  return true;
}

template <int D>
Mat<D> hermitize_normalize(const Mat<D>& m, double trace) {
  return (m + m.adjoint()) * (0.5 / trace);
}

// Outcome effect E_x = sum_k M^dag M together with its exact-identity shortcut.
template <int D>
struct Effect {
  Mat<D> m;
  bool scalar = false;
  double value = 0;

  Effect() = default;
  explicit Effect(const Mat<D>& e) : m(e) { scalar = is_scalar_identity<D>(m, value); }
};

template <int D>
struct Kernel {
  Unravelling kind;
  double eta, kappa, dt;
  Super<D> channel;
  Mat<D> c, cdc, quadrature;
  double sqrt_eta_kappa;

  // photodetection
  Mat<D> no_click_1, no_click_2, click;
  Effect<D> effect_no_click, effect_click, effect_total;
  bool no_click_is_total = false;

  // homodyne
  Mat<D> drift, unread, homodyne_base;
  Effect<D> homodyne_total;

  Kernel(const ModelParams& p, Hypothesis q, const MeasurementScheme& s)
      : kind(s.kind), eta(s.eta), kappa(p.kappa), dt(s.dt) {
    const bool include_aux = s.kind == Unravelling::None;
    channel = propagator_matrix(p, q, D, s.dt, include_aux);
    c = lift(jump_operator(p.coupling), D);
    cdc = c.adjoint() * c;
    quadrature = c + c.adjoint();
    sqrt_eta_kappa = std::sqrt(eta * kappa);

    const Mat<D> id = Mat<D>::Identity();
    drift = id - 0.5 * kappa * dt * cdc;
    unread = std::sqrt((1.0 - eta) * kappa * dt) * c;
    const Mat<D> unread_effect = unread.adjoint() * unread;

    no_click_1 = drift;
    no_click_2 = unread;
    click = std::sqrt(eta * kappa * dt) * c;
    effect_no_click = Effect<D>(Mat<D>(no_click_1.adjoint() * no_click_1 + unread_effect));
    effect_click = Effect<D>(Mat<D>(click.adjoint() * click));
    effect_total = Effect<D>(Mat<D>(effect_no_click.m + effect_click.m));
    no_click_is_total = effect_no_click.m == effect_total.m;

    homodyne_base = drift.adjoint() * drift + unread_effect;
    // Gaussian average of M1^dag M1 over dy ~ N(0, dt) adds eta kappa dt c^dag c.
    homodyne_total = Effect<D>(Mat<D>(homodyne_base + (eta * kappa * dt) * cdc));
  }

  Mat<D> evolve(const Mat<D>& rho) const {
    Vec<D> v = channel * Eigen::Map<const Vec<D>>(rho.data());
    const Mat<D> r = Eigen::Map<const Mat<D>>(v.data());
    return hermitize_normalize<D>(r, r.trace().real());
  }

  double click_probability(const Mat<D>& rho) const { return eta * kappa * dt * trace_product<D>(cdc, rho); }
  double homodyne_mean(const Mat<D>& rho) const {
    return sqrt_eta_kappa * trace_product<D>(quadrature, rho) * dt;
  }

  static double ratio(const Effect<D>& e, const Effect<D>& total, const Mat<D>& rho) {
    if (e.scalar && total.scalar) return e.value / total.value;
    return trace_product<D>(e.m, rho) / trace_product<D>(total.m, rho);
  }

  double probability(const Mat<D>& rho, double x) const {
    switch (kind) {
      case Unravelling::None:
        return 1.0;
      case Unravelling::Photodetection:
        if (x == 0) return no_click_is_total ? 1.0 : ratio(effect_no_click, effect_total, rho);
        if (x == 1) return ratio(effect_click, effect_total, rho);
        throw std::invalid_argument("photodetection outcome must be 0 or 1");
      case Unravelling::Homodyne: {
        const Mat<D> m1 = drift + (sqrt_eta_kappa * x) * c;
        const Effect<D> e(Mat<D>(m1.adjoint() * m1 + unread.adjoint() * unread));
        if (e.m == homodyne_total.m) return 1.0;
        return ratio(e, homodyne_total, rho);
      }
    }
    return 0;
  }

  // Applies the outcome's Kraus family in place; returns its probability (0 = impossible).
  double measure(Mat<D>& rho, double x) const {
    const double prob = probability(rho, x);
    if (!(prob > 0) || !std::isfinite(prob)) return 0;
    Mat<D> out;
    switch (kind) {
      case Unravelling::None:
        return 1.0;
      case Unravelling::Photodetection:
        if (x == 0)
          out = no_click_1 * rho * no_click_1.adjoint() + no_click_2 * rho * no_click_2.adjoint();
        else
          out = click * rho * click.adjoint();
        break;
      case Unravelling::Homodyne: {
        const Mat<D> m1 = drift + (sqrt_eta_kappa * x) * c;
        out = m1 * rho * m1.adjoint() + unread * rho * unread.adjoint();
        break;
      }
    }
    const double tr = out.trace().real();
    if (!(tr > 0)) return 0;
    rho = hermitize_normalize<D>(out, tr);
    return prob;
  }

  double draw(const Mat<D>& rho, NoiseStream& noise) const {
    switch (kind) {
      case Unravelling::Photodetection: {
        const double p = click_probability(rho);
        if (p > 1) throw std::domain_error("click probability exceeds 1; reduce dt");
        return noise.click(p) ? 1.0 : 0.0;
      }
      case Unravelling::Homodyne:
        return homodyne_mean(rho) + noise.wiener_increment();
      case Unravelling::None:
        return 0.0;
    }
    return 0.0;
  }
};

template <int D>
StateCheck simulate_fixed(const ModelParams& p, Hypothesis true_q, const MeasurementScheme& s, const State& rho0,
                          std::size_t n_steps, NoiseStream& noise, std::span<const std::size_t> snaps,
                          bool check_states, const std::function<void(const SnapshotView&)>& on_snapshot,
                          std::vector<double>* record) {
  const Kernel<D> kb(p, Hypothesis::Bose, s);
  const Kernel<D> kf(p, Hypothesis::Fermi, s);
  const Kernel<D>& kt = true_q == Hypothesis::Bose ? kb : kf;

  Mat<D> rb = rho0.matrix();
  Mat<D> rf = rb;
  double lb = 0, lf = 0;
  StateCheck check;
  std::size_t next = 0;

  auto emit = [&](std::size_t n) {
    while (next < snaps.size() && snaps[next] == n) {
      if (on_snapshot) {
        const Op ob = rb, of = rf;
        on_snapshot(SnapshotView{next, n, ob, of, lb, lf});
      }
      ++next;
    }
  };
  auto inspect = [&](const Mat<D>& r) {
    Eigen::SelfAdjointEigenSolver<Mat<D>> es(r, Eigen::EigenvaluesOnly);
    check.min_eigenvalue = std::min(check.min_eigenvalue, es.eigenvalues().minCoeff());
    check.max_trace_defect = std::max(check.max_trace_defect, std::abs(r.trace().real() - 1.0));
  };

  if (record) record->reserve(n_steps);
  if (check_states) inspect(rb);
  emit(0);
  for (std::size_t n = 1; n <= n_steps; ++n) {
    rb = kb.evolve(rb);
    rf = kf.evolve(rf);
    const double x = kt.draw(true_q == Hypothesis::Bose ? rb : rf, noise);
    const double pb = kb.measure(rb, x);
    const double pf = kf.measure(rf, x);
    if (!(pb > 0) || !(pf > 0))
      throw std::domain_error("measurement outcome has zero probability under a hypothesis (dt too large?)");
    lb += std::log(pb);
    lf += std::log(pf);
    if (record) record->push_back(x);
    if (check_states) {
      inspect(rb);
      inspect(rf);
    }
    emit(n);
  }
  return check;
}

void check_snapshots(std::span<const std::size_t> snaps, std::size_t n_steps) {
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    if (snaps[i] > n_steps) throw std::invalid_argument("snapshot step beyond the trajectory length");
    if (i > 0 && snaps[i] < snaps[i - 1]) throw std::invalid_argument("snapshot steps must be sorted");
  }
}

}  // namespace

struct Filter::Impl {
  std::variant<Kernel<2>, Kernel<4>> kernel;
};

std::string_view to_string(Unravelling u) {
  switch (u) {
    case Unravelling::Photodetection:
      return "photodetection";
    case Unravelling::Homodyne:
      return "homodyne";
    case Unravelling::None:
      return "none";
  }
  return "?";
}

void MeasurementScheme::validate(const ModelParams& p) const {
  if (!(eta >= 0) || !(eta <= 1)) throw std::invalid_argument("eta must lie in [0, 1]");
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive and finite");
  // Relative slack so that dt = kMaxKappaDt / kappa is accepted despite rounding.
  if (p.kappa * dt > kMaxKappaDt * (1 + 1e-12))
    throw std::invalid_argument("stability guard violated: kappa * dt = " + format_number(p.kappa * dt) +
                                " exceeds " + format_number(kMaxKappaDt));
}

KrausSet kraus_photodetection(const ModelParams& p, const MeasurementScheme& s, Eigen::Index dim) {
  if (s.kind != Unravelling::Photodetection) throw std::invalid_argument("kraus_photodetection: scheme is not photodetection");
  const Op c = lift(jump_operator(p.coupling), dim);
  const Op id = identity(dim);
  KrausSet k;
  k.families.push_back({Op(id - 0.5 * p.kappa * s.dt * (c.adjoint() * c)),
                        Op(std::sqrt((1.0 - s.eta) * p.kappa * s.dt) * c)});
  k.families.push_back({Op(std::sqrt(s.eta * p.kappa * s.dt) * c)});
  return k;
}

KrausSet kraus_homodyne(const ModelParams& p, const MeasurementScheme& s, double dy, Eigen::Index dim) {
  if (s.kind != Unravelling::Homodyne) throw std::invalid_argument("kraus_homodyne: scheme is not homodyne");
  const Op c = lift(jump_operator(p.coupling), dim);
  const Op id = identity(dim);
  KrausSet k;
  k.families.push_back({Op(id - 0.5 * p.kappa * s.dt * (c.adjoint() * c) + std::sqrt(s.eta * p.kappa) * dy * c),
                        Op(std::sqrt((1.0 - s.eta) * p.kappa * s.dt) * c)});
  return k;
}

Op completeness(const KrausSet& k) {
  if (k.families.empty() || k.families.front().empty()) throw std::invalid_argument("empty Kraus set");
  const Eigen::Index d = k.families.front().front().rows();
  Op sum = Op::Zero(d, d);
  for (const auto& family : k.families)
    for (const Op& m : family) sum += m.adjoint() * m;
  return sum;
}

Filter::Filter(const ModelParams& p, Hypothesis q, const MeasurementScheme& s, Eigen::Index dim) {
  p.validate();
  s.validate(p);
  check_dim(dim);
  if (dim == 2)
    impl_ = std::make_unique<Impl>(Impl{Kernel<2>(p, q, s)});
  else
    impl_ = std::make_unique<Impl>(Impl{Kernel<4>(p, q, s)});
}
Filter::~Filter() = default;
Filter::Filter(Filter&&) noexcept = default;
Filter& Filter::operator=(Filter&&) noexcept = default;

Eigen::Index Filter::dim() const { return impl_->kernel.index() == 0 ? 2 : 4; }

Op Filter::evolve(const Op& rho) const {
  if (rho.rows() != dim()) throw DimensionError("Filter::evolve: dimension mismatch");
  return std::visit(
      [&](const auto& k) -> Op {
        using K = std::decay_t<decltype(k)>;
        constexpr int D = std::is_same_v<K, Kernel<2>> ? 2 : 4;
        return k.evolve(Mat<D>(rho));
      },
      impl_->kernel);
}

double Filter::outcome_probability(const Op& evolved, double outcome) const {
  if (evolved.rows() != dim()) throw DimensionError("Filter: dimension mismatch");
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        constexpr int D = std::is_same_v<K, Kernel<2>> ? 2 : 4;
        return k.probability(Mat<D>(evolved), outcome);
      },
      impl_->kernel);
}

double Filter::measure(Op& evolved, double outcome) const {
  if (evolved.rows() != dim()) throw DimensionError("Filter: dimension mismatch");
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        constexpr int D = std::is_same_v<K, Kernel<2>> ? 2 : 4;
        Mat<D> r = evolved;
        const double prob = k.measure(r, outcome);
        if (prob > 0) evolved = r;
        return prob;
      },
      impl_->kernel);
}

StepResult step(const ModelParams& p, Hypothesis q, const MeasurementScheme& s, const State& rho, double outcome) {
  const Filter f(p, q, s, rho.dim());
  Op r = f.evolve(rho.matrix());
  const double prob = f.measure(r, outcome);
  if (!(prob > 0)) throw std::domain_error("step: outcome has zero probability (dt too large or impossible outcome)");
  return {State::normalized(r), std::log(prob)};
}

double sample_outcome(const ModelParams& p, Hypothesis, const MeasurementScheme& s, const State& rho_true,
                      NoiseStream& noise) {
  s.validate(p);
  const Op c = lift(jump_operator(p.coupling), rho_true.dim());
  switch (s.kind) {
    case Unravelling::Photodetection: {
      const double prob = s.eta * p.kappa * s.dt * ((c.adjoint() * c) * rho_true.matrix()).trace().real();
      if (prob > 1) throw std::domain_error("click probability exceeds 1; reduce dt");
      return noise.click(prob) ? 1.0 : 0.0;
    }
    case Unravelling::Homodyne: {
      const double mean = std::sqrt(s.eta * p.kappa) * ((c + c.adjoint()) * rho_true.matrix()).trace().real() * s.dt;
      return mean + noise.wiener_increment();
    }
    case Unravelling::None:
      return 0.0;
  }
  return 0.0;
}

double posterior_bose(double loglik_B, double loglik_F) {
  const double d = loglik_F - loglik_B;
  if (d > 0) {
    const double e = std::exp(-d);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(d));
}

std::size_t step_count(double t, double dt) {
  if (!(t >= 0) || !(dt > 0)) throw std::invalid_argument("step_count: need t >= 0 and dt > 0");
  return static_cast<std::size_t>(std::llround(t / dt));
}

std::size_t TrajectoryResult::snapshot_at(double t) const {
  if (snapshot_steps.empty()) throw std::out_of_range("trajectory has no snapshots");
  std::size_t best = 0;
  for (std::size_t i = 1; i < snapshot_steps.size(); ++i)
    if (std::abs(time(i) - t) < std::abs(time(best) - t)) best = i;
  return best;
}

StateCheck simulate(const ModelParams& p, Hypothesis true_q, const MeasurementScheme& s, const State& rho0,
                    std::size_t n_steps, NoiseStream& noise, std::span<const std::size_t> snapshot_steps,
                    bool check_states, const std::function<void(const SnapshotView&)>& on_snapshot,
                    std::vector<double>* record) {
  p.validate();
  s.validate(p);
  if (std::abs(noise.dt() - s.dt) > 1e-12 * s.dt) throw std::invalid_argument("noise stream dt differs from scheme dt");
  check_snapshots(snapshot_steps, n_steps);
  if (rho0.dim() == 2)
    return simulate_fixed<2>(p, true_q, s, rho0, n_steps, noise, snapshot_steps, check_states, on_snapshot, record);
  return simulate_fixed<4>(p, true_q, s, rho0, n_steps, noise, snapshot_steps, check_states, on_snapshot, record);
}

TrajectoryResult run_trajectory(const ModelParams& p, Hypothesis true_q, const MeasurementScheme& s, const State& rho0,
                                double t, NoiseStream& noise, const TrajectoryOptions& options) {
  const std::size_t n = step_count(t, s.dt);
  TrajectoryResult r;
  r.truth = true_q;
  r.dt = s.dt;
  r.snapshot_steps = options.snapshot_steps;
  if (r.snapshot_steps.empty()) {
    r.snapshot_steps.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) r.snapshot_steps[i] = i;
  }
  const std::size_t m = r.snapshot_steps.size();
  r.cond_B.reserve(m);
  r.cond_F.reserve(m);
  r.loglik_B.reserve(m);
  r.loglik_F.reserve(m);
  r.posterior_B.reserve(m);
  const StateCheck check = simulate(
      p, true_q, s, rho0, n, noise, r.snapshot_steps, options.check_states,
      [&](const SnapshotView& v) {
        r.cond_B.emplace_back(v.rho_B);
        r.cond_F.emplace_back(v.rho_F);
        r.loglik_B.push_back(v.loglik_B);
        r.loglik_F.push_back(v.loglik_F);
        r.posterior_B.push_back(posterior_bose(v.loglik_B, v.loglik_F));
      },
      options.keep_record ? &r.record : nullptr);
  r.min_eigenvalue = check.min_eigenvalue;
  r.max_trace_defect = check.max_trace_defect;
  return r;
}

std::vector<MeanState> ensemble_mean_state(const ModelParams& p, Hypothesis true_q, const MeasurementScheme& s,
                                           const State& rho0, std::span<const std::size_t> steps, std::size_t n_traj,
                                           std::uint64_t seed, unsigned workers, double noise_dt) {
  if (n_traj < 2) throw std::invalid_argument("ensemble_mean_state needs at least two trajectories");
  if (steps.empty()) return {};
  const std::size_t n_steps = steps.back();
  const std::size_t m = steps.size();
  std::vector<std::vector<Op>> states(n_traj);
  parallel_for(n_traj, workers, [&](std::size_t i) {
    NoiseStream noise(seed, i, s.dt, noise_dt);
    std::vector<Op> mine(m);
    simulate(p, true_q, s, rho0, n_steps, noise, steps, false, [&](const SnapshotView& v) {
      mine[v.index] = true_q == Hypothesis::Bose ? v.rho_B : v.rho_F;
    });
    states[i] = std::move(mine);
  });

  std::vector<MeanState> out(m);
  const Eigen::Index d = rho0.dim();
  for (std::size_t k = 0; k < m; ++k) {
    Op mean = Op::Zero(d, d);
    for (std::size_t i = 0; i < n_traj; ++i) mean += states[i][k];
    mean /= static_cast<double>(n_traj);
    double ss = 0;
    for (std::size_t i = 0; i < n_traj; ++i) ss += (states[i][k] - mean).squaredNorm();
    out[k] = {mean, std::sqrt(ss / (static_cast<double>(n_traj) * static_cast<double>(n_traj - 1)))};
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryResult> trajectories, std::size_t first_id, bool header) {
  if (header) out << "trajectory_id,step,outcome,loglik_B,loglik_F,posterior_B\n";
  for (std::size_t t = 0; t < trajectories.size(); ++t) {
    const TrajectoryResult& r = trajectories[t];
    for (std::size_t i = 0; i < r.snapshot_steps.size(); ++i) {
      const std::size_t n = r.snapshot_steps[i];
      out << (first_id + t) << ',' << n << ',';
      if (n > 0 && n <= r.record.size()) out << format_number(r.record[n - 1]);
      out << ',' << format_number(r.loglik_B[i]) << ',' << format_number(r.loglik_F[i]) << ','
          << format_number(r.posterior_B[i]) << '\n';
    }
  }
}

}  // namespace qbt
