#include "qtn/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace qtn {

double relative_l2(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size()) throw ShapeError("relative_l2: lengths differ");
    const double nv = v.norm();
    if (nv == 0.0) throw DegenerateMetricError("relative_l2: reference has zero norm");
    return (u - v).norm() / nv;
}

std::size_t aligned_sample(const std::vector<double>& times, double t, double tolerance) {
    const auto it = std::lower_bound(times.begin(), times.end(), t - tolerance);
    if (it == times.end() || std::abs(*it - t) > tolerance)
        throw AlignmentError("no sample within " + std::to_string(tolerance) + " of t = " + std::to_string(t));
    return static_cast<std::size_t>(it - times.begin());
}

DenseTrajectory signed_difference(const DenseTrajectory& ref, const DenseTrajectory& pred,
                                  std::span<const double> times, double dt) {
    DenseTrajectory out;
    out.solver = "difference";
    const double tol = 0.5 * dt;
    for (double t : times) {
        const auto& a = ref.states.at(aligned_sample(ref.times, t, tol));
        const auto& b = pred.states.at(aligned_sample(pred.times, t, tol));
        if (a.size() != b.size()) throw ShapeError("signed_difference: grids differ");
        out.times.push_back(t);
        out.states.push_back(a - b);
    }
    return out;
}

std::vector<Index> default_horizon_grid(Index steps, Index max_horizon) {
    const Index cap = max_horizon < 0 ? steps : std::min(steps, max_horizon);
    std::vector<Index> grid{0};
    for (Index decade = 1;; decade *= 10) {
        for (Index f : {1, 2, 5}) {
            if (f * decade > cap) return grid;
            grid.push_back(f * decade);
        }
    }
}

HorizonCurve restart_averaged_error(const DenseTrajectory& ref, const StepPlan& plan,
                                    const HorizonOptions& options) {
    const Index steps = static_cast<Index>(ref.states.size()) - 1;
    if (steps < 0) throw ConfigError("reference", "empty reference trajectory");
    if (options.restart_stride < 1) throw ConfigError("horizon.restart_stride", "must be >= 1");
    std::vector<Index> horizons =
        options.horizons.empty() ? default_horizon_grid(steps, options.max_horizon) : options.horizons;
    std::sort(horizons.begin(), horizons.end());
    horizons.erase(std::remove_if(horizons.begin(), horizons.end(), [&](Index m) { return m < 0 || m > steps; }),
                   horizons.end());
    if (horizons.empty()) throw ConfigError("horizon.max_m", "no horizon fits in the trajectory");
    const Index longest = horizons.back();

    std::vector<Index> starts;
    for (Index k = 0; k + horizons.front() <= steps; k += options.restart_stride) starts.push_back(k);
    if (starts.empty()) throw ConfigError("horizon.restart_stride", "empty restart set");

    const std::size_t nh = horizons.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> errors(starts.size() * nh, nan);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= starts.size()) return;
            try {
                const Index k = starts[r];
                const Index reach = std::min(longest, steps - k);
                Mps state = encode_state(ref.states[static_cast<std::size_t>(k)], plan);
                std::size_t h = 0;
                for (Index m = 0; m <= reach; ++m) {
                    if (m > 0) state = qtn_step(state, plan, k + m).state;
                    while (h < nh && horizons[h] < m) ++h;
                    if (h < nh && horizons[h] == m)
                        errors[r * nh + h] =
                            relative_l2(decode_state(state, plan), ref.states[static_cast<std::size_t>(k + m)]);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = starts.size();
                return;
            }
        }
    };
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, starts.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    HorizonCurve curve;
    for (std::size_t h = 0; h < nh; ++h) {
        double sum = 0.0;
        Index count = 0;
        for (std::size_t r = 0; r < starts.size(); ++r) {
            const double e = errors[r * nh + h];
            if (std::isnan(e)) continue;
            sum += e;
            ++count;
        }
        if (count == 0) continue;
        const double mean = sum / static_cast<double>(count);
        double var = 0.0;
        for (std::size_t r = 0; r < starts.size(); ++r) {
            const double e = errors[r * nh + h];
            if (!std::isnan(e)) var += (e - mean) * (e - mean);
        }
        curve.horizons.push_back(horizons[h]);
        curve.mean.push_back(mean);
        curve.std_dev.push_back(std::sqrt(var / static_cast<double>(count)));
        curve.restarts.push_back(count);
    }
    return curve;
}

double spectral_norm(const SparseMatrix& m, double tol, int max_iter) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    // deterministic start with components along every direction
    Eigen::VectorXd v(m.cols());
    for (Index i = 0; i < v.size(); ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + 0.7 * static_cast<double>(i));
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w = m.transpose() * (m * v);
        const double lambda = w.norm();
        if (lambda == 0.0) return 0.0;
        v = w / lambda;
        if (std::abs(lambda - estimate) <= tol * lambda) return std::sqrt(lambda);
        estimate = lambda;
    }
    throw NumericalError("spectral_norm: power iteration did not converge");
}

ErrorBoundReport verify_error_bound(const StepPlan& plan, const Eigen::VectorXd& u0, const BoundOptions& options) {
    const MolSystem sys(plan.problem, plan.grid);
    const Index steps = options.steps >= 0 ? options.steps : plan.config.num_steps;
    const double dt = plan.config.dt;
    const bool linear = plan.problem.kind == PdeKind::advection_diffusion;

    ErrorBoundReport rep;
    rep.asserted = linear;
    rep.lipschitz = linear ? spectral_norm(sys.euler_matrix(dt), options.power_tol, options.power_max_iter)
                           : std::numeric_limits<double>::quiet_NaN();

    const bool perturbed = options.initial_perturbation.size() > 0;
    Mps state = encode_state(perturbed ? Eigen::VectorXd(u0 + options.initial_perturbation) : u0, plan);
    Eigen::VectorXd qtn = decode_state(state, plan);
    Eigen::VectorXd exact = perturbed ? u0 : qtn;
    rep.initial_mismatch = (qtn - exact).norm();
    rep.delta.push_back(rep.initial_mismatch);

    for (Index k = 1; k <= steps; ++k) {
        const Eigen::VectorXd from_qtn = sys.euler_step(qtn, dt);
        state = qtn_step(state, plan, k).state;
        qtn = decode_state(state, plan);
        rep.one_step_error = std::max(rep.one_step_error, (qtn - from_qtn).norm());
        exact = sys.euler_step(exact, dt);
        rep.delta.push_back((qtn - exact).norm());
    }

    if (!linear) return rep;
    const double l = rep.lipschitz, e = rep.one_step_error;
    double geometric = 0.0, lm = 1.0;
    rep.worst_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < rep.delta.size(); ++m) {
        const double b = lm * rep.initial_mismatch + geometric;
        rep.bound.push_back(b);
        rep.worst_margin = std::max(rep.worst_margin, rep.delta[m] - b);
        if (rep.delta[m] > b + options.slack) rep.holds = false;
        geometric += lm * e;
        lm *= l;
    }
    return rep;
}

} // namespace qtn
