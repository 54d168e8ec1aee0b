// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qtn/config.hpp"
#include "qtn/experiment.hpp"
#include "qtn/io.hpp"
#include "qtn/metrics.hpp"
#include "qtn/mpo.hpp"
#include "qtn/mps.hpp"
#include "qtn/stepper.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace qtn;
using qtn::testing::rel_err;
using qtn::testing::Rng;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool ok{false};
    std::string detail;
};

int failures = 0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = limit_s <= 0 || secs < limit_s;
    const bool pass = o.ok && in_time;
    if (!pass) ++failures;
    std::ostringstream line;
    line << (pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail;
    line << " (" << num(secs) << " s";
    if (limit_s > 0) line << ", limit " << num(limit_s) << " s";
    line << ")";
    std::cout << line.str() << std::endl;
}

double summary_value(const ExperimentResult& r, const std::string& key) {
    for (const auto& [k, v] : r.summary)
        if (k == key) return v;
    return std::nan("");
}

RunConfig preset(const std::string& name, std::vector<std::string> overrides = {}) {
    const ConfigResult c = load_config(resolve_config_path(name), overrides);
    if (!c.ok()) {
        std::string msg = "preset " + name + ":";
        for (const auto& i : c.issues) msg += " " + to_string(i);
        throw std::runtime_error(msg);
    }
    return *c.config;
}

ExperimentResult run_preset(const fs::path& root, const std::string& name, const std::string& dir) {
    const RunConfig c = preset(name, {"output.dir=" + (root / dir).string()});
    fs::remove_all(c.output_dir);
    ExperimentOptions o;
    o.log = [&](const std::string& s) { std::cerr << "  " << dir << ": " << s << "\n"; };
    return run_experiment(c, o);
}

double max_std_on(const HorizonCurve& c, const std::vector<Index>& horizons) {
    double m = 0.0;
    for (std::size_t i = 0; i < c.horizons.size(); ++i)
        if (std::find(horizons.begin(), horizons.end(), c.horizons[i]) != horizons.end()) m = std::max(m, c.std_dev[i]);
    return m;
}

// Drop the trailing wall_ms column of diagnostics.csv.
std::string strip_wall_time(const std::string& text) {
    std::istringstream in(text);
    std::string out, line;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
}

std::map<std::string, std::string> comparable_files(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string ext = e.path().extension().string();
        if (ext != ".csv" && ext != ".txt") continue;
        const std::string rel = fs::relative(e.path(), dir).string();
        std::string text = read_text_file(e.path());
        if (e.path().filename() == "diagnostics.csv") text = strip_wall_time(text);
        files[rel] = text;
    }
    return files;
}

Eigen::MatrixXd stencil_matrix_oracle(Index points, double lower, double diag, double upper, bool wrap) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(points, points);
    for (Index i = 0; i < points; ++i) {
        m(i, i) += diag;
        if (i + 1 < points) m(i, i + 1) += upper;
        else if (wrap) m(i, 0) += upper;
        if (i > 0) m(i, i - 1) += lower;
        else if (wrap) m(i, points - 1) += lower;
    }
    return m;
}

double isometry_defect(const Eigen::MatrixXd& q) {
    return (q.transpose() * q - Eigen::MatrixXd::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

} // namespace

int main(int argc, char** argv) {
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path(QTN_ACCEPTANCE_OUT);
    fs::create_directories(root);

    criterion(1, "TT-SVD round trip", 5.0, [] {
        Rng rng(101);
        double worst = 0.0;
        bool bonds_ok = true;
        for (int n : {6, 8, 10}) {
            for (int trial = 0; trial < 3; ++trial) {
                const auto t = qtn::testing::random_tensor(2, n, rng);
                const Mps m = mps_from_dense(t);
                worst = std::max(worst, rel_err(mps_to_dense(m).data, t.data));
                const auto b = m.bond_dims();
                for (int i = 0; i <= n; ++i)
                    bonds_ok = bonds_ok && b[static_cast<std::size_t>(i)] <= ipow(2, std::min(i, n - i));
            }
        }
        return Outcome{worst <= 1e-12 && bonds_ok,
                       "max rel error " + num(worst) + ", bond bound " + (bonds_ok ? "held" : "violated")};
    });

    criterion(2, "canonical-form isometry", 5.0, [] {
        Rng rng(102);
        double worst = 0.0;
        bool all = true;
        for (int n : {6, 10}) {
            const Mps m = qtn::testing::random_mps(n, 8, rng);
            for (int k = 0; k < n; ++k) {
                const Mps c = canonicalize(m, k);
                all = all && is_canonical(c, 1e-10);
                for (int i = 0; i < n; ++i) {
                    if (i < k) worst = std::max(worst, isometry_defect(c.core(i).left_unfolding()));
                    if (i > k) worst = std::max(worst, isometry_defect(c.core(i).right_unfolding().transpose()));
                }
            }
        }
        return Outcome{all && worst <= 1e-10, "max isometry defect " + num(worst)};
    });

    criterion(3, "Eckart-Young single-bond truncation", 5.0, [] {
        Rng rng(103);
        const int n = 8;
        double worst_w = 0.0, worst_opt = 0.0;
        for (int trial = 0; trial < 4; ++trial) {
            const Eigen::VectorXd v = qtn::testing::random_vector(ipow(2, n), rng);
            const Eigen::VectorXd sv = qtn::testing::singular_values(qtn::testing::unfolding(v, 2, n, n / 2));
            const Mps m = mps_from_dense(DenseTensor<double>(2, n, v));
            // caps in [8, 16) cut only the middle bond
            for (Index r = 8; r < 16; ++r) {
                const auto [t, w] = truncate(m, {r, 0.0});
                const double optimal = sv.tail(sv.size() - r).norm();
                worst_w = std::max(worst_w, std::abs(w - optimal));
                worst_opt = std::max(worst_opt, std::abs((mps_to_dense(t).data - v).norm() - optimal));
            }
        }
        return Outcome{worst_w <= 1e-10 && worst_opt <= 1e-10,
                       "|w - sqrt(sum s^2)| " + num(worst_w) + ", |err - optimal| " + num(worst_opt)};
    });

    criterion(4, "operator homomorphism", 10.0, [] {
        Rng rng(104);
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 3 + trial % 6;
            const Mpo a = qtn::testing::random_mpo(n, 1 + trial % 5, rng);
            const Mps x = qtn::testing::random_mps(n, 1 + trial % 7, rng);
            const Eigen::VectorXd ref = mpo_to_dense(a) * mps_to_dense(x).data;
            worst = std::max(worst, rel_err(mps_to_dense(apply(a, x)).data, ref));
        }
        return Outcome{worst <= 1e-10, "50 pairs, max rel error " + num(worst)};
    });

    criterion(5, "stencil exactness", 10.0, [] {
        double worst = 0.0;
        Index shift_bond = 0;
        for (int n = 1; n <= 10; ++n) {
            const Index pts = Index{1} << n;
            for (Boundary bc : {Boundary::periodic, Boundary::dirichlet_zero}) {
                for (int offset : {1, -1}) shift_bond = std::max(shift_bond, shift_mpo(n, offset, bc).max_bond());
                if (pts < 4) continue;
                const GridSpec grid = GridSpec::line(pts, bc);
                const double h = grid.spacing(0);
                const bool wrap = bc == Boundary::periodic;
                const Eigen::MatrixXd d1 = stencil_matrix_oracle(pts, -1.0, 0.0, 1.0, wrap) / (2.0 * h);
                const Eigen::MatrixXd d2 = stencil_matrix_oracle(pts, 1.0, -2.0, 1.0, wrap) / (h * h);
                const Eigen::MatrixXd o1 = mpo_to_dense(d1_mpo(grid), pts);
                const Eigen::MatrixXd o2 = mpo_to_dense(d2_mpo(grid), pts);
                worst = std::max(worst, (o1 - d1).cwiseAbs().maxCoeff() / d1.cwiseAbs().maxCoeff());
                worst = std::max(worst, (o2 - d2).cwiseAbs().maxCoeff() / d2.cwiseAbs().maxCoeff());
            }
        }
        return Outcome{worst <= 1e-12 && shift_bond <= 2,
                       "N 4..1024, max entry error / max entry " + num(worst) + ", shift bond " +
                           std::to_string(shift_bond)};
    });

    criterion(6, "oracle equivalence at reduced size", 60.0, [] {
        const std::vector<std::string> exact = {"stepper.chi_max=inf", "stepper.eps_svd=0", "stepper.mask_chi_max=inf",
                                                "stepper.mask_eps_svd=0"};
        std::string detail;
        bool ok = true;
        for (const std::string name : {"advdiff1d", "advdiff2d", "burgers1d", "burgers2d"}) {
            std::vector<std::string> o = exact;
            o.push_back(name.ends_with("1d") ? "grid.points_x=256" : "grid.points_x=16");
            if (name.ends_with("2d")) o.push_back("grid.points_y=16");
            const RunConfig c = preset(name, o);
            const GridSpec g = c.grid();
            const StepPlan plan = make_step_plan(c.problem, g, c.stepper());
            const Eigen::VectorXd mask = boundary_mask(g);
            Eigen::VectorXd u = sample_initial_condition(c.problem, g);
            double worst = 0.0;
            RolloutOptions ro;
            ro.on_state = [&](Index k, const Mps& m) {
                if (k > 0) u = qtn::testing::naive_euler_step(c.problem, g, u, plan.config.dt).cwiseProduct(mask);
                worst = std::max(worst, rel_err(decode_state(m, plan), u));
            };
            const Rollout r = rollout(plan, encode_state(u, plan), ro);
            ok = ok && r.completed() && worst <= 1e-8;
            detail += (detail.empty() ? "" : ", ") + name + " " + num(worst) + " over " +
                      std::to_string(plan.config.num_steps) + " steps";
        }
        return Outcome{ok, detail};
    });

    std::optional<ExperimentResult> linear1d, burgers1d;

    criterion(7, "1D advection-diffusion experiment", 300.0, [&] {
        linear1d = run_preset(root, "advdiff1d", "advdiff1d");
        const ExperimentResult& r = *linear1d;
        const double err = summary_value(r, "final_rel_l2_qtn_vs_euler");
        const double slope = summary_value(r, "horizon_log_slope");
        return Outcome{r.completed() && err <= 1e-6 && slope >= 0.0,
                       "final rel l2 vs Euler " + num(err) + ", horizon log slope " + num(slope)};
    });

    criterion(8, "2D advection-diffusion, 1D and 2D Burgers experiments", 1200.0, [&] {
        bool ok = true;
        std::string detail;
        for (const std::string name : {"advdiff2d", "burgers1d", "burgers2d"}) {
            ExperimentResult r = run_preset(root, name, name);
            const double err = summary_value(r, "final_rel_l2_qtn_vs_euler");
            const double boundary = summary_value(r, "boundary_max_abs");
            const bool boundary_ok = std::isnan(boundary) || boundary <= 1e-8;
            ok = ok && r.completed() && err <= 1e-3 && boundary_ok;
            detail += (detail.empty() ? "" : "; ") + name + (r.completed() ? "" : " FAILED") + " final " + num(err);
            if (!std::isnan(boundary)) detail += " boundary " + num(boundary);
            if (name == "burgers1d") burgers1d = std::move(r);
        }
        return Outcome{ok, detail};
    });

    criterion(9, "multi-step error bound at chi 8", 120.0, [] {
        const RunConfig c = preset("advdiff1d", {"stepper.chi_max=8"});
        const GridSpec g = c.grid();
        const StepPlan plan = make_step_plan(c.problem, g, c.stepper());
        const ErrorBoundReport r = verify_error_bound(plan, sample_initial_condition(c.problem, g));
        return Outcome{r.asserted && r.holds, "L " + num(r.lipschitz) + ", e " + num(r.one_step_error) +
                                                   ", worst delta - bound " + num(r.worst_margin) + " over " +
                                                   std::to_string(r.delta.size() - 1) + " steps"};
    });

    criterion(10, "Burgers horizon variability exceeds linear", 0.0, [&] {
        if (!linear1d || !burgers1d || !linear1d->completed() || !burgers1d->completed())
            return Outcome{false, "needs completed advdiff1d and burgers1d runs"};
        std::vector<Index> common;
        for (Index m : linear1d->horizon.horizons)
            if (std::find(burgers1d->horizon.horizons.begin(), burgers1d->horizon.horizons.end(), m) !=
                burgers1d->horizon.horizons.end())
                common.push_back(m);
        const double lin = max_std_on(linear1d->horizon, common);
        const double nonlin = max_std_on(burgers1d->horizon, common);
        return Outcome{!common.empty() && nonlin > lin, "max std Burgers " + num(nonlin) + " vs linear " + num(lin) +
                                                            " on " + std::to_string(common.size()) + " horizons"};
    });

    criterion(11, "determinism", 0.0, [&] {
        const std::string name = "burgers2d";
        const ExperimentResult again = run_preset(root, name, name + "_rerun");
        if (!again.completed()) return Outcome{false, "rerun failed"};
        const auto a = comparable_files(root / name), b = comparable_files(root / (name + "_rerun"));
        std::size_t differing = 0;
        for (const auto& [file, text] : a) {
            const auto it = b.find(file);
            if (it == b.end() || it->second != text) ++differing;
        }
        const bool ok = !a.empty() && a.size() == b.size() && differing == 0;
        return Outcome{ok, name + " rerun: " + std::to_string(a.size()) + " csv/snapshot files, " +
                               std::to_string(differing) + " differ"};
    });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures;
}
