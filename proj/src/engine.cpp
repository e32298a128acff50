#include "thawsim/engine.hpp"

#include "thawsim/cell_coeff.hpp"
#include "thawsim/errors.hpp"
#include "thawsim/macro_solver.hpp"

#include <algorithm>
#include <array>
#include <barrier>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace thawsim {

namespace {

constexpr double pi = std::numbers::pi;

/// Fixed set of worker threads running static partitions of an index range.
/// Each index is always handled by the same code path, so results do not
/// depend on the worker count.
class WorkerPool {
public:
    explicit WorkerPool(int workers) : n_(std::max(1, workers)) {
        if (n_ == 1)
            return;
        start_ = std::make_unique<std::barrier<>>(n_);
        done_ = std::make_unique<std::barrier<>>(n_);
        for (int w = 1; w < n_; ++w)
            threads_.emplace_back([this, w] { loop(w); });
    }

    ~WorkerPool() {
        if (n_ == 1)
            return;
        stop_ = true;
        start_->arrive_and_wait();
        for (auto& t : threads_)
            t.join();
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    /// Runs fn(i) for i in [0, count). Rethrows the first StepRejected.
    void for_each(int count, const std::function<void(int)>& fn) {
        error_.clear();
        failed_ = false;
        if (n_ == 1) {
            for (int i = 0; i < count; ++i)
                fn(i);
            return;
        }
        count_ = count;
        fn_ = &fn;
        start_->arrive_and_wait();
        work(0);
        done_->arrive_and_wait();
        if (failed_)
            throw StepRejected(error_);
    }

private:
    void loop(int w) {
        for (;;) {
            start_->arrive_and_wait();
            if (stop_)
                return;
            work(w);
            done_->arrive_and_wait();
        }
    }

    void work(int w) {
        int chunk = (count_ + n_ - 1) / n_;
        int lo = w * chunk;
        int hi = std::min(count_, lo + chunk);
        try {
            for (int i = lo; i < hi; ++i)
                (*fn_)(i);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(mutex_);
            if (!failed_) {
                failed_ = true;
                error_ = e.what();
            }
        }
    }

    int n_;
    int count_ = 0;
    const std::function<void(int)>* fn_ = nullptr;
    bool stop_ = false;
    bool failed_ = false;
    std::string error_;
    std::mutex mutex_;
    std::unique_ptr<std::barrier<>> start_;
    std::unique_ptr<std::barrier<>> done_;
    std::vector<std::thread> threads_;
};

// ---------------------------------------------------------------------------
// Scenario models: a uniform per-cell interface for the time loop.

class ReducedModel {
public:
    ReducedModel(const SimulationConfig& cfg, int nodes) {
        const auto& m = cfg.material;
        p_.T_c = m.T_c;
        p_.c_w = m.c_w;
        p_.D = m.D_water();
        p_.latent = m.latent();
        p_.gamma = cfg.geometry.gamma_hat * cfg.geometry.delta;
        p_.s0 = cfg.geometry.s0_hat * cfg.geometry.delta;
        p_.s_min = cfg.solver.s_min_fraction * p_.s0;
        p_.M = cfg.geometry.M_micro;
        p_.gradient = cfg.solver.gradient;
        p_.remap = cfg.solver.remap;
        states_.assign(nodes, make_reduced_cell(p_, cfg.T_init));
        trial_ = states_;
        resp_.resize(nodes);
        area_.assign(nodes, p_.s0 * p_.s0);
    }

    static constexpr int vars_per_cell = 1;

    bool melted(int i) const { return states_[i].melted; }
    /// Reduced cells leave the macro coupling once melted.
    bool coupled(int i) const { return !states_[i].melted; }

    void set_boundary_value(int i, double T) { states_[i].theta.back() = T; }

    void prepare(int i, double dt) {
        if (!states_[i].melted)
            resp_[i] = prepare_micro_step(states_[i], p_, dt);
    }

    std::array<double, 3> sink(int i, double sig) const {
        if (states_[i].melted)
            return {0.0, 0.0, 0.0};
        return {sig * resp_[i].flux0, sig * resp_[i].flux1, resp_[i].ref};
    }

    void finish(int i, double T1, double dt) {
        const ReducedCellState& st = states_[i];
        if (st.melted) {
            trial_[i] = st;
            trial_[i].theta.assign(p_.M + 1, T1);
            return;
        }
        ReducedCellState tmp = st;
        tmp.theta = evaluate(reduced_problem(st, p_), resp_[i], T1);
        double area = advance_front(tmp, p_, dt);
        area_[i] = area;
        if (area > p_.s_min * p_.s_min)
            trial_[i] = restretch(tmp, p_, std::sqrt(area));
        else
            trial_[i] = tmp;
    }

    /// Event function before and after the trial step; crossing when it turns nonpositive.
    bool crossing(int i, double& g_old, double& g_new) const {
        if (states_[i].melted)
            return false;
        double thr = p_.s_min * p_.s_min;
        g_old = states_[i].s * states_[i].s - thr;
        g_new = area_[i] - thr;
        return g_old > 0.0 && g_new <= 0.0;
    }

    /// How far below zero the event function may land.
    double landing_band(int) const { return std::numeric_limits<double>::infinity(); }

    void trial_values(int i, double* out) const {
        out[0] = trial_[i].melted ? 0.0 : area_[i] / (p_.s0 * p_.s0);
    }

    void commit() { states_.swap(trial_); }

    bool melt_due(int i) const {
        return !states_[i].melted && area_[i] <= p_.s_min * p_.s_min;
    }

    /// Heat per radian handed to the macro node when the cell melts.
    double merge(int i, double T_new) {
        const ReducedCellState& st = states_[i];
        double deposit = sensible(st) - 0.5 * p_.latent * area_[i];
        states_[i] = detect_melt(st, 0.0, p_);
        states_[i].theta.assign(p_.M + 1, T_new);
        return deposit;
    }

    double sensible(int i) const { return sensible(states_[i]); }
    double latent(int i) const {
        const ReducedCellState& st = states_[i];
        double full = 0.5 * p_.latent * p_.s0 * p_.s0;
        return st.melted ? full : full - 0.5 * p_.latent * st.s * st.s;
    }

    bool merged_capacity_is_one() const { return true; }

    void fill(int i, NodeRecord& rec) const { rec.s = states_[i].s; rec.melted = states_[i].melted; }

    void theta_range(int i, double& lo, double& hi) const {
        for (double v : states_[i].theta) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }

    void onset(int, double, double, ProbeSeries&) const {}

private:
    double sensible(const ReducedCellState& st) const {
        if (st.melted)
            return 0.0;
        std::vector<double> m = lumped_mass(reduced_nodes(st, p_), false);
        double e = 0.0;
        for (int j = 1; j < p_.M; ++j)
            e += m[j] * p_.c_w * (st.theta[j] - p_.T_c);
        return e;
    }

    ReducedMicroParams p_;
    std::vector<ReducedCellState> states_;
    std::vector<ReducedCellState> trial_;
    std::vector<AffineResponse> resp_;
    std::vector<double> area_;
};

class SapModel {
public:
    SapModel(const SimulationConfig& cfg, int nodes) : sp_(cfg.sap) {
        const auto& m = cfg.material;
        th_.T_c = m.T_c;
        th_.c_w = m.c_w;
        th_.D_w = m.D_water();
        th_.latent = m.latent();
        th_.rho_i = m.rho_i;
        th_.rho_w = m.rho_w;
        th_.M = cfg.geometry.M_micro;
        states_.assign(nodes, make_sap_cell(sp_, th_, cfg.T_init));
        trial_ = states_;
        resp_.resize(nodes);
        thr_ = sp_.thickness_fraction * (sp_.s_iw0 - sp_.s_gi0);
        onset_thr_ = 1e-3 * (sp_.s_iw0 - sp_.s_gi0);
    }

    static constexpr int vars_per_cell = 4;

    bool melted(int i) const { return states_[i].melted; }
    bool coupled(int) const { return true; }

    void set_boundary_value(int i, double T) { states_[i].theta.back() = T; }

    void prepare(int i, double dt) { resp_[i] = prepare_sap_step(states_[i], sp_, th_, dt); }

    std::array<double, 3> sink(int i, double sig) const {
        return {sig * resp_[i].flux0, sig * resp_[i].flux1, resp_[i].ref};
    }

    void finish(int i, double T1, double dt) {
        trial_[i] = finish_sap_step(states_[i], sp_, th_, resp_[i], T1, dt);
    }

    bool crossing(int i, double& g_old, double& g_new) const {
        if (states_[i].melted)
            return false;
        g_old = ice_thickness(states_[i]) - thr_;
        g_new = ice_thickness(trial_[i]) - thr_;
        return g_old > 0.0 && g_new <= 0.0;
    }

    /// Overshoot past zero thickness allowed at landing. The merge returns the
    /// over-melted latent heat, so only the residual sliver above zero draws heat.
    double landing_band(int) const { return 1e-2 * (sp_.s_iw0 - sp_.s_gi0); }

    void trial_values(int i, double* out) const {
        const SapCellState& s = trial_[i];
        double Rf2 = sp_.R_f * sp_.R_f;
        out[0] = s.s_iw * s.s_iw / Rf2;
        out[1] = s.s_gi * s.s_gi / Rf2;
        out[2] = s.r / sp_.r0;
        out[3] = s.U / sp_.V_f;
    }

    void commit() { states_.swap(trial_); }

    bool melt_due(int i) const { return sap_melt_due(states_[i], sp_); }

    double merge(int i, double T_new) {
        double before = sap_cell_energy(states_[i], sp_, th_);
        SapCellState after = sap_melt_transition(states_[i], sp_, th_);
        double deposit = before - sap_cell_energy(after, sp_, th_);
        after.theta.back() = T_new;
        states_[i] = after;
        return deposit;
    }

    double sensible(int i) const { return sap_cell_energy(states_[i], sp_, th_) - latent(i); }
    double latent(int i) const {
        const SapCellState& st = states_[i];
        double ice0 = sp_.s_iw0 * sp_.s_iw0 - sp_.s_gi0 * sp_.s_gi0;
        double ice = st.melted ? 0.0 : st.s_iw * st.s_iw - st.s_gi * st.s_gi;
        return 0.5 * th_.latent * th_.rho_i / th_.rho_w * (ice0 - ice);
    }

    bool merged_capacity_is_one() const { return false; }

    void fill(int i, NodeRecord& rec) const {
        const SapCellState& st = states_[i];
        PressureClosure c = algebraic_closure(st, sp_, th_.T_c, rec.T1);
        rec.s_iw = st.s_iw;
        rec.s_gi = st.s_gi;
        rec.r = st.r;
        rec.U = st.U;
        rec.p_w_f = c.p_w_f;
        rec.p_w_v = c.p_w_v;
        rec.melted = st.melted;
    }

    void theta_range(int i, double& lo, double& hi) const {
        const SapCellState& st = states_[i];
        std::vector<double> y = sap_nodes(st, sp_, th_);
        for (std::size_t j = 0; j < st.theta.size(); ++j) {
            if (st.melted && y[j] < st.s_gi)
                continue;
            lo = std::min(lo, st.theta[j]);
            hi = std::max(hi, st.theta[j]);
        }
    }

    /// Record interface onset times, linearly interpolated within the step.
    void onset(int i, double t_old, double t_new, ProbeSeries& probe) const {
        const SapCellState& a = trial_[i];
        const SapCellState& b = states_[i];
        double thr = onset_thr_;
        if (probe.t_gi_onset < 0.0 && b.s_gi > sp_.s_gi0 + thr) {
            double d0 = a.s_gi - sp_.s_gi0, d1 = b.s_gi - sp_.s_gi0;
            double f = d1 > d0 ? std::clamp((thr - d0) / (d1 - d0), 0.0, 1.0) : 1.0;
            probe.t_gi_onset = t_old + f * (t_new - t_old);
        }
        if (probe.t_iw_onset < 0.0 && b.s_iw < sp_.s_iw0 - thr) {
            double d0 = sp_.s_iw0 - a.s_iw, d1 = sp_.s_iw0 - b.s_iw;
            double f = d1 > d0 ? std::clamp((thr - d0) / (d1 - d0), 0.0, 1.0) : 1.0;
            probe.t_iw_onset = t_old + f * (t_new - t_old);
        }
    }

    double initial_p_w_v(double T) const {
        return algebraic_closure(states_[0], sp_, th_.T_c, T).p_w_v;
    }

private:
    SapParams sp_;
    SapThermal th_;
    double thr_ = 0.0;
    double onset_thr_ = 0.0;
    std::vector<SapCellState> states_;
    std::vector<SapCellState> trial_;
    std::vector<AffineResponse> resp_;
};

// ---------------------------------------------------------------------------

template <class Model>
class Driver {
public:
    explicit Driver(const SimulationConfig& cfg)
        : cfg_(cfg), map_(cfg.material), pool_(cfg.workers) {}

    SimulationResult run() {
        auto wall0 = std::chrono::steady_clock::now();
        const auto& g = cfg_.geometry;
        grid_ = RadialGrid::uniform(g.R_tree, g.M_macro);
        int n = grid_.M() + 1;
        mass_ = grid_.lumped_mass();
        H_ref_ = map_.omega_inv(cfg_.material.T_c);

        double gamma_hat = cfg_.scenario == Scenario::sap ? cfg_.sap.R_f / g.delta : g.gamma_hat;
        EffectiveTensor et = compute_effective_tensor({gamma_hat, g.cell_resolution});
        res_.pi_11 = et.pi[0][0];
        res_.fluid_fraction = et.fluid_fraction;
        sig_ = 2.0 * pi / (g.delta * g.delta);

        coeff_.pi_factor.assign(n, et.pi[0][0]);
        coeff_.capacity_factor.assign(n, et.fluid_fraction);
        coeff_.diffusivity_factor = cfg_.scenario == Scenario::sap ? cfg_.sap.diffusivity_factor : 1.0;

        macro_ = apply_boundary_conditions(make_macro_state(grid_, map_, cfg_.T_init), map_, cfg_.T_a);
        model_ = std::make_unique<Model>(cfg_, n);
        model_->set_boundary_value(n - 1, cfg_.T_a);

        res_.scenario = cfg_.scenario;
        res_.x = grid_.x;
        res_.melt_times.assign(n, -1.0);
        for (double r : cfg_.output.probe_radii) {
            ProbeSeries ps;
            ps.radius = r;
            ps.node = grid_.nearest(r);
            res_.probes.push_back(ps);
        }
        if constexpr (std::is_same_v<Model, SapModel>)
            res_.initial_p_w_v = model_->initial_p_w_v(cfg_.T_init);

        stats_.min_T = stats_.max_T = cfg_.T_init;
        stats_.min_H = std::numeric_limits<double>::infinity();
        stats_.dt_smallest = std::numeric_limits<double>::infinity();
        track_bounds();

        snapshots_ = cfg_.output.snapshot_times;
        std::sort(snapshots_.begin(), snapshots_.end());
        next_snap_ = 0;
        emit_outputs(0.0, true);

        loop();

        res_.final_state = make_snapshot(t_);
        res_.melt_complete_time = -1.0;
        bool all = true;
        double last = 0.0;
        for (double mt : res_.melt_times) {
            if (mt < 0.0)
                all = false;
            last = std::max(last, mt);
        }
        if (all)
            res_.melt_complete_time = last;
        stats_.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
        if (stats_.accepted_steps == 0)
            stats_.dt_smallest = stats_.dt_largest = 0.0;
        res_.stats = stats_;
        return std::move(res_);
    }

private:
    void loop() {
        const auto& sc = cfg_.solver;
        int n = grid_.M() + 1;
        DtController ctrl;
        ctrl.safety = sc.safety;
        ctrl.growth_cap = sc.growth_cap;
        ctrl.shrink_cap = sc.shrink_cap;
        ctrl.dt_min = sc.dt_min;
        ctrl.dt_max = sc.dt_max;

        int nv = n + Model::vars_per_cell * n;
        std::vector<double> y_prev, y_cur(nv), y_new(nv);
        gather_current(y_cur);
        double dt_prev = 0.0;
        bool have_prev = false;

        double dt_ctrl = std::min(sc.dt_init, sc.dt_max);
        double t_end = cfg_.t_end;
        const double eps = 1e-9 * std::max(1.0, t_end);

        while (t_ < t_end - eps) {
            double stop = t_end;
            if (next_snap_ < snapshots_.size())
                stop = std::min(stop, snapshots_[next_snap_]);
            double dt = std::min(dt_ctrl, sc.dt_max);
            bool clipped = false;
            if (t_ + dt >= stop - eps) {
                dt = stop - t_;
                clipped = true;
            }
            if (dt < sc.dt_min) {
                std::ostringstream os;
                os << "time step underflow at t = " << t_ << " s (dt = " << dt << ")";
                throw SolverError(os.str());
            }

            MacroState trial;
            MacroStepInfo info;
            try {
                trial = trial_step(dt, info);
            } catch (const StepRejected&) {
                ++stats_.rejected_steps;
                dt_ctrl = dt * 0.25;
                continue;
            }

            // Land melt events shortly after their threshold crossing. A cell
            // whose event function went past its admissible range forces a
            // secant retry toward the middle of the landing band.
            double frac = 2.0;
            double secant = 2.0;
            for (int i = 0; i < n; ++i) {
                double g0, g1;
                if (!model_->crossing(i, g0, g1))
                    continue;
                frac = std::min(frac, g0 / (g0 - g1));
                double band = model_->landing_band(i);
                if (g1 < -band)
                    secant = std::min(secant, (g0 + 0.5 * band) / (g0 - g1));
            }
            if (secant <= 1.0) {
                ++stats_.event_retries;
                dt_ctrl = secant * dt;
                continue;
            }
            if (frac <= 1.0 && (1.0 - frac) * dt > sc.event_tol) {
                double retry = frac * dt + 0.5 * sc.event_tol;
                if (retry < dt) {
                    ++stats_.event_retries;
                    dt_ctrl = retry;
                    continue;
                }
            }

            gather_trial(trial, y_new);
            double err = 0.0;
            if (have_prev)
                err = error_estimate(y_prev, y_cur, y_new, dt_prev, dt);
            if (err > 1.0) {
                ++stats_.rejected_steps;
                dt_ctrl = ctrl.propose(err, dt);
                continue;
            }

            // Accept.
            double t_old = t_;
            model_->commit();
            macro_ = trial;
            t_ += dt;
            if (clipped && std::fabs(t_ - stop) <= eps)
                t_ = stop;
            influx_ += info.boundary_influx;
            ++stats_.accepted_steps;
            stats_.dt_smallest = std::min(stats_.dt_smallest, dt);
            stats_.dt_largest = std::max(stats_.dt_largest, dt);

            for (auto& probe : res_.probes)
                model_->onset(probe.node, t_old, t_, probe);

            bool merged = false;
            for (int i = 0; i < n; ++i) {
                if (!model_->melt_due(i))
                    continue;
                merged = true;
                res_.melt_times[i] = t_;
                if (i == n - 1) {
                    model_->merge(i, cfg_.T_a);
                    continue;
                }
                // Fold the cell's remaining heat into the macro node.
                double Y_old = coeff_.capacity_factor[i];
                double deposit = model_->merge(i, macro_.T1[i]);
                double Y_new = model_->merged_capacity_is_one() ? 1.0 : Y_old;
                double H = H_ref_ + (Y_old * (macro_.H1[i] - H_ref_) + sig_ * deposit) / Y_new;
                macro_.H1[i] = H;
                macro_.T1[i] = map_.omega(std::max(H, 0.0));
                model_->set_boundary_value(i, macro_.T1[i]);
                if (model_->merged_capacity_is_one()) {
                    coeff_.capacity_factor[i] = 1.0;
                    coeff_.pi_factor[i] = 1.0;
                }
            }
            if (model_->merged_capacity_is_one() && res_.melt_times[n - 1] >= 0.0) {
                coeff_.capacity_factor[n - 1] = 1.0;
                coeff_.pi_factor[n - 1] = 1.0;
            }

            track_bounds();
            emit_outputs(t_, false);

            if (merged) {
                have_prev = false;
                gather_current(y_cur);
            } else {
                y_prev = y_cur;
                y_cur = y_new;
                dt_prev = dt;
                have_prev = true;
            }
            double proposed = have_prev ? ctrl.propose(err, dt) : dt;
            if (have_prev)
                ctrl.err_prev = std::max(err, 1e-4);
            dt_ctrl = clipped ? std::max(proposed, dt_ctrl) : proposed;
        }
    }

    MacroState trial_step(double dt, MacroStepInfo& info) {
        int n = grid_.M() + 1;
        pool_.for_each(n, [&](int i) { model_->prepare(i, dt); });
        LinearSink sink = LinearSink::zero(n);
        for (int i = 0; i < n; ++i) {
            auto [a, b, ref] = model_->sink(i, sig_);
            sink.a[i] = a;
            sink.b[i] = b;
            sink.ref[i] = ref;
        }
        MacroState next = macro_step(macro_, grid_, map_, coeff_, sink, cfg_.T_a, dt, &info);
        pool_.for_each(n, [&](int i) { model_->finish(i, next.T1[i], dt); });
        return next;
    }

    void gather_trial(const MacroState& m, std::vector<double>& y) const {
        int n = grid_.M() + 1;
        for (int i = 0; i < n; ++i)
            y[i] = m.T1[i];
        for (int i = 0; i < n; ++i)
            model_->trial_values(i, &y[n + Model::vars_per_cell * i]);
    }

    void gather_current(std::vector<double>& y) const {
        // Values of the committed state: the trial buffers hold them after a swap-free copy.
        int n = grid_.M() + 1;
        for (int i = 0; i < n; ++i)
            y[i] = macro_.T1[i];
        for (int i = 0; i < n * Model::vars_per_cell; ++i)
            y[n + i] = std::numeric_limits<double>::quiet_NaN();
    }

    double error_estimate(const std::vector<double>& y0, const std::vector<double>& y1,
                          const std::vector<double>& y2, double dt_prev, double dt) const {
        const auto& sc = cfg_.solver;
        double ratio = dt / dt_prev;
        double w = dt / (dt + dt_prev);
        double err = 0.0;
        for (std::size_t k = 0; k < y2.size(); ++k) {
            if (std::isnan(y0[k]) || std::isnan(y1[k]))
                continue;
            double e = w * std::fabs(y2[k] - y1[k] - ratio * (y1[k] - y0[k]));
            double tol = sc.atol + sc.rtol * std::max(std::fabs(y2[k]), std::fabs(y1[k]));
            err = std::max(err, e / tol);
        }
        return err;
    }

    void track_bounds() {
        int n = grid_.M() + 1;
        for (int i = 0; i < n; ++i) {
            stats_.min_T = std::min(stats_.min_T, macro_.T1[i]);
            stats_.max_T = std::max(stats_.max_T, macro_.T1[i]);
            stats_.min_H = std::min(stats_.min_H, macro_.H1[i]);
            model_->theta_range(i, stats_.min_T, stats_.max_T);
        }
    }

    Snapshot make_snapshot(double t) const {
        Snapshot s;
        s.t = t;
        int n = grid_.M() + 1;
        s.nodes.resize(n);
        for (int i = 0; i < n; ++i) {
            NodeRecord& r = s.nodes[i];
            r.x = grid_.x[i];
            r.H1 = macro_.H1[i];
            r.T1 = macro_.T1[i];
            model_->fill(i, r);
        }
        return s;
    }

    EnergySample energy_sample(double t) const {
        EnergySample e;
        e.t = t;
        int n = grid_.M() + 1;
        for (int i = 0; i < n - 1; ++i) {
            e.macro_energy += mass_[i] * coeff_.capacity_factor[i] * (macro_.H1[i] - H_ref_);
            e.micro_sensible += mass_[i] * sig_ * model_->sensible(i);
            e.micro_latent += mass_[i] * sig_ * model_->latent(i);
        }
        e.boundary_influx = influx_;
        return e;
    }

    void emit_outputs(double t, bool initial) {
        const double eps = 1e-9 * std::max(1.0, cfg_.t_end);
        while (next_snap_ < snapshots_.size() && snapshots_[next_snap_] <= t + eps) {
            if (std::fabs(snapshots_[next_snap_] - t) <= eps) {
                res_.snapshots.push_back(make_snapshot(t));
                res_.energy.push_back(energy_sample(t));
            }
            ++next_snap_;
        }
        if (initial && (res_.energy.empty() || res_.energy.front().t != 0.0))
            res_.energy.insert(res_.energy.begin(), energy_sample(t));
        if (initial || t >= next_probe_ - eps || t >= cfg_.t_end - eps) {
            for (auto& probe : res_.probes) {
                NodeRecord r;
                r.x = grid_.x[probe.node];
                r.H1 = macro_.H1[probe.node];
                r.T1 = macro_.T1[probe.node];
                model_->fill(probe.node, r);
                probe.t.push_back(t);
                probe.samples.push_back(r);
            }
            next_probe_ = t + cfg_.output.probe_interval;
        }
        if (!initial && t >= cfg_.t_end - eps &&
            (res_.energy.empty() || res_.energy.back().t != t))
            res_.energy.push_back(energy_sample(t));
    }

    SimulationConfig cfg_;
    EnthalpyTemperatureMap map_;
    WorkerPool pool_;
    RadialGrid grid_;
    std::vector<double> mass_;
    MacroCoefficients coeff_;
    MacroState macro_;
    std::unique_ptr<Model> model_;
    SimulationResult res_;
    RunStats stats_;
    std::vector<double> snapshots_;
    std::size_t next_snap_ = 0;
    double next_probe_ = 0.0;
    double H_ref_ = 0.0;
    double sig_ = 0.0;
    double t_ = 0.0;
    double influx_ = 0.0;
};

} // namespace

void SimulationConfig::validate() const {
    material.validate();
    const auto& g = geometry;
    if (!(g.R_tree > 0.0))
        throw ConfigError("geometry: R_tree must be positive");
    if (!(g.delta > 0.0))
        throw ConfigError("geometry: delta must be positive");
    if (g.M_macro < 2)
        throw ConfigError("geometry: M_macro must be at least 2");
    if (g.M_micro < 2)
        throw ConfigError("geometry: M_micro must be at least 2");
    if (g.cell_resolution < 4)
        throw ConfigError("geometry: cell_resolution must be at least 4");
    if (scenario == Scenario::reduced) {
        if (!(g.gamma_hat > 0.0 && g.gamma_hat < 0.5))
            throw ConfigError("geometry: gamma_hat must lie in (0, 0.5) (circle inside the cell)");
        if (!(g.s0_hat > 0.0 && g.s0_hat < g.gamma_hat))
            throw ConfigError("geometry: s0_hat must lie in (0, gamma_hat)");
    } else {
        sap.validate();
        if (!(sap.R_f / g.delta < 0.5))
            throw ConfigError("sap: fiber radius must be below delta/2");
    }
    const auto& s = solver;
    if (!(s.rtol > 0.0) || !(s.atol > 0.0))
        throw ConfigError("solver: rtol and atol must be positive");
    if (!(s.dt_init > 0.0) || !(s.dt_max > 0.0) || !(s.dt_min > 0.0) || s.dt_min > s.dt_max)
        throw ConfigError("solver: need 0 < dt_min <= dt_max and dt_init > 0");
    if (!(s.safety > 0.0 && s.safety <= 1.0))
        throw ConfigError("solver: safety must lie in (0, 1]");
    if (!(s.growth_cap > 1.0) || !(s.shrink_cap > 0.0 && s.shrink_cap < 1.0))
        throw ConfigError("solver: growth_cap must exceed 1 and shrink_cap lie in (0, 1)");
    if (!(s.event_tol > 0.0))
        throw ConfigError("solver: event_tol must be positive");
    if (!(s.s_min_fraction > 0.0 && s.s_min_fraction < 1.0))
        throw ConfigError("solver: s_min_fraction must lie in (0, 1)");
    if (!(t_end > 0.0))
        throw ConfigError("run: t_end must be positive");
    if (!(T_init > 0.0) || !(T_a > 0.0))
        throw ConfigError("run: temperatures must be positive");
    if (T_init != material.T_c)
        throw ConfigError("run: the thaw model starts at the melting temperature (T_init = T_c)");
    if (T_a < material.T_c)
        throw ConfigError("run: T_a below T_c would refreeze, which is not modeled");
    if (workers < 1)
        throw ConfigError("run: workers must be at least 1");
    for (double r : output.probe_radii)
        if (!(r >= 0.0 && r <= g.R_tree))
            throw ConfigError("output: probe radii must lie in [0, R_tree]");
    for (double t : output.snapshot_times)
        if (!(t >= 0.0 && t <= t_end))
            throw ConfigError("output: snapshot times must lie in [0, t_end]");
    if (!(output.probe_interval > 0.0))
        throw ConfigError("output: probe_interval must be positive");
}

SimulationConfig default_config(Scenario scenario) {
    SimulationConfig c;
    c.scenario = scenario;
    c.T_init = c.material.T_c;
    c.T_a = c.material.T_c + 10.0;
    if (scenario == Scenario::reduced) {
        c.t_end = 30.0 * 3600.0;
        for (double h : {0.0, 2.0, 5.0, 10.0, 15.0, 20.0, 23.0})
            c.output.snapshot_times.push_back(h * 3600.0);
        c.output.probe_radii = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25};
        c.output.probe_interval = 60.0;
    } else {
        c.geometry.delta = 3.60e-5;
        c.t_end = 3.0 * 3600.0;
        for (double h : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0})
            c.output.snapshot_times.push_back(h * 3600.0);
        c.output.probe_radii = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25};
        c.output.probe_interval = 5.0;
    }
    return c;
}

double DtController::propose(double error_estimate, double dt) const {
    double fac;
    if (error_estimate <= 0.0) {
        fac = growth_cap;
    } else {
        fac = safety * std::pow(error_estimate, -0.35) * std::pow(err_prev, 0.2);
        fac = std::clamp(fac, shrink_cap, growth_cap);
    }
    return std::clamp(dt * fac, dt_min, dt_max);
}

double adapt_dt(double error_estimate, double dt, const SolverConfig& solver) {
    if (error_estimate < 0.0)
        throw ConfigError("adapt_dt: error estimate must be nonnegative");
    DtController c;
    c.safety = solver.safety;
    c.growth_cap = solver.growth_cap;
    c.shrink_cap = solver.shrink_cap;
    c.dt_min = solver.dt_min;
    c.dt_max = solver.dt_max;
    double next = c.propose(error_estimate, dt);
    if (error_estimate > 1.0 && next <= solver.dt_min)
        throw SolverError("adapt_dt: time step underflow");
    return next;
}

SimulationResult run(const SimulationConfig& config) {
    config.validate();
    if (config.scenario == Scenario::reduced)
        return Driver<ReducedModel>(config).run();
    return Driver<SapModel>(config).run();
}

const ProbeSeries& probe_series(const SimulationResult& result, double radius) {
    if (result.x.empty())
        throw ConfigError("probe_series: empty result");
    if (!(radius >= 0.0 && radius <= result.x.back() + 1e-12))
        throw ConfigError("probe_series: radius outside the domain");
    int best = 0;
    for (std::size_t i = 1; i < result.x.size(); ++i)
        if (std::fabs(result.x[i] - radius) < std::fabs(result.x[best] - radius))
            best = static_cast<int>(i);
    for (const auto& p : result.probes)
        if (p.node == best)
            return p;
    throw ConfigError("probe_series: no probe recorded near the requested radius");
}

} // namespace thawsim
