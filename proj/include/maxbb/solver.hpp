#pragma once

// The branching half of branch-and-bound MaxSAT: CDCL with watched
// literals, EVSIDS branching with phase saving, 1UIP conflict analysis and
// non-chronological backtracking. Every learned clause is logged as RUP;
// solutions are logged through the objective-improvement rule before the
// solver backtracks away from them.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "pb.hpp"
#include "proof.hpp"
#include "wcnf.hpp"

namespace maxbb {

struct SolverConfig {
    uint64_t seed = 0;
    long long conflict_limit = -1; // < 0: unlimited
    double time_limit = -1;        // seconds; < 0: unlimited
    bool restarts = true;
    int lookahead_period = 1; // run look-ahead every n-th node; 0 disables
    int mdd_threshold = 200;  // encode SIC when |O| <= threshold; 0 disables
    bool amo_detect = true;
    bool clause_deletion = false;
    bool live_verify = false;
};

struct SolverStats {
    long long decisions = 0, propagations = 0, conflicts = 0, restarts = 0;
    long long learned = 0, solutions = 0;
    long long lookahead_calls = 0, cores = 0, soft_conflicts = 0, hardenings = 0;
    long long mdd_nodes = 0, mdd_clauses = 0, encodings = 0;
};

enum class SolveOutcome { Optimum, Unsat, Indeterminate };

struct SolveResult {
    SolveOutcome outcome = SolveOutcome::Indeterminate;
    bool has_model = false;
    Coeff value = 0;
    std::vector<int8_t> model; // by var, 1-based; -1 for never-assigned
};

class LookaheadEngine;
class MddEncoder;

class Solver {
public:
    static constexpr int kNoClause = -1;

    Solver(const PboInstance& inst, SolverConfig cfg = {}, ProofLogger* logger = nullptr)
        : inst_(inst), cfg_(cfg), logger_(logger), rng_(cfg.seed) {
        while (nvars_ < inst.num_vars) new_var(true);
        for (const auto& t : inst.objective.terms())
            polarity_[t.lit.var()] = t.lit.negated(); // prefer the cost-free phase
        if (cfg.seed != 0)
            for (Var v = 1; v <= nvars_; ++v)
                activity_[v] = double(rng_() % 1024) * 1e-9;
        for (const auto& c : inst.formula) {
            std::vector<Lit> lits;
            for (const auto& t : c.terms()) lits.push_back(t.lit);
            if (!add_input_clause(lits)) root_conflict_ = true;
        }
    }

    ~Solver(); // defined in maxcdcl.hpp once the engines are complete types

    SolveResult solve();

    // incremental `o`-line reporting for the CLI
    std::function<void(Coeff)> on_improve;

    // --- state inspection (also the test surface) ---
    int value(Lit l) const {
        int8_t a = assigns_[l.var()];
        return a < 0 ? -1 : (a == (l.negated() ? 0 : 1) ? 1 : 0);
    }
    int value_var(Var v) const { return assigns_[v]; }
    int level(Var v) const { return level_[v]; }
    int reason(Var v) const { return reason_[v]; }
    int decision_level() const { return int(trail_lim_.size()); }
    const std::vector<Lit>& trail() const { return trail_; }
    const std::vector<Lit>& clause_lits(int cref) const { return clauses_[cref].lits; }
    int num_vars() const { return nvars_; }
    Coeff best_value() const { return best_; }
    bool has_incumbent() const { return has_incumbent_; }
    const SolverStats& stats() const { return stats_; }
    const PboInstance& instance() const { return inst_; }
    ProofLogger* logger() { return logger_; }
    const SolverConfig& config() const { return cfg_; }

    // --- operations shared with look-ahead, the encoder and tests ---
    Var new_var(bool decidable) {
        ++nvars_;
        assigns_.push_back(-1);
        level_.push_back(0);
        reason_.push_back(kNoClause);
        polarity_.push_back(false);
        activity_.push_back(0.0);
        watches_.resize(2 * nvars_ + 2);
        if (decidable) heap_insert(nvars_);
        return nvars_;
    }

    void new_decision_level() { trail_lim_.push_back(int(trail_.size())); }

    void enqueue(Lit l, int reason_cref) {
        assigns_[l.var()] = l.negated() ? 0 : 1;
        level_[l.var()] = decision_level();
        reason_[l.var()] = reason_cref;
        trail_.push_back(l);
    }

    // Propagate to fixpoint; returns conflicting clause ref or kNoClause.
    int propagate() {
        int confl = kNoClause;
        while (qhead_ < trail_.size()) {
            Lit p = trail_[qhead_++];
            ++stats_.propagations;
            auto& ws = watches_[(~p).code];
            size_t i = 0, j = 0;
            for (; i < ws.size();) {
                int cref = ws[i].cref;
                Lit blocker = ws[i].blocker;
                if (value(blocker) == 1) {
                    ws[j++] = ws[i++];
                    continue;
                }
                auto& c = clauses_[cref].lits;
                Lit false_lit = ~p;
                if (c[0] == false_lit) std::swap(c[0], c[1]);
                if (value(c[0]) == 1) {
                    ws[j++] = {cref, c[0]};
                    ++i;
                    continue;
                }
                bool moved = false;
                for (size_t k = 2; k < c.size(); ++k) {
                    if (value(c[k]) != 0) {
                        std::swap(c[1], c[k]);
                        watches_[c[1].code].push_back({cref, c[0]});
                        moved = true;
                        break;
                    }
                }
                if (moved) {
                    ++i;
                    continue;
                }
                // unit or conflicting on c[0]
                ws[j++] = {cref, c[0]};
                ++i;
                if (value(c[0]) == 0) {
                    confl = cref;
                    qhead_ = trail_.size();
                    while (i < ws.size()) ws[j++] = ws[i++];
                    break;
                }
                enqueue(c[0], cref);
            }
            ws.resize(j);
            if (confl != kNoClause) break;
        }
        return confl;
    }

    void cancel_until(int lvl) {
        if (decision_level() <= lvl) return;
        for (int i = int(trail_.size()) - 1; i >= trail_lim_[lvl]; --i) {
            Var v = trail_[i].var();
            if (save_phases_) polarity_[v] = !trail_[i].negated();
            assigns_[v] = -1;
            reason_[v] = kNoClause;
            heap_insert(v);
        }
        trail_.resize(trail_lim_[lvl]);
        trail_lim_.resize(lvl);
        qhead_ = trail_.size();
    }

    // Adds a clause to the database mid-search. The caller is responsible
    // for any proof step; `proof_id` is recorded for optional deletion.
    // Returns the clause ref, or kNoClause for an empty clause.
    int attach_clause(std::vector<Lit> lits, bool learnt, long long proof_id = 0) {
        if (lits.empty()) return kNoClause;
        int cref = int(clauses_.size());
        clauses_.push_back({std::move(lits), learnt, proof_id, 0, false});
        auto& c = clauses_.back().lits;
        if (c.size() >= 2) {
            // watch two literals with the highest assignment levels so the
            // clause is well-watched under the current partial assignment
            auto pos = [&](Lit l) {
                return value(l) != 0 ? INT32_MAX : level_[l.var()];
            };
            size_t w0 = 0;
            for (size_t k = 1; k < c.size(); ++k)
                if (pos(c[k]) > pos(c[w0])) w0 = k;
            std::swap(c[0], c[w0]);
            size_t w1 = 1;
            for (size_t k = 2; k < c.size(); ++k)
                if (pos(c[k]) > pos(c[w1])) w1 = k;
            std::swap(c[1], c[w1]);
            watches_[c[0].code].push_back({cref, c[1]});
            watches_[c[1].code].push_back({cref, c[0]});
        }
        return cref;
    }

    // Test/look-ahead helper: decide a literal and push a level.
    void assume(Lit l) {
        ++stats_.decisions;
        new_decision_level();
        enqueue(l, kNoClause);
    }

    // Root-level probe: assert l at a fresh level, propagate, report the
    // propagated literals; nullopt when asserting l conflicts.
    std::optional<std::vector<Lit>> probe(Lit l) {
        if (decision_level() != 0 || value(l) >= 0) return std::vector<Lit>{};
        bool saved = save_phases_;
        save_phases_ = false;
        new_decision_level();
        enqueue(l, kNoClause);
        int confl = propagate();
        std::optional<std::vector<Lit>> out;
        if (confl == kNoClause) {
            out.emplace(trail_.begin() + trail_lim_[0] + 1, trail_.end());
        }
        cancel_until(0);
        save_phases_ = saved;
        return out;
    }

    void bump_activity(Var v) {
        activity_[v] += var_inc_;
        if (activity_[v] > 1e100) {
            for (Var x = 1; x <= nvars_; ++x) activity_[x] *= 1e-100;
            var_inc_ *= 1e-100;
        }
        heap_update(v);
    }
    void decay_activity() { var_inc_ /= 0.95; }

    struct AnalyzeResult {
        std::vector<Lit> learnt; // [0] is the asserting literal
        int backjump_level;
    };

    // Standard 1UIP over an explicitly given conflicting literal set (which
    // need not be a database clause; look-ahead passes clause_C directly).
    AnalyzeResult analyze(const std::vector<Lit>& conflict) {
        std::vector<Lit> learnt;
        learnt.push_back(Lit{}); // slot for the asserting literal
        std::vector<bool> seen(nvars_ + 1, false);
        int counter = 0;
        size_t idx = trail_.size();
        const std::vector<Lit>* reason_lits = &conflict;
        Lit p{};
        std::vector<Lit> tmp;
        for (;;) {
            for (Lit q : *reason_lits) {
                if (p.defined() && q == p) continue;
                Var v = q.var();
                if (seen[v] || level_[v] == 0) continue;
                seen[v] = true;
                bump_activity(v);
                if (level_[v] == decision_level())
                    ++counter;
                else
                    learnt.push_back(q);
            }
            while (idx > 0 && !seen[trail_[idx - 1].var()]) --idx;
            p = trail_[--idx];
            seen[p.var()] = false;
            --counter;
            if (counter <= 0) break;
            int rc = reason_[p.var()];
            tmp = clauses_[rc].lits;
            for (auto& l : tmp)
                if (l == p) std::swap(l, tmp[0]);
            reason_lits = &tmp;
        }
        learnt[0] = ~p;
        int bj = 0;
        for (size_t k = 1; k < learnt.size(); ++k) bj = std::max(bj, level_[learnt[k].var()]);
        if (learnt.size() >= 2) {
            size_t best = 1;
            for (size_t k = 2; k < learnt.size(); ++k)
                if (level_[learnt[k].var()] > level_[learnt[best].var()]) best = k;
            std::swap(learnt[1], learnt[best]);
        }
        return {std::move(learnt), bj};
    }

    // Learns `lits` (already proven RUP-loggable by the caller's proof
    // step), backjumps and asserts the first literal.
    void learn_and_assert(const AnalyzeResult& ar, long long proof_id) {
        cancel_until(ar.backjump_level);
        ++stats_.learned;
        if (ar.learnt.size() == 1) {
            enqueue(ar.learnt[0], kNoClause);
        } else {
            int cref = attach_clause(ar.learnt, true, proof_id);
            clauses_[cref].lbd = clause_lbd(ar.learnt);
            enqueue(ar.learnt[0], cref);
        }
    }

    bool all_assigned() {
        while (!heap_.empty() && assigns_[heap_[0]] >= 0) heap_pop();
        return heap_.empty();
    }

    friend class LookaheadEngine;
    friend class MddEncoder;

private:
    struct Clause {
        std::vector<Lit> lits;
        bool learnt;
        long long proof_id;
        int lbd;
        bool dead;
    };
    struct Watch {
        int cref;
        Lit blocker;
    };

    const PboInstance& inst_;
    SolverConfig cfg_;
    ProofLogger* logger_;
    std::mt19937_64 rng_;

    int nvars_ = 0;
    std::vector<Clause> clauses_;
    std::vector<std::vector<Watch>> watches_{2};
    std::vector<int8_t> assigns_{0};
    std::vector<int> level_{0};
    std::vector<int> reason_{kNoClause};
    std::vector<bool> polarity_{false};
    std::vector<double> activity_{0.0};
    std::vector<Lit> trail_;
    std::vector<int> trail_lim_;
    size_t qhead_ = 0;
    bool save_phases_ = true;
    double var_inc_ = 1.0;

    // binary max-heap on activity, lazily cleaned
    std::vector<Var> heap_;
    std::vector<int> heap_pos_{-1};

    bool root_conflict_ = false;
    bool has_incumbent_ = false;
    Coeff best_ = 0;
    std::vector<int8_t> incumbent_;

    SolverStats stats_;
    std::chrono::steady_clock::time_point start_;

    std::unique_ptr<LookaheadEngine> lookahead_;
    std::unique_ptr<MddEncoder> encoder_;

    int clause_lbd(const std::vector<Lit>& lits) {
        std::vector<int> seen;
        for (Lit l : lits) {
            int lv = level_[l.var()];
            if (std::find(seen.begin(), seen.end(), lv) == seen.end()) seen.push_back(lv);
        }
        return int(seen.size());
    }

    // input clauses at level 0; returns false when immediately conflicting
    bool add_input_clause(const std::vector<Lit>& lits) {
        std::vector<Lit> out;
        for (Lit l : lits) {
            if (value(l) == 1) return true;
            if (std::find(out.begin(), out.end(), ~l) != out.end()) return true; // tautology
            if (value(l) == 0) continue;
            if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
        }
        if (out.empty()) return false;
        if (out.size() == 1) {
            enqueue(out[0], kNoClause);
            return propagate() == kNoClause;
        }
        attach_clause(out, false);
        return true;
    }

    // --- heap ---
    void heap_insert(Var v) {
        if (v >= int(heap_pos_.size())) heap_pos_.resize(v + 1, -1);
        if (heap_pos_[v] >= 0) return;
        heap_pos_[v] = int(heap_.size());
        heap_.push_back(v);
        heap_up(heap_pos_[v]);
    }
    void heap_update(Var v) {
        if (v < int(heap_pos_.size()) && heap_pos_[v] >= 0) heap_up(heap_pos_[v]);
    }
    bool heap_less(Var a, Var b) const {
        return activity_[a] > activity_[b] || (activity_[a] == activity_[b] && a < b);
    }
    void heap_up(int i) {
        Var v = heap_[i];
        while (i > 0) {
            int par = (i - 1) / 2;
            if (!heap_less(v, heap_[par])) break;
            heap_[i] = heap_[par];
            heap_pos_[heap_[i]] = i;
            i = par;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }
    void heap_down(int i) {
        Var v = heap_[i];
        int n = int(heap_.size());
        for (;;) {
            int c = 2 * i + 1;
            if (c >= n) break;
            if (c + 1 < n && heap_less(heap_[c + 1], heap_[c])) ++c;
            if (!heap_less(heap_[c], v)) break;
            heap_[i] = heap_[c];
            heap_pos_[heap_[i]] = i;
            i = c;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }
    void heap_pop() {
        Var v = heap_[0];
        heap_pos_[v] = -1;
        heap_[0] = heap_.back();
        heap_.pop_back();
        if (!heap_.empty()) {
            heap_pos_[heap_[0]] = 0;
            heap_down(0);
        }
    }
    Var pick_branch_var() {
        while (!heap_.empty()) {
            if (assigns_[heap_[0]] >= 0) {
                heap_pop();
                continue;
            }
            Var v = heap_[0];
            heap_pop();
            return v;
        }
        return 0;
    }

    static long long luby(long long x) {
        long long size = 1;
        int seq = 0;
        while (size < x + 1) {
            ++seq;
            size = 2 * size + 1;
        }
        while (size - 1 != x) {
            size = (size - 1) >> 1;
            --seq;
            x %= size;
        }
        return 1LL << seq;
    }

    bool out_of_budget() const {
        if (cfg_.conflict_limit >= 0 && stats_.conflicts >= cfg_.conflict_limit) return true;
        if (cfg_.time_limit >= 0) {
            auto now = std::chrono::steady_clock::now();
            double s = std::chrono::duration<double>(now - start_).count();
            if (s >= cfg_.time_limit) return true;
        }
        return false;
    }

    // solve() and its helpers are defined in maxcdcl.hpp
    SolveResult finalize_done();
    bool handle_total_assignment(bool& finished, SolveResult& result);
    std::vector<Lit> model_literals() const;
};

} // namespace maxbb
