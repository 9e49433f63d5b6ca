#pragma once

// The branch-and-bound main loop: propagate, look ahead, handle conflicts,
// record improving total assignments, decide. Include this header to use
// the solver; it completes Solver::solve() once the look-ahead engine and
// the MDD encoder are full types.

#include "lookahead.hpp"
#include "mdd.hpp"
#include "solver.hpp"

namespace maxbb {

inline Solver::~Solver() = default;

inline std::vector<Lit> Solver::model_literals() const {
    std::vector<int8_t> val(assigns_);
    if (encoder_) encoder_->extend_model(val);
    std::vector<Lit> lits;
    for (Var v = 1; v < int(val.size()); ++v)
        if (val[v] >= 0)
            lits.push_back(val[v] == 1 ? Lit::positive(v) : Lit::negative(v));
    return lits;
}

inline SolveResult Solver::finalize_done() {
    SolveResult r;
    if (has_incumbent_) {
        r.outcome = SolveOutcome::Optimum;
        r.has_model = true;
        r.value = best_;
        r.model = incumbent_;
        if (logger_) logger_->conclude_bounds(best_);
    } else {
        r.outcome = SolveOutcome::Unsat;
        if (logger_) logger_->conclude_unsat();
    }
    return r;
}

// Called on a propagation-closed total assignment. Returns true when the
// search is finished (result filled in).
inline bool Solver::handle_total_assignment(bool& finished, SolveResult& result) {
    Coeff val = inst_.objective.value_under([&](Var v) { return assigns_[v] == 1 ? 1 : 0; });
    bool improving = !has_incumbent_ || val < best_;
    if (improving) {
        has_incumbent_ = true;
        best_ = val;
        incumbent_ = assigns_;
        ++stats_.solutions;
        if (on_improve) on_improve(val);
        if (logger_) {
            logger_->log_solution(model_literals());
            logger_->flush();
        }
        if (val == Coeff(0)) {
            // the SIC is O <= -1: already contradictory
            if (logger_) logger_->log_rup(PBConstraint::contradiction());
            finished = true;
            result = finalize_done();
            return true;
        }
        if (encoder_ && cfg_.mdd_threshold > 0 &&
            (long long)inst_.objective.size() <= cfg_.mdd_threshold) {
            cancel_until(0);
            int confl = propagate();
            if (confl != kNoClause) {
                if (logger_) logger_->log_rup(PBConstraint::contradiction());
                finished = true;
                result = finalize_done();
                return true;
            }
            auto added = encoder_->encode(best_ - Coeff(1));
            bool root_falsified = false;
            for (auto& nc : added) {
                std::vector<Lit> lits;
                bool sat = false;
                for (Lit l : nc.lits) {
                    if (value(l) == 1) sat = true;
                    if (value(l) != 0) lits.push_back(l);
                }
                if (sat) {
                    attach_clause(nc.lits, false, nc.proof_id);
                    continue;
                }
                if (lits.empty()) {
                    root_falsified = true;
                    break;
                }
                if (lits.size() == 1) {
                    attach_clause(nc.lits, false, nc.proof_id);
                    enqueue(lits[0], kNoClause);
                } else {
                    attach_clause(nc.lits, false, nc.proof_id);
                }
            }
            if (!root_falsified && propagate() != kNoClause) root_falsified = true;
            if (root_falsified) {
                if (logger_) logger_->log_rup(PBConstraint::contradiction());
                finished = true;
                result = finalize_done();
                return true;
            }
            return false; // search continues from the root
        }
    }
    // backtrack away from the total assignment: the negation of the
    // decisions is RUP against the live solution-improving constraint
    if (decision_level() == 0) {
        if (logger_) logger_->log_rup(PBConstraint::contradiction());
        finished = true;
        result = finalize_done();
        return true;
    }
    std::vector<Lit> lits;
    for (int i = int(trail_lim_.size()) - 1; i >= 0; --i)
        lits.push_back(~trail_[trail_lim_[i]]);
    long long pid = logger_ ? logger_->log_rup(PBConstraint::clause(lits)) : 0;
    AnalyzeResult ar{std::move(lits), decision_level() - 1};
    learn_and_assert(ar, pid);
    return false;
}

inline SolveResult Solver::solve() {
    start_ = std::chrono::steady_clock::now();
    if (!lookahead_) lookahead_ = std::make_unique<LookaheadEngine>(*this);
    if (!encoder_ && cfg_.mdd_threshold > 0) encoder_ = std::make_unique<MddEncoder>(*this);
    SolveResult result;

    if (root_conflict_) {
        if (logger_) logger_->log_rup(PBConstraint::contradiction());
        return finalize_done();
    }

    long long node_counter = 0;
    long long restart_count = 0;
    long long conflicts_at_restart = 0;

    for (;;) {
        int confl = propagate();
        std::optional<std::vector<Lit>> conflict;
        if (confl != kNoClause) conflict = clauses_[confl].lits;

        if (!conflict && cfg_.lookahead_period > 0 && has_incumbent_ &&
            node_counter++ % cfg_.lookahead_period == 0) {
            auto la = lookahead_->run();
            if (la.kind == LookaheadEngine::Outcome::SoftConflict) {
                conflict = la.conflict;
            } else if (la.conflict_cref != kNoClause) {
                conflict = clauses_[la.conflict_cref].lits;
            } else if (la.kind == LookaheadEngine::Outcome::Hardened) {
                continue; // hardening assigned literals; rerun the loop
            }
        }

        if (conflict) {
            ++stats_.conflicts;
            int maxlev = 0;
            for (Lit l : *conflict) maxlev = std::max(maxlev, level_[l.var()]);
            if (maxlev == 0) {
                if (logger_) logger_->log_rup(PBConstraint::contradiction());
                return finalize_done();
            }
            cancel_until(std::min(maxlev, decision_level()));
            auto ar = analyze(*conflict);
            long long pid = logger_ ? logger_->log_rup(PBConstraint::clause(ar.learnt)) : 0;
            learn_and_assert(ar, pid);
            decay_activity();
            if (out_of_budget()) {
                if (logger_) logger_->flush();
                result.outcome = SolveOutcome::Indeterminate;
                result.has_model = has_incumbent_;
                result.value = best_;
                result.model = incumbent_;
                return result;
            }
            if (cfg_.restarts && stats_.conflicts >= 1000 &&
                stats_.conflicts - conflicts_at_restart >= 100 * luby(restart_count)) {
                ++restart_count;
                conflicts_at_restart = stats_.conflicts;
                ++stats_.restarts;
                cancel_until(0);
            }
            continue;
        }

        if (all_assigned()) {
            bool finished = false;
            if (handle_total_assignment(finished, result)) return result;
            continue;
        }

        if (out_of_budget()) {
            if (logger_) logger_->flush();
            result.outcome = SolveOutcome::Indeterminate;
            result.has_model = has_incumbent_;
            result.value = best_;
            result.model = incumbent_;
            return result;
        }

        Var v = pick_branch_var();
        if (v == 0) continue; // raced with all_assigned; loop re-checks
        assume(polarity_[v] ? Lit::positive(v) : Lit::negative(v));
    }
}

} // namespace maxbb
