#pragma once

// The bounding half of the search: discover an O-compatible set of weighted
// local cores by assuming objective literals false on top of the current
// trail, detect soft conflicts and hardening opportunities, and hand the
// derivable clauses to the proof logger.

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "proof.hpp"
#include "solver.hpp"

namespace maxbb {

struct WeightedLocalCore {
    long long weight = 0;
    std::vector<Lit> reasons; // R, subset of the trail at discovery time
    std::vector<Lit> core;    // K, negations of objective literals
    bool trivial = false;
};

// O-compatible collection of cores with residual-weight bookkeeping.
class CoreSet {
public:
    explicit CoreSet(const Objective& obj) : obj_(&obj) {}

    long long residual(Lit objective_lit) const {
        auto it = charged_.find(objective_lit.code);
        long long charged = it == charged_.end() ? 0 : it->second;
        return obj_->cost_of(objective_lit) - charged;
    }

    void insert(WeightedLocalCore q) {
        for (Lit k : q.core) {
            Lit obj_lit = ~k;
            charged_[obj_lit.code] += q.weight;
            if (residual(obj_lit) < 0)
                throw std::logic_error("core set lost O-compatibility");
        }
        total_ = total_ + Coeff(q.weight);
        cores_.push_back(std::move(q));
    }

    Coeff total_weight() const { return total_; }
    const std::vector<WeightedLocalCore>& cores() const { return cores_; }
    bool empty() const { return cores_.empty(); }

private:
    const Objective* obj_;
    std::vector<WeightedLocalCore> cores_;
    std::map<int, long long> charged_;
    Coeff total_ = 0;
};

class LookaheadEngine {
public:
    explicit LookaheadEngine(Solver& s) : s_(s) {}

    struct Outcome {
        enum Kind { NoOp, Hardened, SoftConflict } kind = NoOp;
        std::vector<Lit> conflict; // falsified clause_C for SoftConflict
        int conflict_cref = Solver::kNoClause; // set when a hardening propagation conflicts
    };

    Outcome run() {
        if (!s_.has_incumbent_) return {}; // bound at +infinity: nothing to do
        ++s_.stats_.lookahead_calls;
        const Objective& obj = s_.inst_.objective;
        Coeff vstar = s_.best_;
        int entry = s_.decision_level();
        CoreSet cs(obj);

        // trivial cores for already cost-incurring literals
        for (const auto& t : obj.terms())
            if (s_.value(t.lit) == 1)
                cs.insert({t.cost, {t.lit}, {~t.lit}, true});

        std::vector<Lit> assumed; // K under construction
        while (cs.total_weight() < vstar) {
            Lit pick = pick_literal(cs);
            if (!pick.defined()) break;
            s_.assume(~pick);
            assumed.push_back(~pick);
            size_t pre = s_.trail_.size() - 1;
            int confl = s_.propagate();
            Lit forced{};
            if (confl == Solver::kNoClause) {
                for (size_t i = pre; i < s_.trail_.size() && !forced.defined(); ++i) {
                    Lit l = s_.trail_[i];
                    if (obj.cost_of(l) > 0 && cs.residual(l) > 0) forced = l;
                }
                if (!forced.defined()) continue; // keep assuming
            }
            WeightedLocalCore q = improve_core(confl, forced, assumed, entry);
            s_.cancel_until(entry);
            verify_core(q, entry);
            long long w = q.weight = min_residual(cs, q.core);
            (void)w;
            cs.insert(q);
            ++s_.stats_.cores;
            assumed.clear();
        }
        s_.cancel_until(entry);

        if (cs.total_weight() >= vstar) return soft_conflict(cs, vstar);
        return hardenings(cs, vstar);
    }

    // Exposed for tests: the reduced (R, K') for a given conflict.
    WeightedLocalCore improve_core(int conflict_cref, Lit forced,
                                   const std::vector<Lit>& assumed, int entry_level) {
        (void)assumed;
        std::vector<Lit> need; // look-ahead propagations still to resolve
        std::set<int> seen, r_set, k_set;
        auto classify = [&](Lit t) {
            if (!seen.insert(t.code).second) return;
            int lv = s_.level_[t.var()];
            if (lv == 0) return; // entailed at root, omitted from the clause
            if (lv <= entry_level) {
                r_set.insert(t.code);
            } else if (s_.reason_[t.var()] == Solver::kNoClause) {
                k_set.insert(t.code); // look-ahead assumption, already ~objective form
            } else {
                need.push_back(t);
            }
        };
        if (forced.defined()) {
            k_set.insert((~forced).code);
            seen.insert((~forced).code);
            for (Lit x : s_.clause_lits(s_.reason_[forced.var()]))
                if (x != forced) classify(~x);
        } else {
            for (Lit x : s_.clause_lits(conflict_cref)) classify(~x);
        }
        while (!need.empty()) {
            Lit t = need.back();
            need.pop_back();
            for (Lit x : s_.clause_lits(s_.reason_[t.var()]))
                if (x != t) classify(~x);
        }
        WeightedLocalCore q;
        for (int c : r_set) q.reasons.push_back(lit_from_code(c));
        for (int c : k_set) q.core.push_back(lit_from_code(c));
        return q;
    }

    static long long min_residual(const CoreSet& cs, const std::vector<Lit>& core) {
        long long w = -1;
        for (Lit k : core) {
            long long r = cs.residual(~k);
            if (w < 0 || r < w) w = r;
        }
        if (w <= 0) throw std::logic_error("core without positive residual weight");
        return w;
    }

private:
    Solver& s_;

    // descending residual weight, ties by variable index
    Lit pick_literal(const CoreSet& cs) {
        Lit best{};
        long long best_r = 0;
        for (const auto& t : s_.inst_.objective.terms()) {
            if (s_.value(t.lit) >= 0) continue;
            long long r = cs.residual(t.lit);
            if (r <= 0) continue;
            if (r > best_r || (r == best_r && best.defined() && t.lit.var() < best.var())) {
                best = t.lit;
                best_r = r;
            }
        }
        return best;
    }

    // F ∧ R ∧ K must be propagation-refutable; checked before anything is
    // emitted or inserted.
    void verify_core(const WeightedLocalCore& q, int entry) {
        s_.new_decision_level();
        bool already = false;
        for (Lit l : q.core) {
            if (s_.value(l) == 0) already = true;
            if (s_.value(l) < 0) s_.enqueue(l, Solver::kNoClause);
        }
        int confl = already ? 0 : s_.propagate();
        s_.cancel_until(entry);
        if (!already && confl == Solver::kNoClause)
            throw std::logic_error("extracted core is not propagation-refutable");
    }

    PBConstraint core_clause(const WeightedLocalCore& q) const {
        std::vector<Lit> lits;
        for (Lit l : q.reasons) lits.push_back(~l);
        for (Lit l : q.core) lits.push_back(~l);
        return PBConstraint::clause(lits);
    }

    std::vector<CoreContribution> log_core_clauses(const CoreSet& cs) {
        std::vector<CoreContribution> out;
        for (const auto& q : cs.cores()) {
            CoreContribution c;
            c.weight = q.weight;
            c.reasons = q.reasons;
            c.core = q.core;
            c.trivial = q.trivial;
            if (!q.trivial) {
                c.clause = core_clause(q);
                if (s_.logger_) c.clause_id = s_.logger_->log_rup(c.clause);
            }
            out.push_back(std::move(c));
        }
        return out;
    }

    Outcome soft_conflict(const CoreSet& cs, Coeff vstar) {
        ++s_.stats_.soft_conflicts;
        auto contribs = log_core_clauses(cs);
        PBConstraint clause_c;
        if (s_.logger_) {
            derive_soft_conflict(*s_.logger_, s_.inst_.objective, contribs, vstar, &clause_c);
        } else {
            clause_c = detail::reasons_clause(contribs);
        }
        Outcome o;
        o.kind = Outcome::SoftConflict;
        for (const auto& t : clause_c.terms()) o.conflict.push_back(t.lit);
        return o;
    }

    Outcome hardenings(const CoreSet& cs, Coeff vstar) {
        Outcome o;
        std::vector<CoreContribution> contribs;
        bool logged = false;
        for (const auto& t : s_.inst_.objective.terms()) {
            if (s_.value(t.lit) >= 0) continue;
            long long r = cs.residual(t.lit);
            if (r <= 0 || Coeff(r) + cs.total_weight() < vstar) continue;
            if (!logged) {
                contribs = log_core_clauses(cs);
                logged = true;
            }
            PBConstraint clause;
            long long pid = 0;
            if (s_.logger_) {
                pid = derive_hardening(*s_.logger_, s_.inst_.objective, contribs, vstar, t.lit,
                                       &clause);
            } else {
                clause = detail::reasons_clause(contribs, {~t.lit});
            }
            std::vector<Lit> lits;
            lits.push_back(~t.lit); // asserting literal first
            for (const auto& ct : clause.terms())
                if (ct.lit != ~t.lit) lits.push_back(ct.lit);
            ++s_.stats_.hardenings;
            o.kind = Outcome::Hardened;
            if (lits.size() == 1 && s_.decision_level() == 0) {
                s_.enqueue(~t.lit, Solver::kNoClause);
            } else {
                int cref = s_.attach_clause(lits, true, pid);
                s_.enqueue(~t.lit, cref);
            }
            int confl = s_.propagate();
            if (confl != Solver::kNoClause) {
                o.conflict_cref = confl;
                return o;
            }
        }
        return o;
    }
};

} // namespace maxbb
