#pragma once

// Slack-based unit propagation over a store of PB constraints, with
// per-literal reasons. Plain clauses are the degenerate case. Used by the
// proof checker for RUP and by tests as the reference propagator; the CDCL
// engine keeps its own clause-specialised watcher scheme.

#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "pb.hpp"

namespace maxbb {

constexpr long long kNoReason = -1;      // decision / assumption
constexpr long long kExtraReason = -2;   // the transient constraint of a RUP query

class PbStore {
public:
    void ensure_var(Var v) {
        if (2 * v + 2 > int(occs_.size())) occs_.resize(2 * v + 2);
        if (v + 1 > int(assign_.size())) {
            assign_.resize(v + 1, -1);
            reason_.resize(v + 1, kNoReason);
        }
    }

    bool contains(long long id) const { return cons_.count(id) != 0; }
    const PBConstraint& get(long long id) const { return cons_.at(id); }
    size_t size() const { return cons_.size(); }

    std::vector<long long> ids_mentioning(Var v) const {
        std::vector<long long> out;
        for (int code = 2 * v; code <= 2 * v + 1; ++code) {
            if (code >= int(occs_.size())) continue;
            for (long long id : occs_[code])
                if (cons_.count(id)) out.push_back(id);
        }
        return out;
    }

    void add(long long id, PBConstraint c) {
        for (const auto& t : c.terms()) ensure_var(t.lit.var());
        for (const auto& t : c.terms()) occs_[t.lit.code].push_back(id);
        if (propagates_at_root(c)) root_active_.push_back(id);
        cons_.emplace(id, std::move(c));
    }

    void remove(long long id) {
        cons_.erase(id);
        // occurrence and root lists are purged lazily during propagation
    }

    struct PropResult {
        bool conflict = false;
        long long conflict_id = 0; // kExtraReason when the extra constraint conflicts
    };

    // Propagates to fixpoint starting from `assumptions` (assigned as
    // decisions) with an optional extra transient constraint (the negated
    // claim of a RUP query). The trail and per-variable reasons are left in
    // place for inspection until the next query.
    PropResult propagate(const std::vector<Lit>& assumptions, const PBConstraint* extra = nullptr) {
        reset_state();
        if (extra)
            for (const auto& t : extra->terms()) ensure_var(t.lit.var());

        for (Lit l : assumptions) {
            ensure_var(l.var());
            if (value(l) == 0) return {true, kNoReason};
            if (value(l) < 0) assign(l, kNoReason);
        }
        if (extra) {
            auto r = examine(*extra, kExtraReason);
            if (r.conflict) return r;
        }
        // constraints that can fire without any trigger (stored units, 0>=1)
        for (size_t i = 0; i < root_active_.size();) {
            long long id = root_active_[i];
            auto it = cons_.find(id);
            if (it == cons_.end()) {
                root_active_[i] = root_active_.back();
                root_active_.pop_back();
                continue;
            }
            auto r = examine(it->second, id);
            if (r.conflict) return r;
            ++i;
        }
        while (qhead_ < trail_.size()) {
            Lit l = trail_[qhead_++];
            auto& occ = occs_[(~l).code];
            for (size_t i = 0; i < occ.size();) {
                long long id = occ[i];
                auto it = cons_.find(id);
                if (it == cons_.end()) {
                    occ[i] = occ.back();
                    occ.pop_back();
                    continue;
                }
                auto r = examine(it->second, id);
                if (r.conflict) return r;
                ++i;
            }
            if (extra) {
                auto r = examine(*extra, kExtraReason);
                if (r.conflict) return r;
            }
        }
        return {false, 0};
    }

    // post-propagation inspection
    int value(Lit l) const {
        int a = assign_[l.var()];
        if (a < 0) return -1;
        return a == (l.negated() ? 0 : 1) ? 1 : 0;
    }
    int value_var(Var v) const { return assign_[v]; }
    const std::vector<Lit>& trail() const { return trail_; }
    long long reason(Var v) const { return reason_[v]; }

private:
    std::unordered_map<long long, PBConstraint> cons_;
    std::vector<std::vector<long long>> occs_; // by literal code
    std::vector<long long> root_active_;
    std::vector<int8_t> assign_; // by var: -1/0/1
    std::vector<long long> reason_;
    std::vector<Lit> trail_;
    size_t qhead_ = 0;

    static bool propagates_at_root(const PBConstraint& c) {
        Coeff slack = c.coeff_sum() - c.degree();
        if (slack < Coeff(0)) return true;
        return c.max_coeff() > slack;
    }

    void reset_state() {
        for (Lit l : trail_) {
            assign_[l.var()] = -1;
            reason_[l.var()] = kNoReason;
        }
        trail_.clear();
        qhead_ = 0;
    }

    void assign(Lit l, long long why) {
        assign_[l.var()] = l.negated() ? 0 : 1;
        reason_[l.var()] = why;
        trail_.push_back(l);
    }

    // Checks one constraint against the current assignment: conflict when
    // slack < 0, otherwise enqueue every unassigned literal whose
    // coefficient exceeds the slack.
    PropResult examine(const PBConstraint& c, long long id) {
        Coeff slack = -c.degree();
        for (const auto& t : c.terms())
            if (value(t.lit) != 0) slack += t.coeff;
        if (slack < Coeff(0)) return {true, id};
        for (const auto& t : c.terms())
            if (value(t.lit) < 0 && t.coeff > slack) assign(t.lit, id);
        return {false, 0};
    }
};

// The pb_core propagate operation: extend an assignment to the propagation
// fixpoint of a constraint database, or report the violated constraint.
struct PropagateOutcome {
    bool conflict = false;
    long long conflict_id = 0;               // index into db when conflicting
    std::vector<Lit> assignment;             // trail order, assumptions first
    std::vector<long long> reasons;          // per trail entry; kNoReason for inputs
};

inline PropagateOutcome propagate_db(const std::vector<PBConstraint>& db,
                                     const std::vector<Lit>& assignment) {
    PbStore store;
    for (size_t i = 0; i < db.size(); ++i) store.add(static_cast<long long>(i), db[i]);
    auto r = store.propagate(assignment);
    PropagateOutcome out;
    out.conflict = r.conflict;
    out.conflict_id = r.conflict_id;
    out.assignment = store.trail();
    for (Lit l : store.trail()) out.reasons.push_back(store.reason(l.var()));
    return out;
}

} // namespace maxbb
