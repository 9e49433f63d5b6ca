#pragma once

// Proof emission: RUP steps, explicit cutting-planes derivations for the
// look-ahead clauses, reifications via redundance, contradiction subproofs,
// solution logging and the conclusion. The logger mirrors the checker's id
// numbering; with live verification enabled every emitted line is fed
// straight back through the checker and a rejection aborts the solver.

#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <stdexcept>
#include <vector>

#include "checker.hpp"
#include "pb.hpp"
#include "wcnf.hpp"

namespace maxbb {

struct ProofError : std::logic_error {
    using std::logic_error::logic_error;
};

// Builds one pol line in RPN while evaluating the running result exactly
// as the checker will, so unsound derivations abort before emission.
class PolBuilder {
public:
    PolBuilder& id(long long cid, const PBConstraint& c) {
        rpn_ << sep() << cid;
        stack_.push_back(c);
        return *this;
    }
    PolBuilder& axiom(Lit l) {
        rpn_ << sep() << l.str();
        stack_.push_back(PBConstraint::literal_axiom(l));
        ++axioms_;
        return *this;
    }
    PolBuilder& mul(Coeff k) {
        rpn_ << sep() << k.str() << " *";
        top() = top().multiplied(k);
        ++mults_;
        return *this;
    }
    PolBuilder& div(Coeff k) {
        rpn_ << sep() << k.str() << " d";
        top() = top().divided(k);
        ++divs_;
        return *this;
    }
    PolBuilder& sat() {
        rpn_ << sep() << "s";
        top() = top().saturated();
        return *this;
    }
    PolBuilder& add() {
        if (stack_.size() < 2) throw ProofError("pol builder: add underflow");
        rpn_ << sep() << "+";
        PBConstraint b = std::move(stack_.back());
        stack_.pop_back();
        top() = PBConstraint::sum(top(), b);
        ++adds_;
        return *this;
    }
    // convenience: push-and-add
    PolBuilder& add_id(long long cid, const PBConstraint& c, Coeff factor = 1) {
        id(cid, c);
        if (factor != Coeff(1)) mul(factor);
        return add();
    }
    PolBuilder& add_axiom(Lit l, Coeff factor = 1) {
        axiom(l);
        if (factor != Coeff(1)) mul(factor);
        return add();
    }

    const PBConstraint& result() const {
        if (stack_.size() != 1) throw ProofError("pol builder: unbalanced stack");
        return stack_.back();
    }
    std::string rpn() const { return rpn_.str(); }
    long long primitive_steps() const { return axioms_ + mults_ + adds_ + divs_; }

private:
    std::ostringstream rpn_;
    std::vector<PBConstraint> stack_;
    long long axioms_ = 0, mults_ = 0, adds_ = 0, divs_ = 0;

    PBConstraint& top() {
        if (stack_.empty()) throw ProofError("pol builder: empty stack");
        return stack_.back();
    }
    const char* sep() { return rpn_.tellp() == 0 ? "" : " "; }
};

struct DerivationCensus {
    long long steps;      // literal axioms + multiplications + additions + divisions
    long long obj_size;   // |O|
    long long core_count; // |C|, trivial seed cores included
};

class ProofLogger {
public:
    ProofLogger(std::ostream& out, const PboInstance& inst, bool live_verify = false)
        : out_(&out), inst_(&inst) {
        if (live_verify) verifier_ = std::make_unique<ProofChecker>(inst);
        emit("pseudo-Boolean proof version 2.0");
        emit("f " + std::to_string(inst.formula.size()));
        next_id_ = (long long)inst.formula.size() + 1;
    }

    long long next_id() const { return next_id_; }
    long long live_sic_id() const { return sic_id_; }
    const PBConstraint& live_sic() const {
        if (sic_id_ == 0) throw ProofError("no solution-improving constraint logged yet");
        return sic_;
    }
    bool has_solution() const { return sic_id_ != 0; }

    long long log_rup(const PBConstraint& c) {
        emit("rup " + c.str());
        return new_id(c);
    }

    long long log_pol(const PolBuilder& b) {
        emit("pol " + b.rpn());
        return new_id(b.result());
    }

    struct ReifIds {
        long long forward;  // v -> (sum <= A)
        long long backward; // v <- (sum <= A)
        PBConstraint forward_c, backward_c;
    };

    // Reifies v <-> (sum of lhs <= bound) with two redundance steps with
    // singleton witnesses; v must be fresh.
    ReifIds log_reification(const std::vector<Term>& lhs, Coeff bound, Var v) {
        if (!used_.insert(v).second) throw ProofError("reification variable reused");
        Coeff total = 0;
        for (const auto& t : lhs) total += t.coeff;
        std::vector<Term> fwd = lhs;
        for (auto& t : fwd) t.coeff = -t.coeff;
        fwd.push_back({total - bound, Lit::negative(v)});
        ReifIds r;
        r.forward_c = PBConstraint::normalized(std::move(fwd), -bound);
        std::vector<Term> bwd = lhs;
        bwd.push_back({bound + Coeff(1), Lit::positive(v)});
        r.backward_c = PBConstraint::normalized(std::move(bwd), bound + Coeff(1));
        emit("red " + r.forward_c.str() + " x" + std::to_string(v) + " -> 0");
        r.forward = new_id(r.forward_c);
        emit("red " + r.backward_c.str() + " x" + std::to_string(v) + " -> 1");
        r.backward = new_id(r.backward_c);
        return r;
    }

    // Proof by contradiction: between begin and end the caller derives
    // 0 >= d (d >= 1) from the temporary negation id returned here.
    struct Subproof {
        long long negation_id;
        PBConstraint negation;
    };
    Subproof begin_contradiction(const PBConstraint& c) {
        if (in_subproof_) throw ProofError("nested contradiction subproof");
        emit("red " + c.str() + " ; begin");
        in_subproof_ = true;
        watermark_ = next_id_;
        pending_ = c;
        Subproof s{next_id_, c.negated()};
        ++next_id_;
        return s;
    }
    long long end_contradiction() {
        if (!in_subproof_) throw ProofError("end_contradiction outside subproof");
        if (!last_sub_.is_contradiction())
            throw ProofError("contradiction subproof did not derive 0 >= d");
        emit("end");
        in_subproof_ = false;
        return new_id(pending_);
    }

    // Objective-improvement step. The model is checked against F locally;
    // the literal list must cover every auxiliary variable whose reified
    // value is forced (the checker evaluates the full store).
    long long log_solution(const std::vector<Lit>& lits) {
        std::vector<int8_t> val;
        for (Lit l : lits) {
            if (l.var() >= int(val.size())) val.resize(l.var() + 1, 0);
            val[l.var()] = l.negated() ? 0 : 1;
        }
        auto value = [&](Var v) { return v < int(val.size()) && val[v] == 1 ? 1 : 0; };
        for (size_t i = 0; i < inst_->formula.size(); ++i)
            if (!inst_->formula[i].satisfied(value))
                throw ProofError("soli model violates formula constraint " + std::to_string(i + 1));
        Coeff v = inst_->objective.value_under(value);
        if (sic_id_ != 0 && v >= best_)
            throw ProofError("soli does not improve the incumbent");
        std::string line = "soli";
        for (Lit l : lits) line += " " + l.str();
        emit(line);
        best_ = v;
        sic_ = inst_->objective.improving_constraint(v - Coeff(1));
        sic_id_ = new_id(sic_);
        return sic_id_;
    }

    void log_del(long long id) { emit("del id " + std::to_string(id)); }

    void conclude_bounds(Coeff v) {
        emit("output NONE");
        emit("conclusion BOUNDS " + v.str() + " " + v.str());
        emit("end pseudo-Boolean proof");
        finish_verifier();
    }
    void conclude_unsat() {
        emit("output NONE");
        emit("conclusion UNSAT");
        emit("end pseudo-Boolean proof");
        finish_verifier();
    }

    void flush() { out_->flush(); }

    void mark_var_used(Var v) { used_.insert(v); }

    // step census for reporting
    long long lines_emitted() const { return lines_; }
    const std::vector<DerivationCensus>& soft_conflict_census() const { return soft_census_; }
    const std::vector<DerivationCensus>& hardening_census() const { return hard_census_; }
    void record_soft_conflict(DerivationCensus c) { soft_census_.push_back(c); }
    void record_hardening(DerivationCensus c) { hard_census_.push_back(c); }

private:
    std::ostream* out_;
    const PboInstance* inst_;
    std::unique_ptr<ProofChecker> verifier_;
    long long next_id_ = 1;
    long long lines_ = 0;
    long long sic_id_ = 0;
    Coeff best_ = 0;
    PBConstraint sic_;
    std::set<Var> used_;

    bool in_subproof_ = false;
    long long watermark_ = 0;
    PBConstraint pending_, last_sub_;
    std::vector<DerivationCensus> soft_census_, hard_census_;

    void emit(const std::string& line) {
        *out_ << line << '\n';
        ++lines_;
        if (verifier_) {
            if (auto r = verifier_->feed_line(line); r && !r->accepted)
                throw ProofError("live verification failed at '" + line + "': " + r->reason);
        }
    }
    void finish_verifier() {
        out_->flush();
        if (verifier_) {
            auto r = verifier_->finish();
            if (!r.accepted) throw ProofError("live verification: " + r.reason);
        }
    }
    long long new_id(const PBConstraint& c) {
        if (in_subproof_) last_sub_ = c;
        for (const auto& t : c.terms()) used_.insert(t.lit.var());
        return next_id_++;
    }
};

// One weighted local core as the proof layer needs it: the clause
// \/_{l in R u K} ~l together with its RUP id (trivial seed cores have a
// tautological clause and are never logged).
struct CoreContribution {
    long long weight = 0;
    std::vector<Lit> reasons; // R, subset of the trail
    std::vector<Lit> core;    // K, negations of objective literals
    bool trivial = false;
    long long clause_id = 0;
    PBConstraint clause;
};

namespace detail {

inline std::map<int, long long> charged_by_lit(const std::vector<CoreContribution>& cores) {
    std::map<int, long long> charged;
    for (const auto& q : cores)
        for (Lit k : q.core) charged[(~k).code] += q.weight;
    return charged;
}

inline PBConstraint reasons_clause(const std::vector<CoreContribution>& cores,
                                   std::vector<Lit> extra = {}) {
    std::set<int> lits;
    for (const auto& q : cores)
        for (Lit r : q.reasons) lits.insert((~r).code);
    for (Lit l : extra) lits.insert(l.code);
    std::vector<Lit> out;
    for (int code : lits) out.push_back(lit_from_code(code));
    return PBConstraint::clause(out);
}

} // namespace detail

// Cutting-planes derivation of clause_C from the SIC and the core clauses:
// weaken the SIC with literal axioms scaled by residual weights, add each
// core clause scaled by its weight, then divide so that every coefficient
// and the degree round to one.
inline long long derive_soft_conflict(ProofLogger& log, const Objective& obj,
                                      const std::vector<CoreContribution>& cores, Coeff vstar,
                                      long long sic_id, const PBConstraint& sic,
                                      PBConstraint* out_clause = nullptr) {
    auto charged = detail::charged_by_lit(cores);
    Coeff total = 0;
    for (const auto& q : cores) total += Coeff(q.weight);
    if (total < vstar) throw ProofError("soft conflict derivation without w_O(C) >= v*");

    PolBuilder b;
    b.id(sic_id, sic);
    for (const auto& t : obj.terms()) {
        long long r = t.cost - charged[t.lit.code];
        if (r > 0) b.add_axiom(t.lit, Coeff(r));
    }
    for (const auto& q : cores)
        if (!q.trivial) b.add_id(q.clause_id, q.clause, Coeff(q.weight));
    Coeff divisor = std::max(b.result().max_coeff(), b.result().degree());
    if (divisor > Coeff(1)) b.div(divisor);

    PBConstraint expect = detail::reasons_clause(cores);
    if (!(b.result() == expect))
        throw ProofError("soft conflict derivation did not produce clause_C");
    log.record_soft_conflict({b.primitive_steps(), (long long)obj.size(), (long long)cores.size()});
    long long id = log.log_pol(b);
    if (out_clause) *out_clause = expect;
    return id;
}

inline long long derive_soft_conflict(ProofLogger& log, const Objective& obj,
                                      const std::vector<CoreContribution>& cores, Coeff vstar,
                                      PBConstraint* out_clause = nullptr) {
    return derive_soft_conflict(log, obj, cores, vstar, log.live_sic_id(), log.live_sic(),
                                out_clause);
}

// Case-2 analogue: the axiom for the hardened literal is withheld, so its
// residual survives the addition and lands in the clause negated.
inline long long derive_hardening(ProofLogger& log, const Objective& obj,
                                  const std::vector<CoreContribution>& cores, Coeff vstar,
                                  Lit target, long long sic_id, const PBConstraint& sic,
                                  PBConstraint* out_clause = nullptr) {
    auto charged = detail::charged_by_lit(cores);
    Coeff total = 0;
    for (const auto& q : cores) total += Coeff(q.weight);
    long long resid = obj.cost_of(target) - charged[target.code];
    if (resid <= 0 || Coeff(resid) + total < vstar)
        throw ProofError("hardening derivation guard violated");

    PolBuilder b;
    b.id(sic_id, sic);
    for (const auto& t : obj.terms()) {
        if (t.lit == target) continue;
        long long r = t.cost - charged[t.lit.code];
        if (r > 0) b.add_axiom(t.lit, Coeff(r));
    }
    for (const auto& q : cores)
        if (!q.trivial) b.add_id(q.clause_id, q.clause, Coeff(q.weight));
    Coeff divisor = std::max(b.result().max_coeff(), b.result().degree());
    if (divisor > Coeff(1)) b.div(divisor);

    PBConstraint expect = detail::reasons_clause(cores, {~target});
    if (!(b.result() == expect))
        throw ProofError("hardening derivation did not produce clause_C | ~l");
    log.record_hardening({b.primitive_steps(), (long long)obj.size(), (long long)cores.size()});
    long long id = log.log_pol(b);
    if (out_clause) *out_clause = expect;
    return id;
}

inline long long derive_hardening(ProofLogger& log, const Objective& obj,
                                  const std::vector<CoreContribution>& cores, Coeff vstar,
                                  Lit target, PBConstraint* out_clause = nullptr) {
    return derive_hardening(log, obj, cores, vstar, target, log.live_sic_id(), log.live_sic(),
                            out_clause);
}

} // namespace maxbb
