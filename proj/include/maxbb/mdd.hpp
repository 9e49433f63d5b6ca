#pragma once

// Reduced ordered BDD/MDD for the solution-improving constraint, built by
// degree-interval dynamic programming, its CNF encoding, and the
// certification of every auxiliary variable's defining constraints.
//
// A node <k,l,u> stands for the suffix constraints
//   sum_{j>=k} sum_{i in X_j} c_i b_i <= d          for every d in [l,u],
// which all have the same models (relative to the at-most-one groups). Its
// variable is pinned by the reified pair v -> (suffix <= l) and
// v <- (suffix <= u).

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include "proof.hpp"
#include "solver.hpp"

namespace maxbb {

class MddEncoder {
public:
    static constexpr int kFalseLeaf = -1;
    static constexpr int kTrueLeaf = -2;

    explicit MddEncoder(Solver& s) : s_(s) {}

    struct Group {
        std::vector<Objective::ObjTerm> members; // cost descending, ties by var
        long long max_cost = 0;
        Coeff total = 0;
        long long amo_id = 0; // PB constraint sum b_i <= 1 (groups of size >= 2)
        PBConstraint amo_c;
        long long ub_id = 0; // sum c_i b_i <= max_cost
        PBConstraint ub_c;
    };

    struct Node {
        int layer; // native layer, 1-based
        Coeff lo, hi;
        std::vector<int> child; // aligned with group members; kFalseLeaf/kTrueLeaf/index
        int else_child;
        Var v = 0, vprime = 0;
        bool emitted = false;
        // defining constraints per layer of use (<= native layer)
        std::map<int, std::pair<long long, long long>> def_ids;
        std::map<int, std::pair<PBConstraint, PBConstraint>> def_cons;
    };

    bool encoded() const { return !nodes_.empty(); }
    int root() const { return root_; }
    const Node& node(int idx) const { return nodes_[idx]; }
    size_t node_count() const { return nodes_.size(); }
    const std::vector<Group>& groups() const { return groups_; }

    // Detects at-most-one groups by root propagation probing: two objective
    // literals share a group when asserting either one propagates the
    // negation of the other, making the pairwise clause RUP.
    void detect_groups() {
        if (groups_detected_) return;
        groups_detected_ = true;
        const auto& terms = s_.inst_.objective.terms();
        int n = int(terms.size());
        std::vector<std::vector<bool>> pair_ok(n, std::vector<bool>(n, false));
        if (s_.cfg_.amo_detect) {
            std::vector<std::set<int>> implied(n);
            std::vector<bool> conflicting(n, false);
            for (int i = 0; i < n; ++i) {
                auto props = s_.probe(terms[i].lit);
                if (!props) {
                    conflicting[i] = true;
                    continue;
                }
                for (Lit l : *props) implied[i].insert(l.code);
            }
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    bool ok = conflicting[i] || conflicting[j] ||
                              implied[i].count((~terms[j].lit).code) ||
                              implied[j].count((~terms[i].lit).code);
                    pair_ok[i][j] = pair_ok[j][i] = ok;
                }
        }
        std::vector<bool> grouped(n, false);
        for (int i = 0; i < n; ++i) {
            if (grouped[i]) continue;
            Group g;
            g.members.push_back(terms[i]);
            grouped[i] = true;
            for (int j = i + 1; j < n; ++j) {
                if (grouped[j]) continue;
                bool ok = true;
                for (const auto& m : g.members) {
                    int mi = index_of(terms, m.lit);
                    if (!pair_ok[mi][j]) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    g.members.push_back(terms[j]);
                    grouped[j] = true;
                }
            }
            std::sort(g.members.begin(), g.members.end(), [](const auto& a, const auto& b) {
                return a.cost != b.cost ? a.cost > b.cost : a.lit.var() < b.lit.var();
            });
            for (const auto& m : g.members) {
                g.max_cost = std::max(g.max_cost, m.cost);
                g.total += Coeff(m.cost);
            }
            groups_.push_back(std::move(g));
        }
        // layer order: descending max cost, groups contiguous, ties by var
        std::sort(groups_.begin(), groups_.end(), [](const Group& a, const Group& b) {
            if (a.max_cost != b.max_cost) return a.max_cost > b.max_cost;
            return a.members[0].lit.var() < b.members[0].lit.var();
        });
        int m = int(groups_.size());
        suffix_total_.assign(m + 2, Coeff(0));
        suffix_max_.assign(m + 2, Coeff(0));
        for (int k = m; k >= 1; --k) {
            suffix_total_[k] = suffix_total_[k + 1] + groups_[k - 1].total;
            suffix_max_[k] = suffix_max_[k + 1] + Coeff(groups_[k - 1].max_cost);
        }
        table_.assign(m + 2, {});
    }

    // Ensures the encoding for bound B = v*-1 exists: first call builds,
    // certifies and emits everything; later calls tighten the root against
    // the new live SIC, reusing the node table. New clauses are attached to
    // the solver at the root level by the caller's contract (the solver is
    // at decision level 0).
    struct NewClause {
        std::vector<Lit> lits;
        long long proof_id;
    };
    std::vector<NewClause> encode(Coeff bound) {
        detect_groups();
        pending_.clear();
        if (bound < Coeff(0)) throw std::logic_error("encode called with negative bound");
        if (!amo_certified_ && s_.logger_) certify_groups();
        int r = build(1, bound);
        if (r == kTrueLeaf) {
            root_ = kTrueLeaf; // bound does not constrain anything
            return {};
        }
        if (r == kFalseLeaf) throw std::logic_error("root became the false leaf");
        s_.stats_.mdd_nodes = (long long)nodes_.size();
        ensure_vars(r); // encoding variables exist with or without proof logging
        if (s_.logger_) {
            ensure_certified(r);
            ensure_defs_at(r, 1);
        }
        emit_clauses(r);
        if (r != root_) {
            root_ = r;
            // root unit clause v_root >= 1 from C_def<-(root@1) and the SIC
            long long pid = 0;
            if (s_.logger_) {
                const auto& [fwd, bwd] = nodes_[r].def_cons.at(1);
                const auto& [fid, bid] = nodes_[r].def_ids.at(1);
                (void)fid;
                (void)fwd;
                PolBuilder b;
                b.id(bid, bwd);
                b.add_id(s_.logger_->live_sic_id(), s_.logger_->live_sic());
                b.div(nodes_[r].hi + Coeff(1));
                if (!(b.result() == PBConstraint::clause({Lit::positive(nodes_[r].v)})))
                    throw ProofError("root unit derivation failed");
                pid = s_.logger_->log_pol(b);
            }
            pending_.push_back({{Lit::positive(nodes_[r].v)}, pid});
        }
        s_.stats_.mdd_clauses += (long long)pending_.size();
        ++s_.stats_.encodings;
        return std::move(pending_);
    }

    // Reified auxiliary values are a function of the objective literals;
    // solutions are logged with these exact values so the checker's full
    // store evaluation succeeds.
    void extend_model(std::vector<int8_t>& val) const {
        for (const auto& nd : nodes_) {
            Coeff suffix = 0;
            for (int k = nd.layer; k <= int(groups_.size()); ++k)
                for (const auto& m : groups_[k - 1].members) {
                    Var x = m.lit.var();
                    bool t = x < int(val.size()) && val[x] == 1;
                    if (t != m.lit.negated()) suffix += Coeff(m.cost);
                }
            if (nd.v != 0) set_val(val, nd.v, suffix <= nd.lo);
            if (nd.vprime != 0) set_val(val, nd.vprime, suffix <= nd.hi);
        }
    }

    // interval of `ref` when used at `layer` (<= native layer)
    std::pair<Coeff, Coeff> interval_at(int ref, int layer) const {
        if (ref == kTrueLeaf) return {suffix_max_[layer], suffix_max_[layer]}; // hi is +inf
        if (ref == kFalseLeaf) return {Coeff(-1), Coeff(-1)};                  // lo is -inf
        const Node& nd = nodes_[ref];
        Coeff shift = suffix_max_[layer] - suffix_max_[nd.layer];
        return {nd.lo + shift, nd.hi};
    }

private:
    Solver& s_;
    bool groups_detected_ = false;
    bool amo_certified_ = false;
    std::vector<Group> groups_;
    std::vector<Coeff> suffix_total_, suffix_max_; // by layer, [m+1] = 0
    std::deque<Node> nodes_;
    // per layer: interval start -> (interval end, node index)
    std::vector<std::map<Coeff, std::pair<Coeff, int>>> table_;
    int root_ = kTrueLeaf;
    std::vector<NewClause> pending_;

    static void set_val(std::vector<int8_t>& val, Var v, bool b) {
        if (v >= int(val.size())) val.resize(v + 1, 0);
        val[v] = b ? 1 : 0;
    }

    static int index_of(const std::vector<Objective::ObjTerm>& terms, Lit l) {
        for (int i = 0; i < int(terms.size()); ++i)
            if (terms[i].lit == l) return i;
        return -1;
    }

    // ---------------- construction ----------------

    int build(int k, Coeff d) {
        if (d < Coeff(0)) return kFalseLeaf;
        if (d >= suffix_max_[k]) return kTrueLeaf;
        auto& tab = table_[k];
        auto it = tab.upper_bound(d);
        if (it != tab.begin()) {
            --it;
            if (d <= it->second.first) return it->second.second;
        }
        const Group& g = groups_[k - 1];
        std::vector<int> ch;
        ch.reserve(g.members.size());
        for (const auto& m : g.members) ch.push_back(build(k + 1, d - Coeff(m.cost)));
        int els = build(k + 1, d);
        Coeff lo = interval_at(els, k + 1).first;
        bool hi_inf = els == kTrueLeaf;
        Coeff hi = hi_inf ? Coeff(0) : interval_at(els, k + 1).second;
        for (size_t i = 0; i < ch.size(); ++i) {
            Coeff c = Coeff(g.members[i].cost);
            if (ch[i] != kFalseLeaf) lo = std::max(lo, interval_at(ch[i], k + 1).first + c);
            if (ch[i] != kTrueLeaf) {
                Coeff h = interval_at(ch[i], k + 1).second + c;
                hi = hi_inf ? h : std::min(hi, h);
                hi_inf = false;
            }
        }
        if (hi_inf) throw std::logic_error("true node not caught by the leaf test");
        int result;
        bool all_same = els != kFalseLeaf;
        for (int c : ch)
            if (c != els) all_same = false;
        if (all_same && els != kTrueLeaf) {
            result = els; // function ignores this layer; reuse with a shifted interval
        } else {
            Node nd;
            nd.layer = k;
            nd.lo = lo;
            nd.hi = hi;
            nd.child = ch;
            nd.else_child = els;
            nodes_.push_back(std::move(nd));
            result = int(nodes_.size()) - 1;
        }
        tab.emplace(lo, std::make_pair(hi, result));
        return result;
    }

    // ---------------- certification ----------------

    Lit group_lit(int layer, int member) const { return groups_[layer - 1].members[member].lit; }

    std::vector<Term> suffix_terms(int layer) const {
        std::vector<Term> ts;
        for (int k = layer; k <= int(groups_.size()); ++k)
            for (const auto& m : groups_[k - 1].members)
                ts.push_back({Coeff(m.cost), m.lit});
        return ts;
    }

    void certify_groups() {
        amo_certified_ = true;
        auto& log = *s_.logger_;
        for (auto& g : groups_) {
            // UB(X) = sum c_i b_i <= max costs; for singletons via one axiom
            std::vector<Term> ts;
            for (const auto& m : g.members) ts.push_back({Coeff(m.cost), m.lit});
            g.ub_c = PBConstraint::normalized(ts, Coeff(g.max_cost), PBConstraint::Cmp::Leq);
            if (g.members.size() == 1) {
                PolBuilder b;
                b.axiom(~g.members[0].lit);
                if (Coeff(g.members[0].cost) > Coeff(1)) b.mul(Coeff(g.members[0].cost));
                if (!(b.result() == g.ub_c)) throw ProofError("singleton UB derivation failed");
                g.ub_id = log.log_pol(b);
                continue;
            }
            // pairwise clauses are RUP by the detection criterion
            int n = int(g.members.size());
            std::vector<std::vector<long long>> pid(n, std::vector<long long>(n, 0));
            std::vector<std::vector<PBConstraint>> pc(n, std::vector<PBConstraint>(n));
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    pc[i][j] = PBConstraint::clause({~g.members[i].lit, ~g.members[j].lit});
                    pid[i][j] = log.log_rup(pc[i][j]);
                }
            // iterated cutting planes: extend the partial AMO one literal at
            // a time (multiply by t-1, add the next clause batch, divide by t)
            PBConstraint amo = pc[0][1];
            long long amo_id = pid[0][1];
            for (int t = 2; t < n; ++t) {
                PolBuilder b;
                b.id(amo_id, amo);
                if (t - 1 > 1) b.mul(Coeff(t - 1));
                for (int i = 0; i < t; ++i) b.add_id(pid[i][t], pc[i][t]);
                b.div(Coeff(t));
                amo = b.result();
                amo_id = log.log_pol(b);
            }
            g.amo_c = amo;
            g.amo_id = amo_id;
            {
                std::vector<Term> expect;
                for (const auto& m : g.members) expect.push_back({Coeff(1), m.lit});
                if (!(amo == PBConstraint::normalized(expect, Coeff(1), PBConstraint::Cmp::Leq)))
                    throw ProofError("AMO derivation failed");
            }
            // UB: multiply the AMO by the max cost, then pad cheaper
            // literals with axioms scaled by the cost gap
            PolBuilder b;
            b.id(g.amo_id, g.amo_c);
            b.mul(Coeff(g.max_cost));
            for (const auto& m : g.members)
                if (m.cost < g.max_cost) b.add_axiom(m.lit, Coeff(g.max_cost - m.cost));
            if (!(b.result() == g.ub_c)) throw ProofError("UB derivation failed");
            g.ub_id = log.log_pol(b);
        }
    }

    void ensure_vars(int ref) {
        if (ref < 0 || nodes_[ref].v != 0) return;
        for (int c : nodes_[ref].child) ensure_vars(c);
        ensure_vars(nodes_[ref].else_child);
        nodes_[ref].v = s_.new_var(true);
    }

    void ensure_certified(int ref) {
        if (ref < 0 || !nodes_[ref].def_ids.empty()) return;
        // children first (bottom-up)
        {
            const Node& nd = nodes_[ref];
            for (int c : nd.child) ensure_certified(c);
            ensure_certified(nd.else_child);
            int below = nd.layer + 1;
            for (int c : nd.child)
                if (c >= 0) ensure_defs_at(c, below);
            if (nd.else_child >= 0) ensure_defs_at(nd.else_child, below);
        }
        certify_node(ref);
    }

    void ensure_defs_at(int ref, int layer) {
        Node& nd = nodes_[ref];
        if (nd.def_ids.count(layer)) return;
        if (layer > nd.layer) throw std::logic_error("defs requested below the native layer");
        auto& log = *s_.logger_;
        auto [lo_at, hi_at] = interval_at(ref, layer);
        const auto& [nfid, nbid] = nd.def_ids.at(nd.layer);
        const auto& [nfc, nbc] = nd.def_cons.at(nd.layer);

        // C_def-> at the earlier layer: add the skipped UBs, then pad the
        // reification literal for the cost mass the maxima do not cover
        PolBuilder f;
        f.id(nfid, nfc);
        Coeff pad = 0;
        for (int j = layer; j < nd.layer; ++j) {
            f.add_id(groups_[j - 1].ub_id, groups_[j - 1].ub_c);
            pad += groups_[j - 1].total - Coeff(groups_[j - 1].max_cost);
        }
        if (pad > Coeff(0)) f.add_axiom(Lit::negative(nd.v), pad);
        PBConstraint fwd_expect = reif_forward(suffix_terms(layer), lo_at, nd.v);
        if (!(f.result() == fwd_expect)) throw ProofError("layer shift (->) failed");
        long long fid = log.log_pol(f);

        // C_def<- at the earlier layer: pad with the skipped literals
        PolBuilder b;
        b.id(nbid, nbc);
        for (int j = layer; j < nd.layer; ++j)
            for (const auto& m : groups_[j - 1].members) b.add_axiom(m.lit, Coeff(m.cost));
        PBConstraint bwd_expect = reif_backward(suffix_terms(layer), hi_at, nd.v);
        if (!(b.result() == bwd_expect)) throw ProofError("layer shift (<-) failed");
        long long bid = log.log_pol(b);

        nd.def_ids[layer] = {fid, bid};
        nd.def_cons[layer] = {fwd_expect, bwd_expect};
    }

    static PBConstraint reif_forward(std::vector<Term> lhs, Coeff bound, Var v) {
        Coeff total = 0;
        for (auto& t : lhs) {
            total += t.coeff;
            t.coeff = -t.coeff;
        }
        lhs.push_back({total - bound, Lit::negative(v)});
        return PBConstraint::normalized(std::move(lhs), -bound);
    }
    static PBConstraint reif_backward(std::vector<Term> lhs, Coeff bound, Var v) {
        lhs.push_back({bound + Coeff(1), Lit::positive(v)});
        return PBConstraint::normalized(std::move(lhs), bound + Coeff(1));
    }

    struct SubUnits {
        long long bm = 0, vp = 0, nv = 0;
        PBConstraint bm_c, vp_c, nv_c;
    };

    void certify_node(int ref) {
        Node& nd = nodes_[ref];
        auto& log = *s_.logger_;
        int k = nd.layer;
        const Group& g = groups_[k - 1];
        auto lhs = suffix_terms(k);

        auto rv = log.log_reification(lhs, nd.lo, nd.v);
        if (nd.lo == nd.hi) {
            // the equality proof degenerates: the backward reification of v
            // already is C_def<-
            nd.def_ids[k] = {rv.forward, rv.backward};
            nd.def_cons[k] = {rv.forward_c, rv.backward_c};
            return;
        }
        nd.vprime = s_.new_var(false); // proof-only variable
        auto rp = log.log_reification(lhs, nd.hi, nd.vprime);

        // case constraints: ~b_m + ~v' + v >= 1 per member, and
        // b_1 + ... + b_G + ~v' + v >= 1 for the else branch
        std::vector<long long> case_ids;
        std::vector<PBConstraint> case_cs;
        for (size_t mi = 0; mi < g.members.size(); ++mi) {
            case_cs.push_back(case_var_true(ref, int(mi), rv, rp));
            case_ids.push_back(log_case_var_true(ref, int(mi), rv, rp));
        }
        case_cs.push_back(case_else(ref, rv, rp));
        case_ids.push_back(log_case_else(ref, rv, rp));

        // sum the |X_k|+1 cases, divide, scale to u+1 and absorb the
        // backward reification of v' to land C_def<-(v)
        PolBuilder b;
        b.id(case_ids[0], case_cs[0]);
        for (size_t i = 1; i < case_ids.size(); ++i) b.add_id(case_ids[i], case_cs[i]);
        b.div(Coeff((long long)case_ids.size()));
        b.mul(nd.hi + Coeff(1));
        b.add_id(rp.backward, rp.backward_c);
        PBConstraint bwd_expect = reif_backward(lhs, nd.hi, nd.v);
        if (!(b.result() == bwd_expect)) throw ProofError("defining constraint assembly failed");
        long long bid = log.log_pol(b);

        nd.def_ids[k] = {rv.forward, bid};
        nd.def_cons[k] = {rv.forward_c, bwd_expect};
    }

    PBConstraint case_var_true(int ref, int mi, const ProofLogger::ReifIds&,
                               const ProofLogger::ReifIds&) const {
        const Node& nd = nodes_[ref];
        return PBConstraint::clause({~group_lit(nd.layer, mi), Lit::negative(nd.vprime),
                                     Lit::positive(nd.v)});
    }
    PBConstraint case_else(int ref, const ProofLogger::ReifIds&,
                           const ProofLogger::ReifIds&) const {
        const Node& nd = nodes_[ref];
        std::vector<Lit> lits;
        for (const auto& m : groups_[nd.layer - 1].members) lits.push_back(m.lit);
        lits.push_back(Lit::negative(nd.vprime));
        lits.push_back(Lit::positive(nd.v));
        return PBConstraint::clause(lits);
    }

    // units b >= 1 / v' >= 1 / ~v >= 1 extracted from the negated claim by
    // adding axioms for the other literals
    long long extract_unit(ProofLogger& log, long long neg_id, const PBConstraint& neg,
                           Lit keep, PBConstraint* out) {
        PolBuilder b;
        b.id(neg_id, neg);
        for (const auto& t : neg.terms())
            if (t.lit != keep) b.add_axiom(~t.lit);
        *out = PBConstraint::clause({keep});
        if (!(b.result() == *out)) throw ProofError("unit extraction failed");
        return log.log_pol(b);
    }

    long long log_case_var_true(int ref, int mi, const ProofLogger::ReifIds& rv,
                                const ProofLogger::ReifIds& rp) {
        Node& nd = nodes_[ref];
        auto& log = *s_.logger_;
        int k = nd.layer;
        const Group& g = groups_[k - 1];
        Lit bm = g.members[mi].lit;
        Coeff cm = Coeff(g.members[mi].cost);
        int child = nd.child[mi];

        auto sub = log.begin_contradiction(case_var_true(ref, mi, rv, rp));
        SubUnits u;
        u.bm = extract_unit(log, sub.negation_id, sub.negation, bm, &u.bm_c);
        u.vp = extract_unit(log, sub.negation_id, sub.negation, Lit::positive(nd.vprime), &u.vp_c);
        u.nv = extract_unit(log, sub.negation_id, sub.negation, Lit::negative(nd.v), &u.nv_c);

        long long a_id = 0;
        PBConstraint a_c;
        if (child != kTrueLeaf) {
            // from v' and b_m: suffix_{k+1} <= hi - c_m, then the child's
            // backward constraint forces v_child (or a contradiction for
            // the false leaf)
            PolBuilder b;
            b.id(u.vp, u.vp_c);
            if (suffix_total_[k] - nd.hi > Coeff(1)) b.mul(suffix_total_[k] - nd.hi);
            b.add_id(rp.forward, rp.forward_c);
            b.add_id(u.bm, u.bm_c, cm);
            for (size_t i = 0; i < g.members.size(); ++i)
                if (int(i) != mi) b.add_axiom(g.members[i].lit, Coeff(g.members[i].cost));
            if (child == kFalseLeaf) {
                for (const auto& t : suffix_terms(k + 1)) b.add_axiom(t.lit, t.coeff);
                if (!b.result().is_contradiction())
                    throw ProofError("false-leaf case did not close");
                log.log_pol(b);
                return log.end_contradiction();
            }
            Node& cn = nodes_[child];
            const auto& [cfid, cbid] = cn.def_ids.at(k + 1);
            const auto& [cfc, cbc] = cn.def_cons.at(k + 1);
            (void)cfid;
            (void)cfc;
            b.add_id(cbid, cbc);
            Coeff chi = interval_at(child, k + 1).second;
            b.div(chi + Coeff(1));
            a_c = PBConstraint::clause({Lit::positive(cn.v)});
            if (!(b.result() == a_c)) throw ProofError("caseVarTrue (A side) failed");
            a_id = log.log_pol(b);
        }

        // from ~v: suffix_k >= lo+1; the AMO silences the other group
        // literals, b_m is discharged, and the child's forward constraint
        // (or the suffix UBs for the true leaf) closes the branch
        PolBuilder b;
        b.id(u.nv, u.nv_c);
        if (nd.lo + Coeff(1) > Coeff(1)) b.mul(nd.lo + Coeff(1));
        b.add_id(rv.backward, rv.backward_c);
        if (g.members.size() >= 2) {
            for (size_t j = 0; j < g.members.size(); ++j) {
                if (int(j) == mi) continue;
                PolBuilder dj;
                dj.id(g.amo_id, g.amo_c);
                dj.add_id(u.bm, u.bm_c);
                for (size_t i = 0; i < g.members.size(); ++i)
                    if (int(i) != mi && i != j) dj.add_axiom(g.members[i].lit);
                PBConstraint dj_c = PBConstraint::clause({~g.members[j].lit});
                if (!(dj.result() == dj_c)) throw ProofError("AMO unit extraction failed");
                long long dj_id = log.log_pol(dj);
                b.add_id(dj_id, dj_c, Coeff(g.members[j].cost));
            }
        }
        b.add_axiom(~bm, cm);
        if (child == kTrueLeaf) {
            for (int j = k + 1; j <= int(groups_.size()); ++j)
                b.add_id(groups_[j - 1].ub_id, groups_[j - 1].ub_c);
            if (!b.result().is_contradiction()) throw ProofError("true-leaf case did not close");
            log.log_pol(b);
            return log.end_contradiction();
        }
        Node& cn = nodes_[child];
        const auto& [cfid, cbid] = cn.def_ids.at(k + 1);
        const auto& [cfc, cbc] = cn.def_cons.at(k + 1);
        (void)cbid;
        (void)cbc;
        b.add_id(cfid, cfc);
        Coeff clo = interval_at(child, k + 1).first;
        b.div(suffix_total_[k + 1] - clo);
        PBConstraint b_c = PBConstraint::clause({Lit::negative(cn.v)});
        if (!(b.result() == b_c)) throw ProofError("caseVarTrue (B side) failed");
        long long b_id = log.log_pol(b);

        PolBuilder fin;
        fin.id(a_id, a_c);
        fin.add_id(b_id, b_c);
        if (!fin.result().is_contradiction()) throw ProofError("caseVarTrue did not close");
        log.log_pol(fin);
        return log.end_contradiction();
    }

    long long log_case_else(int ref, const ProofLogger::ReifIds& rv,
                            const ProofLogger::ReifIds& rp) {
        Node& nd = nodes_[ref];
        auto& log = *s_.logger_;
        int k = nd.layer;
        const Group& g = groups_[k - 1];
        int els = nd.else_child;
        if (els == kFalseLeaf) throw std::logic_error("else child cannot be the false leaf");

        auto sub = log.begin_contradiction(case_else(ref, rv, rp));
        PBConstraint vp_c, nv_c;
        long long vp = extract_unit(log, sub.negation_id, sub.negation,
                                    Lit::positive(nd.vprime), &vp_c);
        long long nv = extract_unit(log, sub.negation_id, sub.negation,
                                    Lit::negative(nd.v), &nv_c);
        std::vector<long long> bj_ids(g.members.size());
        std::vector<PBConstraint> bj_cs(g.members.size());
        for (size_t j = 0; j < g.members.size(); ++j)
            bj_ids[j] = extract_unit(log, sub.negation_id, sub.negation, ~g.members[j].lit,
                                     &bj_cs[j]);

        long long a_id = 0;
        PBConstraint a_c;
        if (els != kTrueLeaf) {
            PolBuilder b;
            b.id(vp, vp_c);
            if (suffix_total_[k] - nd.hi > Coeff(1)) b.mul(suffix_total_[k] - nd.hi);
            b.add_id(rp.forward, rp.forward_c);
            for (const auto& m : g.members) b.add_axiom(m.lit, Coeff(m.cost));
            Node& en = nodes_[els];
            const auto& [efid, ebid] = en.def_ids.at(k + 1);
            const auto& [efc, ebc] = en.def_cons.at(k + 1);
            (void)efid;
            (void)efc;
            b.add_id(ebid, ebc);
            Coeff ehi = interval_at(els, k + 1).second;
            b.div(ehi + Coeff(1));
            a_c = PBConstraint::clause({Lit::positive(en.v)});
            if (!(b.result() == a_c)) throw ProofError("caseElse (A side) failed");
            a_id = log.log_pol(b);
        }

        PolBuilder b;
        b.id(nv, nv_c);
        if (nd.lo + Coeff(1) > Coeff(1)) b.mul(nd.lo + Coeff(1));
        b.add_id(rv.backward, rv.backward_c);
        for (size_t j = 0; j < g.members.size(); ++j)
            b.add_id(bj_ids[j], bj_cs[j], Coeff(g.members[j].cost));
        if (els == kTrueLeaf) {
            for (int j = k + 1; j <= int(groups_.size()); ++j)
                b.add_id(groups_[j - 1].ub_id, groups_[j - 1].ub_c);
            if (!b.result().is_contradiction()) throw ProofError("else true-leaf did not close");
            log.log_pol(b);
            return log.end_contradiction();
        }
        Node& en = nodes_[els];
        const auto& [efid, ebid] = en.def_ids.at(k + 1);
        const auto& [efc, ebc] = en.def_cons.at(k + 1);
        (void)ebid;
        (void)ebc;
        b.add_id(efid, efc);
        Coeff elo = interval_at(els, k + 1).first;
        b.div(suffix_total_[k + 1] - elo);
        PBConstraint b_c = PBConstraint::clause({Lit::negative(en.v)});
        if (!(b.result() == b_c)) throw ProofError("caseElse (B side) failed");
        long long b_id = log.log_pol(b);

        PolBuilder fin;
        fin.id(a_id, a_c);
        fin.add_id(b_id, b_c);
        if (!fin.result().is_contradiction()) throw ProofError("caseElse did not close");
        log.log_pol(fin);
        return log.end_contradiction();
    }

    // ---------------- clause emission ----------------

    void emit_clauses(int ref) {
        if (ref < 0) return;
        Node& nd = nodes_[ref];
        if (nd.emitted) return;
        nd.emitted = true;
        for (int c : nd.child) emit_clauses(c);
        emit_clauses(nd.else_child);
        int k = nd.layer;
        const Group& g = groups_[k - 1];
        for (size_t mi = 0; mi < g.members.size(); ++mi) {
            int child = nd.child[mi];
            if (child == kTrueLeaf) continue; // tautology, leaf truth value filled in
            std::vector<Lit> lits{~g.members[mi].lit};
            if (child >= 0) lits.push_back(Lit::positive(nodes_[child].v));
            lits.push_back(Lit::negative(nd.v));
            long long pid = 0;
            if (s_.logger_) pid = derive_edge_clause(ref, int(mi), child, lits);
            pending_.push_back({std::move(lits), pid});
        }
        if (nd.else_child != kTrueLeaf) {
            std::vector<Lit> lits{Lit::positive(nodes_[nd.else_child].v)};
            lits.push_back(Lit::negative(nd.v));
            long long pid = 0;
            if (s_.logger_) pid = derive_edge_clause(ref, -1, nd.else_child, lits);
            pending_.push_back({std::move(lits), pid});
        }
    }

    // clause (1)/(2): C_def->(n) + C_def<-(child), weaken the remaining
    // group literals away and divide
    long long derive_edge_clause(int ref, int mi, int child, const std::vector<Lit>& lits) {
        Node& nd = nodes_[ref];
        auto& log = *s_.logger_;
        int k = nd.layer;
        const Group& g = groups_[k - 1];
        const auto& [nfid, nbid] = nd.def_ids.at(k);
        const auto& [nfc, nbc] = nd.def_cons.at(k);
        (void)nbid;
        (void)nbc;
        PolBuilder b;
        b.id(nfid, nfc);
        if (child >= 0) {
            Node& cn = nodes_[child];
            const auto& [cfid, cbid] = cn.def_ids.at(k + 1);
            const auto& [cfc, cbc] = cn.def_cons.at(k + 1);
            (void)cfid;
            (void)cfc;
            b.add_id(cbid, cbc);
        } else {
            // false leaf: no child constraint cancels the deeper layers
            for (const auto& t : suffix_terms(k + 1)) b.add_axiom(t.lit, t.coeff);
        }
        for (size_t i = 0; i < g.members.size(); ++i)
            if (int(i) != mi) b.add_axiom(g.members[i].lit, Coeff(g.members[i].cost));
        Coeff d = std::max(b.result().max_coeff(), b.result().degree());
        if (d > Coeff(1)) b.div(d);
        if (!(b.result() == PBConstraint::clause(lits)))
            throw ProofError("encoding clause derivation failed");
        return log.log_pol(b);
    }
};

} // namespace maxbb
