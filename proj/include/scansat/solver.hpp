#pragma once

// Incremental CDCL SAT solver: two-watched-literal propagation, first-UIP
// clause learning with basic self-subsumption minimization, VSIDS decisions,
// phase saving, Luby restarts, and assumption-based solving. Clauses are only
// ever added, never removed, so conclusions persist across incremental calls.
//
// External literals use the DIMACS convention: variables are positive
// integers returned by new_var(); a negative value is the negated literal.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include "scansat/common.hpp"

namespace scansat {

class Solver {
public:
    enum class Status { Sat, Unsat, Unknown };

    struct Stats {
        int64_t conflicts = 0;
        int64_t decisions = 0;
        int64_t propagations = 0;
        int64_t restarts = 0;
    };

    Solver()
    {
        // index 0 is unused so that vars can be used as indices directly
        assign_.push_back(kUndef);
        level_.push_back(0);
        reason_.push_back(-1);
        activity_.push_back(0.0);
        polarity_.push_back(0);
        heap_pos_.push_back(-1);
        seen_.push_back(0);
        watches_.resize(2);
    }

    int new_var()
    {
        int v = ++n_vars_;
        assign_.push_back(kUndef);
        level_.push_back(0);
        reason_.push_back(-1);
        activity_.push_back(0.0);
        polarity_.push_back(0);
        heap_pos_.push_back(-1);
        seen_.push_back(0);
        watches_.resize(2 * (n_vars_ + 1));
        heap_insert(v);
        return v;
    }

    int num_vars() const { return n_vars_; }
    int64_t num_clauses() const { return static_cast<int64_t>(clauses_.size()); }

    // Returns false iff the formula is now trivially unsatisfiable.
    bool add_clause(const std::vector<int>& lits)
    {
        if (!ok_)
            return false;
        std::vector<int> c;
        c.reserve(lits.size());
        for (int l : lits) {
            int il = to_internal(l);
            if (var_of(il) > n_vars_ || var_of(il) < 1)
                throw Error("add_clause: unknown variable " + std::to_string(var_of(il)));
            int8_t v = lit_value(il);
            if (v == 1 && level_[var_of(il)] == 0)
                return true;  // permanently satisfied
            if (v == 0 && level_[var_of(il)] == 0)
                continue;  // permanently false literal
            bool dup = false;
            for (int o : c) {
                if (o == il)
                    dup = true;
                if (o == (il ^ 1))
                    return true;  // tautology
            }
            if (!dup)
                c.push_back(il);
        }
        if (c.empty()) {
            ok_ = false;
            return false;
        }
        if (c.size() == 1) {
            if (!enqueue(c[0], -1) || propagate() != -1) {
                ok_ = false;
                return false;
            }
            return true;
        }
        attach_clause(std::move(c), false);
        return true;
    }

    // conflict_budget < 0 means unbounded; time_budget_s <= 0 means untimed.
    // On budget exhaustion returns Unknown.
    Status solve(const std::vector<int>& assumptions = {}, int64_t conflict_budget = -1,
                 double time_budget_s = -1.0)
    {
        if (!ok_)
            return Status::Unsat;
        backtrack(0);
        if (propagate() != -1) {
            ok_ = false;
            return Status::Unsat;
        }

        assumptions_.clear();
        for (int l : assumptions) {
            int il = to_internal(l);
            if (var_of(il) > n_vars_ || var_of(il) < 1)
                throw Error("solve: unknown assumption variable");
            assumptions_.push_back(il);
        }

        int64_t budget = conflict_budget < 0 ? -1 : stats.conflicts + conflict_budget;
        auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(time_budget_s));
        int64_t restart_lim = luby_base_ * luby(restart_seq_);
        int64_t conflicts_this_restart = 0;
        Status result = Status::Unknown;

        for (;;) {
            int confl = propagate();
            if (confl != -1) {
                ++stats.conflicts;
                ++conflicts_this_restart;
                if (decision_level() == 0) {
                    ok_ = false;
                    result = Status::Unsat;
                    break;
                }
                std::vector<int> learnt;
                int bt_level;
                analyze(confl, learnt, bt_level);
                backtrack(bt_level);
                if (learnt.size() == 1) {
                    if (!enqueue(learnt[0], -1)) {
                        ok_ = false;
                        result = Status::Unsat;
                        break;
                    }
                } else {
                    int cref = attach_clause(std::move(learnt), true);
                    enqueue(clauses_[cref].lits[0], cref);
                }
                decay_activity();
                if (budget >= 0 && stats.conflicts >= budget) {
                    result = Status::Unknown;
                    break;
                }
                if (time_budget_s > 0 && (stats.conflicts & 0x1ff) == 0 &&
                    std::chrono::steady_clock::now() > deadline) {
                    result = Status::Unknown;
                    break;
                }
                if (conflicts_this_restart >= restart_lim) {
                    ++stats.restarts;
                    ++restart_seq_;
                    restart_lim = luby_base_ * luby(restart_seq_);
                    conflicts_this_restart = 0;
                    backtrack(0);
                }
                continue;
            }

            if (decision_level() < static_cast<int>(assumptions_.size())) {
                int l = assumptions_[decision_level()];
                int8_t v = lit_value(l);
                if (v == 1) {
                    new_decision_level();  // dummy level keeps assumption indices aligned
                    continue;
                }
                if (v == 0) {
                    result = Status::Unsat;  // assumptions conflict with the formula
                    break;
                }
                new_decision_level();
                enqueue(l, -1);
                continue;
            }
            int next = pick_branch_var();
            if (next == 0) {
                model_.assign(assign_.begin(), assign_.end());
                result = Status::Sat;
                break;
            }
            ++stats.decisions;
            new_decision_level();
            enqueue(polarity_[next] ? 2 * next : 2 * next + 1, -1);
        }
        backtrack(0);
        return result;
    }

    // Model access; valid after solve() returned Sat.
    bool value(int var) const { return model_.at(var) == 1; }

    Stats stats;

private:
    static constexpr int8_t kUndef = -1;

    // internal literal = 2*var + (negated ? 1 : 0)
    static int var_of(int ilit) { return ilit >> 1; }
    static int to_internal(int dimacs)
    {
        return dimacs > 0 ? 2 * dimacs : 2 * (-dimacs) + 1;
    }
    int8_t lit_value(int ilit) const
    {
        int8_t v = assign_[var_of(ilit)];
        if (v == kUndef)
            return kUndef;
        return (ilit & 1) ? static_cast<int8_t>(1 - v) : v;
    }

    struct Clause {
        std::vector<int> lits;  // internal literals
        bool learnt;
    };
    struct Watcher {
        int cref;
        int blocker;
    };

    int decision_level() const { return static_cast<int>(trail_lim_.size()); }
    void new_decision_level() { trail_lim_.push_back(static_cast<int>(trail_.size())); }

    int attach_clause(std::vector<int> lits, bool learnt)
    {
        int cref = static_cast<int>(clauses_.size());
        clauses_.push_back(Clause{std::move(lits), learnt});
        auto& c = clauses_[cref].lits;
        watches_[c[0] ^ 1].push_back({cref, c[1]});
        watches_[c[1] ^ 1].push_back({cref, c[0]});
        return cref;
    }

    bool enqueue(int ilit, int reason)
    {
        int8_t v = lit_value(ilit);
        if (v != kUndef)
            return v == 1;
        int var = var_of(ilit);
        assign_[var] = (ilit & 1) ? 0 : 1;
        level_[var] = decision_level();
        reason_[var] = reason;
        trail_.push_back(ilit);
        return true;
    }

    // Returns conflicting clause ref or -1.
    int propagate()
    {
        while (qhead_ < static_cast<int>(trail_.size())) {
            int p = trail_[qhead_++];
            ++stats.propagations;
            auto& ws = watches_[p];
            size_t keep = 0;
            size_t i = 0;
            for (; i < ws.size(); ++i) {
                Watcher w = ws[i];
                if (lit_value(w.blocker) == 1) {
                    ws[keep++] = w;
                    continue;
                }
                auto& c = clauses_[w.cref].lits;
                int false_lit = p ^ 1;
                if (c[0] == false_lit)
                    std::swap(c[0], c[1]);
                if (lit_value(c[0]) == 1) {
                    ws[keep++] = {w.cref, c[0]};
                    continue;
                }
                bool moved = false;
                for (size_t k = 2; k < c.size(); ++k) {
                    if (lit_value(c[k]) != 0) {
                        std::swap(c[1], c[k]);
                        watches_[c[1] ^ 1].push_back({w.cref, c[0]});
                        moved = true;
                        break;
                    }
                }
                if (moved)
                    continue;
                ws[keep++] = {w.cref, c[0]};
                if (lit_value(c[0]) == 0) {
                    // conflict: keep the remaining watchers and bail out
                    for (size_t j = i + 1; j < ws.size(); ++j)
                        ws[keep++] = ws[j];
                    ws.resize(keep);
                    qhead_ = static_cast<int>(trail_.size());
                    return w.cref;
                }
                enqueue(c[0], w.cref);
            }
            ws.resize(keep);
        }
        return -1;
    }

    void analyze(int confl, std::vector<int>& out_learnt, int& out_btlevel)
    {
        out_learnt.clear();
        out_learnt.push_back(0);  // placeholder for the asserting literal
        to_clear_.clear();
        int path_count = 0;
        int p = -1;
        int index = static_cast<int>(trail_.size()) - 1;

        do {
            auto& c = clauses_[confl].lits;
            for (size_t j = (p == -1 ? 0 : 1); j < c.size(); ++j) {
                int q = c[j];
                int v = var_of(q);
                if (!seen_[v] && level_[v] > 0) {
                    seen_[v] = 1;
                    to_clear_.push_back(v);
                    bump_activity(v);
                    if (level_[v] >= decision_level())
                        ++path_count;
                    else
                        out_learnt.push_back(q);
                }
            }
            while (!seen_[var_of(trail_[index])])
                --index;
            p = trail_[index];
            confl = reason_[var_of(p)];
            seen_[var_of(p)] = 0;
            --index;
            --path_count;
        } while (path_count > 0);
        out_learnt[0] = p ^ 1;

        // drop literals whose reason clause is fully covered by the rest
        size_t keep = 1;
        for (size_t i = 1; i < out_learnt.size(); ++i) {
            int v = var_of(out_learnt[i]);
            int r = reason_[v];
            bool redundant = false;
            if (r != -1) {
                redundant = true;
                for (int q : clauses_[r].lits) {
                    int qv = var_of(q);
                    if (qv == v)
                        continue;
                    if (!seen_[qv] && level_[qv] > 0) {
                        redundant = false;
                        break;
                    }
                }
            }
            if (!redundant)
                out_learnt[keep++] = out_learnt[i];
        }
        out_learnt.resize(keep);

        if (out_learnt.size() == 1) {
            out_btlevel = 0;
        } else {
            size_t max_i = 1;
            for (size_t i = 2; i < out_learnt.size(); ++i)
                if (level_[var_of(out_learnt[i])] > level_[var_of(out_learnt[max_i])])
                    max_i = i;
            std::swap(out_learnt[1], out_learnt[max_i]);
            out_btlevel = level_[var_of(out_learnt[1])];
        }
        for (int v : to_clear_)
            seen_[v] = 0;
    }

    void backtrack(int target_level)
    {
        if (decision_level() <= target_level)
            return;
        int end = trail_lim_[target_level];
        for (int i = static_cast<int>(trail_.size()) - 1; i >= end; --i) {
            int v = var_of(trail_[i]);
            polarity_[v] = assign_[v];
            assign_[v] = kUndef;
            reason_[v] = -1;
            if (heap_pos_[v] == -1)
                heap_insert(v);
        }
        trail_.resize(end);
        trail_lim_.resize(target_level);
        qhead_ = static_cast<int>(trail_.size());
    }

    // -- VSIDS ---------------------------------------------------------------
    void bump_activity(int v)
    {
        activity_[v] += var_inc_;
        if (activity_[v] > 1e100) {
            for (int i = 1; i <= n_vars_; ++i)
                activity_[i] *= 1e-100;
            var_inc_ *= 1e-100;
        }
        if (heap_pos_[v] != -1)
            heap_up(heap_pos_[v]);
    }
    void decay_activity() { var_inc_ /= 0.95; }

    int pick_branch_var()
    {
        while (!heap_.empty()) {
            int v = heap_top();
            if (assign_[v] == kUndef)
                return v;
        }
        return 0;
    }

    bool heap_less(int a, int b) const { return activity_[a] > activity_[b]; }
    void heap_insert(int v)
    {
        heap_pos_[v] = static_cast<int>(heap_.size());
        heap_.push_back(v);
        heap_up(heap_pos_[v]);
    }
    void heap_up(int i)
    {
        int v = heap_[i];
        while (i > 0) {
            int parent = (i - 1) / 2;
            if (!heap_less(v, heap_[parent]))
                break;
            heap_[i] = heap_[parent];
            heap_pos_[heap_[i]] = i;
            i = parent;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }
    void heap_down(int i)
    {
        int v = heap_[i];
        int n = static_cast<int>(heap_.size());
        for (;;) {
            int l = 2 * i + 1, r = 2 * i + 2, best = -1;
            if (l < n && heap_less(heap_[l], v))
                best = l;
            if (r < n && heap_less(heap_[r], best == -1 ? v : heap_[best]))
                best = r;
            if (best == -1)
                break;
            heap_[i] = heap_[best];
            heap_pos_[heap_[i]] = i;
            i = best;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }
    int heap_top()
    {
        int top = heap_[0];
        heap_pos_[top] = -1;
        int last = heap_.back();
        heap_.pop_back();
        if (!heap_.empty()) {
            heap_[0] = last;
            heap_pos_[last] = 0;
            heap_down(0);
        }
        return top;
    }

    static int64_t luby(int64_t i)
    {
        for (;;) {
            int64_t k = 1;
            while (((int64_t(1) << (k + 1)) - 1) <= i + 1)
                ++k;
            if (i + 1 == (int64_t(1) << k) - 1)
                return int64_t(1) << (k - 1);
            i -= (int64_t(1) << k) - 1;
        }
    }

    int n_vars_ = 0;
    bool ok_ = true;
    std::vector<Clause> clauses_;
    std::vector<std::vector<Watcher>> watches_;  // indexed by internal literal
    std::vector<int8_t> assign_;                 // by var: kUndef / 0 / 1
    std::vector<int> level_;
    std::vector<int> reason_;
    std::vector<int> trail_;
    std::vector<int> trail_lim_;
    int qhead_ = 0;
    std::vector<int> assumptions_;

    std::vector<double> activity_;
    double var_inc_ = 1.0;
    std::vector<int> heap_;
    std::vector<int> heap_pos_;
    std::vector<int8_t> polarity_;
    std::vector<int8_t> seen_;
    std::vector<int> to_clear_;
    std::vector<int8_t> model_;

    int64_t restart_seq_ = 0;
    static constexpr int64_t luby_base_ = 64;
};

}  // namespace scansat
