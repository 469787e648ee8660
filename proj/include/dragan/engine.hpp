#pragma once

#include <memory>
#include <unordered_map>
#include <vector>

#include "dragan/kernels.hpp"
#include "dragan/params.hpp"
#include "dragan/tape.hpp"

// Model forwards are written once, templated on an engine. TapeEngine
// records every op for backward; RawEngine just computes (inference,
// beam search, benchmarking).

namespace dragan {

template <typename Real>
class TapeEngine {
public:
    using Val = Var;
    using Scalar = Real;

    explicit TapeEngine(Tape<Real>& tape) : tape_(tape) {}

    Val param(int id) {
        auto it = cache_.find(id);
        if (it != cache_.end()) return it->second;
        const Var v = tape_.parameter(id);
        cache_.emplace(id, v);
        return v;
    }

    const Tensor<Real>& value(Val v) const { return tape_.value(v); }

    Val constant(Tensor<Real> t) { return tape_.constant(std::move(t)); }
    Val embedding(Val table, std::vector<int> ids) { return tape_.embedding(table, std::move(ids)); }
    Val matmul(Val a, Val b) { return tape_.matmul(a, b); }
    Val matmul_nt(Val a, Val b) { return tape_.matmul_nt(a, b); }
    Val add(Val a, Val b) { return tape_.add(a, b); }
    Val add_bias(Val x, Val b) { return tape_.add_bias(x, b); }
    Val scale(Val a, double c) { return tape_.scale(a, c); }
    Val gelu(Val a) { return tape_.gelu(a); }
    Val layernorm(Val x, Val g, Val b) { return tape_.layernorm(x, g, b); }
    Val col_slice(Val x, int c0, int c1) { return tape_.col_slice(x, c0, c1); }
    Val concat_cols(const std::vector<Val>& parts) { return tape_.concat_cols(parts); }
    Val softmax_bounded(Val x, std::vector<int> bounds) { return tape_.softmax_bounded(x, std::move(bounds)); }
    Val log_softmax_vec(Val x) { return tape_.log_softmax_vec(x); }
    Val picked_logprob_sum(Val logits, std::vector<int> t) { return tape_.picked_logprob_sum(logits, std::move(t)); }
    Val logsumexp_vec(Val x) { return tape_.logsumexp_vec(x); }
    Val pick(Val x, int i) { return tape_.pick(x, i); }
    Val stack_scalars(const std::vector<Val>& xs) { return tape_.stack_scalars(xs); }
    Val mean_rows(Val x) { return tape_.mean_rows(x); }
    Val row(Val x, int r) { return tape_.row(x, r); }

    Tape<Real>& tape() { return tape_; }

private:
    Tape<Real>& tape_;
    std::unordered_map<int, Var> cache_;  // one leaf per parameter per tape
};

template <typename Real>
class RawEngine {
public:
    struct Val {
        std::shared_ptr<const Tensor<Real>> p;
    };
    using Scalar = Real;

    explicit RawEngine(const ParamStore<Real>& store) : store_(store) {}

    Val param(int id) {
        // non-owning alias; parameters outlive any engine use
        return Val{std::shared_ptr<const Tensor<Real>>(&store_.value(id), [](const Tensor<Real>*) {})};
    }

    const Tensor<Real>& value(Val v) const { return *v.p; }

    Val constant(Tensor<Real> t) { return own(std::move(t)); }

    Val embedding(Val table, std::vector<int> ids) {
        const int V = table.p->rows();
        for (int id : ids)
            if (id < 0 || id >= V) throw ContractError("embedding: id out of range");
        Tensor<Real> out({static_cast<int>(ids.size()), table.p->cols()});
        kern::embedding_gather(*table.p, ids, out);
        return own(std::move(out));
    }

    Val matmul(Val a, Val b) {
        Tensor<Real> out({a.p->rows(), b.p->cols()});
        kern::matmul_nn(*a.p, *b.p, out);
        return own(std::move(out));
    }

    Val matmul_nt(Val a, Val b) {
        Tensor<Real> out({a.p->rows(), b.p->rows()});
        kern::matmul_nt(*a.p, *b.p, out);
        return own(std::move(out));
    }

    Val add(Val a, Val b) {
        Tensor<Real> out = *a.p;
        kern::add_inplace(out, *b.p);
        return own(std::move(out));
    }

    Val add_bias(Val x, Val b) {
        Tensor<Real> out = *x.p;
        kern::add_bias_rows(out, *b.p);
        return own(std::move(out));
    }

    Val scale(Val a, double c) {
        Tensor<Real> out = *a.p;
        for (Real& v : out.data) v = static_cast<Real>(v * c);
        return own(std::move(out));
    }

    Val gelu(Val a) {
        Tensor<Real> out(a.p->shape);
        kern::gelu_forward(*a.p, out);
        return own(std::move(out));
    }

    Val layernorm(Val x, Val g, Val b) {
        Tensor<Real> out(x.p->shape);
        std::vector<Real> mean, rstd;
        kern::layernorm_forward(*x.p, *g.p, *b.p, out, mean, rstd);
        return own(std::move(out));
    }

    Val col_slice(Val x, int c0, int c1) {
        Tensor<Real> out({x.p->rows(), c1 - c0});
        for (int i = 0; i < x.p->rows(); ++i)
            std::copy(x.p->row_ptr(i) + c0, x.p->row_ptr(i) + c1, out.row_ptr(i));
        return own(std::move(out));
    }

    Val concat_cols(const std::vector<Val>& parts) {
        const int n = parts[0].p->rows();
        int m = 0;
        for (const Val& p : parts) m += p.p->cols();
        Tensor<Real> out({n, m});
        int off = 0;
        for (const Val& p : parts) {
            for (int i = 0; i < n; ++i)
                std::copy(p.p->row_ptr(i), p.p->row_ptr(i) + p.p->cols(), out.row_ptr(i) + off);
            off += p.p->cols();
        }
        return own(std::move(out));
    }

    Val softmax_bounded(Val x, std::vector<int> bounds) {
        Tensor<Real> out(x.p->shape);
        kern::softmax_rows_bounded(*x.p, bounds, out);
        return own(std::move(out));
    }

    Val log_softmax_vec(Val x) {
        if (x.p->rows() != 1) throw ContractError("log_softmax_vec: expected row vector");
        Tensor<Real> out(x.p->shape);
        kern::log_softmax_row(x.p->data.data(), x.p->cols(), out.data.data());
        return own(std::move(out));
    }

    Val picked_logprob_sum(Val logits, std::vector<int> targets) {
        const int n = logits.p->rows(), m = logits.p->cols();
        if (static_cast<int>(targets.size()) != n) throw ContractError("picked_logprob_sum: target count");
        std::vector<Real> lsm(m);
        double total = 0;
        for (int i = 0; i < n; ++i) {
            kern::log_softmax_row(logits.p->row_ptr(i), m, lsm.data());
            total += lsm[targets[i]];
        }
        return own(scalar_tensor(static_cast<Real>(total)));
    }

    Val logsumexp_vec(Val x) {
        if (x.p->rows() != 1) throw ContractError("logsumexp_vec: expected row vector");
        return own(scalar_tensor(static_cast<Real>(kern::logsumexp(x.p->data.data(), x.p->cols()))));
    }

    Val pick(Val x, int i) { return own(scalar_tensor(x.p->data[i])); }

    Val stack_scalars(const std::vector<Val>& xs) {
        Tensor<Real> out({1, static_cast<int>(xs.size())});
        for (std::size_t i = 0; i < xs.size(); ++i) out.data[i] = xs[i].p->data[0];
        return own(std::move(out));
    }

    Val mean_rows(Val x) {
        const int n = x.p->rows(), m = x.p->cols();
        Tensor<Real> out({1, m});
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) out.data[j] += x.p->at(i, j);
        for (int j = 0; j < m; ++j) out.data[j] = static_cast<Real>(out.data[j] / n);
        return own(std::move(out));
    }

    Val row(Val x, int r) {
        Tensor<Real> out({1, x.p->cols()});
        std::copy(x.p->row_ptr(r), x.p->row_ptr(r) + x.p->cols(), out.data.data());
        return own(std::move(out));
    }

private:
    Val own(Tensor<Real> t) { return Val{std::make_shared<Tensor<Real>>(std::move(t))}; }

    const ParamStore<Real>& store_;
};

}  // namespace dragan
