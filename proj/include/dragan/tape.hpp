#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "dragan/kernels.hpp"
#include "dragan/params.hpp"
#include "dragan/tensor.hpp"

namespace dragan {

// Handle into a Tape's node table.
struct Var {
    int id = -1;
};

// Reverse-mode computation record. Nodes are appended in evaluation order,
// which is already topological, so backward() is a single reverse sweep that
// visits each record at most once. Single-writer; parallel evaluation uses
// one Tape per example.
template <typename Real>
class Tape {
public:
    explicit Tape(const ParamStore<Real>* store = nullptr) : store_(store) {}

    const Tensor<Real>& value(Var v) const { return nodes_[v.id].value; }
    Tensor<Real>& grad_of(Var v) { return ensure_grad(v.id); }
    bool has_grad(Var v) const { return !nodes_[v.id].grad.data.empty(); }

    std::size_t num_nodes() const { return nodes_.size(); }

    // ---- leaves ----

    Var parameter(int param_id) {
        if (!store_) throw ContractError("tape: no param store bound");
        Var v = push(store_->value(param_id));
        nodes_[v.id].param_id = param_id;
        return v;
    }

    Var constant(Tensor<Real> t) { return push(std::move(t)); }

    Var scalar(double x) { return push(scalar_tensor(static_cast<Real>(x))); }

    // ---- ops ----

    Var matmul(Var a, Var b) {
        check_cols(a, nodes_[b.id].value.rows(), "matmul");
        Tensor<Real> out({nodes_[a.id].value.rows(), nodes_[b.id].value.cols()});
        kern::matmul_nn(nodes_[a.id].value, nodes_[b.id].value, out);
        return push(std::move(out), [a, b](Tape& t, int self) {
            const Tensor<Real>& g = t.nodes_[self].grad;
            // dA += g * B^T ; dB += A^T * g
            kern::matmul_nt(g, t.nodes_[b.id].value, t.ensure_grad(a.id), true);
            kern::matmul_tn(t.nodes_[a.id].value, g, t.ensure_grad(b.id), true);
        });
    }

    // A[n,k] * B[m,k]^T
    Var matmul_nt(Var a, Var b) {
        check_cols(a, nodes_[b.id].value.cols(), "matmul_nt");
        Tensor<Real> out({nodes_[a.id].value.rows(), nodes_[b.id].value.rows()});
        kern::matmul_nt(nodes_[a.id].value, nodes_[b.id].value, out);
        return push(std::move(out), [a, b](Tape& t, int self) {
            const Tensor<Real>& g = t.nodes_[self].grad;
            // dA += g * B ; dB += g^T * A
            kern::matmul_nn(g, t.nodes_[b.id].value, t.ensure_grad(a.id), true);
            kern::matmul_tn(g, t.nodes_[a.id].value, t.ensure_grad(b.id), true);
        });
    }

    Var add(Var a, Var b) {
        if (!nodes_[a.id].value.same_shape(nodes_[b.id].value)) throw ContractError("add: shape mismatch");
        Tensor<Real> out = nodes_[a.id].value;
        kern::add_inplace(out, nodes_[b.id].value);
        return push(std::move(out), [a, b](Tape& t, int self) {
            const Tensor<Real>& g = t.nodes_[self].grad;
            kern::add_inplace(t.ensure_grad(a.id), g);
            kern::add_inplace(t.ensure_grad(b.id), g);
        });
    }

    Var sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

    // X[n,m] + bias[1,m] broadcast over rows
    Var add_bias(Var x, Var bias) {
        Tensor<Real> out = nodes_[x.id].value;
        kern::add_bias_rows(out, nodes_[bias.id].value);
        return push(std::move(out), [x, bias](Tape& t, int self) {
            const Tensor<Real>& g = t.nodes_[self].grad;
            kern::add_inplace(t.ensure_grad(x.id), g);
            Tensor<Real>& db = t.ensure_grad(bias.id);
            const int n = g.rows(), m = g.cols();
            for (int i = 0; i < n; ++i) {
                const Real* gp = g.row_ptr(i);
                for (int j = 0; j < m; ++j) db.data[j] += gp[j];
            }
        });
    }

    Var scale(Var a, double c) {
        Tensor<Real> out = nodes_[a.id].value;
        for (Real& v : out.data) v = static_cast<Real>(v * c);
        return push(std::move(out), [a, c](Tape& t, int self) {
            kern::add_inplace(t.ensure_grad(a.id), t.nodes_[self].grad, static_cast<Real>(c));
        });
    }

    Var gelu(Var a) {
        Tensor<Real> out(nodes_[a.id].value.shape);
        kern::gelu_forward(nodes_[a.id].value, out);
        return push(std::move(out), [a](Tape& t, int self) {
            kern::gelu_backward(t.nodes_[a.id].value, t.nodes_[self].grad, t.ensure_grad(a.id));
        });
    }

    Var layernorm(Var x, Var gamma, Var beta) {
        Tensor<Real> out(nodes_[x.id].value.shape);
        auto mean = std::make_shared<std::vector<Real>>();
        auto rstd = std::make_shared<std::vector<Real>>();
        kern::layernorm_forward(nodes_[x.id].value, nodes_[gamma.id].value, nodes_[beta.id].value, out,
                                *mean, *rstd);
        return push(std::move(out), [x, gamma, beta, mean, rstd](Tape& t, int self) {
            kern::layernorm_backward(t.nodes_[x.id].value, t.nodes_[gamma.id].value, *mean, *rstd,
                                     t.nodes_[self].grad, t.ensure_grad(x.id), t.ensure_grad(gamma.id),
                                     t.ensure_grad(beta.id));
        });
    }

    Var embedding(Var table, std::vector<int> ids) {
        const int V = nodes_[table.id].value.rows();
        for (int id : ids)
            if (id < 0 || id >= V) throw ContractError("embedding: id out of range");
        Tensor<Real> out({static_cast<int>(ids.size()), nodes_[table.id].value.cols()});
        kern::embedding_gather(nodes_[table.id].value, ids, out);
        return push(std::move(out), [table, ids = std::move(ids)](Tape& t, int self) {
            kern::embedding_scatter_add(t.ensure_grad(table.id), ids, t.nodes_[self].grad);
        });
    }

    Var col_slice(Var x, int c0, int c1) {
        const auto& xv = nodes_[x.id].value;
        const int n = xv.rows();
        Tensor<Real> out({n, c1 - c0});
        for (int i = 0; i < n; ++i)
            std::copy(xv.row_ptr(i) + c0, xv.row_ptr(i) + c1, out.row_ptr(i));
        return push(std::move(out), [x, c0, c1](Tape& t, int self) {
            const Tensor<Real>& g = t.nodes_[self].grad;
            Tensor<Real>& dx = t.ensure_grad(x.id);
            for (int i = 0; i < g.rows(); ++i) {
                const Real* gp = g.row_ptr(i);
                Real* dp = dx.row_ptr(i) + c0;
                for (int j = 0; j < g.cols(); ++j) dp[j] += gp[j];
            }
        });
    }

    Var concat_cols(const std::vector<Var>& parts) {
        const int n = nodes_[parts[0].id].value.rows();
        int m = 0;
        for (Var p : parts) m += nodes_[p.id].value.cols();
        Tensor<Real> out({n, m});
        int off = 0;
        for (Var p : parts) {
            const auto& pv = nodes_[p.id].value;
            for (int i = 0; i < n; ++i)
                std::copy(pv.row_ptr(i), pv.row_ptr(i) + pv.cols(), out.row_ptr(i) + off);
            off += pv.cols();
        }
        return push(std::move(out), [parts](Tape& t, int self) {
            const Tensor<Real>& g = t.nodes_[self].grad;
            int off = 0;
            for (Var p : parts) {
                Tensor<Real>& dp = t.ensure_grad(p.id);
                for (int i = 0; i < g.rows(); ++i) {
                    const Real* gp = g.row_ptr(i) + off;
                    Real* d = dp.row_ptr(i);
                    for (int j = 0; j < dp.cols(); ++j) d[j] += gp[j];
                }
                off += dp.cols();
            }
        });
    }

    // Softmax per row over [0, bounds[i]); rest exact zero.
    Var softmax_bounded(Var x, std::vector<int> bounds) {
        Tensor<Real> out(nodes_[x.id].value.shape);
        kern::softmax_rows_bounded(nodes_[x.id].value, bounds, out);
        return push(std::move(out), [x, bounds = std::move(bounds)](Tape& t, int self) {
            kern::softmax_rows_bounded_backward(t.nodes_[self].value, bounds, t.nodes_[self].grad,
                                                t.ensure_grad(x.id));
        });
    }

    // Row vector [1,m] -> log softmax [1,m]
    Var log_softmax_vec(Var x) {
        const auto& xv = nodes_[x.id].value;
        if (xv.rows() != 1) throw ContractError("log_softmax_vec: expected row vector");
        Tensor<Real> out(xv.shape);
        kern::log_softmax_row(xv.data.data(), xv.cols(), out.data.data());
        return push(std::move(out), [x](Tape& t, int self) {
            const Tensor<Real>& y = t.nodes_[self].value;
            const Tensor<Real>& g = t.nodes_[self].grad;
            Tensor<Real>& dx = t.ensure_grad(x.id);
            const int m = y.cols();
            double gsum = 0;
            for (int j = 0; j < m; ++j) gsum += g.data[j];
            for (int j = 0; j < m; ++j)
                dx.data[j] += static_cast<Real>(g.data[j] - std::exp(static_cast<double>(y.data[j])) * gsum);
        });
    }

    // Sum over rows of log softmax(logits)[target]; the teacher-forcing
    // sequence log-likelihood in one op.
    Var picked_logprob_sum(Var logits, std::vector<int> targets) {
        const auto& lv = nodes_[logits.id].value;
        const int n = lv.rows(), m = lv.cols();
        if (static_cast<int>(targets.size()) != n) throw ContractError("picked_logprob_sum: target count");
        Tensor<Real> lsm({n, m});
        double total = 0;
        for (int i = 0; i < n; ++i) {
            kern::log_softmax_row(lv.row_ptr(i), m, lsm.row_ptr(i));
            total += lsm.at(i, targets[i]);
        }
        auto saved = std::make_shared<Tensor<Real>>(std::move(lsm));
        return push(scalar_tensor(static_cast<Real>(total)),
                    [logits, targets = std::move(targets), saved](Tape& t, int self) {
                        const Real g = t.nodes_[self].grad.data[0];
                        Tensor<Real>& dx = t.ensure_grad(logits.id);
                        const int n = saved->rows(), m = saved->cols();
                        for (int i = 0; i < n; ++i) {
                            const Real* ls = saved->row_ptr(i);
                            Real* d = dx.row_ptr(i);
                            for (int j = 0; j < m; ++j)
                                d[j] -= g * static_cast<Real>(std::exp(static_cast<double>(ls[j])));
                            d[targets[i]] += g;
                        }
                    });
    }

    // Row vector [1,m] -> scalar log sum exp (max-subtracted)
    Var logsumexp_vec(Var x) {
        const auto& xv = nodes_[x.id].value;
        if (xv.rows() != 1) throw ContractError("logsumexp_vec: expected row vector");
        const double lse = kern::logsumexp(xv.data.data(), xv.cols());
        return push(scalar_tensor(static_cast<Real>(lse)), [x, lse](Tape& t, int self) {
            const Real g = t.nodes_[self].grad.data[0];
            const Tensor<Real>& xvv = t.nodes_[x.id].value;
            Tensor<Real>& dx = t.ensure_grad(x.id);
            for (int j = 0; j < xvv.cols(); ++j)
                dx.data[j] += g * static_cast<Real>(std::exp(static_cast<double>(xvv.data[j]) - lse));
        });
    }

    Var pick(Var x, int index) {
        const auto& xv = nodes_[x.id].value;
        if (xv.rows() != 1) throw ContractError("pick: expected row vector");
        return push(scalar_tensor(xv.data[index]), [x, index](Tape& t, int self) {
            t.ensure_grad(x.id).data[index] += t.nodes_[self].grad.data[0];
        });
    }

    Var stack_scalars(const std::vector<Var>& xs) {
        Tensor<Real> out({1, static_cast<int>(xs.size())});
        for (std::size_t i = 0; i < xs.size(); ++i) out.data[i] = nodes_[xs[i].id].value.data[0];
        return push(std::move(out), [xs](Tape& t, int self) {
            const Tensor<Real>& g = t.nodes_[self].grad;
            for (std::size_t i = 0; i < xs.size(); ++i)
                t.ensure_grad(xs[i].id).data[0] += g.data[i];
        });
    }

    Var mean_rows(Var x) {
        const auto& xv = nodes_[x.id].value;
        const int n = xv.rows(), m = xv.cols();
        Tensor<Real> out({1, m});
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) out.data[j] += xv.at(i, j);
        for (int j = 0; j < m; ++j) out.data[j] = static_cast<Real>(out.data[j] / n);
        return push(std::move(out), [x, n](Tape& t, int self) {
            const Tensor<Real>& g = t.nodes_[self].grad;
            Tensor<Real>& dx = t.ensure_grad(x.id);
            const Real inv = static_cast<Real>(1.0 / n);
            for (int i = 0; i < dx.rows(); ++i) {
                Real* d = dx.row_ptr(i);
                for (int j = 0; j < dx.cols(); ++j) d[j] += g.data[j] * inv;
            }
        });
    }

    Var row(Var x, int r) {
        const auto& xv = nodes_[x.id].value;
        Tensor<Real> out({1, xv.cols()});
        std::copy(xv.row_ptr(r), xv.row_ptr(r) + xv.cols(), out.data.data());
        return push(std::move(out), [x, r](Tape& t, int self) {
            const Tensor<Real>& g = t.nodes_[self].grad;
            Real* d = t.ensure_grad(x.id).row_ptr(r);
            for (int j = 0; j < g.cols(); ++j) d[j] += g.data[j];
        });
    }

    Var sum_all(Var x) {
        const auto& xv = nodes_[x.id].value;
        double s = 0;
        for (Real v : xv.data) s += v;
        return push(scalar_tensor(static_cast<Real>(s)), [x](Tape& t, int self) {
            const Real g = t.nodes_[self].grad.data[0];
            for (Real& d : t.ensure_grad(x.id).data) d += g;
        });
    }

    // ---- backward ----

    // Reverse sweep from a scalar output. `seed` is the upstream gradient
    // (1/batch for mean losses). Parameters touched by no op keep exact zero.
    void backward(Var out, double seed = 1.0) {
        const auto& ov = nodes_[out.id].value;
        if (ov.numel() != 1) throw ContractError("backward: output must be scalar");
        ensure_grad(out.id).data[0] = static_cast<Real>(seed);
        for (int id = out.id; id >= 0; --id) {
            Node& n = nodes_[id];
            if (n.grad.data.empty() || !n.backward) continue;
            n.backward(*this, id);
        }
    }

    // Adds parameter-leaf gradients into the store's grad buffers, in node
    // order (deterministic).
    void flush_param_grads(ParamStore<Real>& store) {
        for (std::size_t id = 0; id < nodes_.size(); ++id) {
            Node& n = nodes_[id];
            if (n.param_id < 0 || n.grad.data.empty()) continue;
            kern::add_inplace(store.grad(n.param_id), n.grad);
        }
    }

private:
    struct Node {
        Tensor<Real> value;
        Tensor<Real> grad;
        std::function<void(Tape&, int)> backward;
        int param_id = -1;
    };

    Tensor<Real>& ensure_grad(int id) {
        Node& n = nodes_[id];
        if (n.grad.data.empty()) n.grad = Tensor<Real>(n.value.shape);
        return n.grad;
    }

    Var push(Tensor<Real> value, std::function<void(Tape&, int)> bw = nullptr) {
        Node n;
        n.value = std::move(value);
        n.backward = std::move(bw);
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    void check_cols(Var a, int expected_rows_of_b, const char* op) {
        if (nodes_[a.id].value.cols() != expected_rows_of_b)
            throw ContractError(std::string(op) + ": inner dimension mismatch");
    }

    std::vector<Node> nodes_;
    const ParamStore<Real>* store_;
};

}  // namespace dragan
