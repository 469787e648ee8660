#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "dragan/errors.hpp"
#include "dragan/rng.hpp"
#include "dragan/tensor.hpp"

namespace dragan {

enum class ParamGroup { generator, classifier };

// Flat named parameter collection with per-tensor gradient buffers.
// Group membership is fixed once a tensor is added.
template <typename Real>
class ParamStore {
public:
    struct Entry {
        std::string name;
        ParamGroup group;
        Tensor<Real> value;
        Tensor<Real> grad;
    };

    int add(const std::string& name, std::vector<int> shape, ParamGroup group) {
        if (by_name_.count(name)) throw ContractError("param already exists: " + name);
        Entry e;
        e.name = name;
        e.group = group;
        e.value = Tensor<Real>(shape);
        e.grad = Tensor<Real>(std::move(shape));
        entries_.push_back(std::move(e));
        const int id = static_cast<int>(entries_.size()) - 1;
        by_name_[name] = id;
        return id;
    }

    int add_normal(const std::string& name, std::vector<int> shape, ParamGroup group, Rng& rng,
                   double stddev = 0.02) {
        const int id = add(name, std::move(shape), group);
        for (Real& v : entries_[id].value.data) v = static_cast<Real>(rng.normal(0.0, stddev));
        return id;
    }

    int add_const(const std::string& name, std::vector<int> shape, ParamGroup group, Real fill) {
        const int id = add(name, std::move(shape), group);
        std::fill(entries_[id].value.data.begin(), entries_[id].value.data.end(), fill);
        return id;
    }

    int id_of(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) throw ContractError("unknown param: " + name);
        return it->second;
    }

    bool has(const std::string& name) const { return by_name_.count(name) != 0; }

    int size() const { return static_cast<int>(entries_.size()); }

    Entry& entry(int id) { return entries_[id]; }
    const Entry& entry(int id) const { return entries_[id]; }

    Tensor<Real>& value(int id) { return entries_[id].value; }
    const Tensor<Real>& value(int id) const { return entries_[id].value; }
    Tensor<Real>& grad(int id) { return entries_[id].grad; }
    const Tensor<Real>& grad(int id) const { return entries_[id].grad; }

    void zero_grads() {
        for (auto& e : entries_) e.grad.zero();
    }

    long long num_scalars() const {
        long long n = 0;
        for (const auto& e : entries_) n += e.value.numel();
        return n;
    }

    std::vector<int> ids_in_group(ParamGroup g) const {
        std::vector<int> out;
        for (int i = 0; i < size(); ++i)
            if (entries_[i].group == g) out.push_back(i);
        return out;
    }

    // Copies values (not grads) into another precision; used by the 64-bit
    // gradient-check path.
    template <typename Other>
    void copy_values_to(ParamStore<Other>& dst) const {
        for (int i = 0; i < size(); ++i) {
            const auto& e = entries_[i];
            if (!dst.has(e.name)) throw ContractError("copy_values_to: missing param " + e.name);
            auto& dv = dst.value(dst.id_of(e.name));
            if (dv.shape != e.value.shape) throw ContractError("copy_values_to: shape mismatch " + e.name);
            for (std::size_t j = 0; j < dv.data.size(); ++j)
                dv.data[j] = static_cast<Other>(e.value.data[j]);
        }
    }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, int> by_name_;
};

}  // namespace dragan
