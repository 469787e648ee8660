#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dragan/params.hpp"

namespace dragan {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    long long worst_index = -1;
    double worst_ad = 0.0;
    double worst_fd = 0.0;

    struct PerParam {
        std::string name;
        double max_rel_err;
        double max_ad_abs;
        double max_fd_abs;
    };
    std::vector<PerParam> per_param;
};

// Central-difference check of a scalar loss against tape gradients.
//   eval:          loss value only (must not touch grads)
//   loss_and_grad: zeroes grads, runs backward, returns the same loss
// Relative error uses a small denominator floor so near-zero gradient pairs
// compare absolutely. Aborts if eval() is not deterministic.
template <typename Real>
GradCheckReport grad_check(const std::function<double(ParamStore<Real>&)>& eval,
                           const std::function<double(ParamStore<Real>&)>& loss_and_grad,
                           ParamStore<Real>& params, double eps = 1e-5, double denom_floor = 1e-6) {
    static_assert(sizeof(Real) == 8, "finite differences are unreliable in 32-bit; use double");
    {
        const double l1 = eval(params);
        const double l2 = eval(params);
        if (l1 != l2)
            throw ContractError("grad_check aborted: eval() is nondeterministic under fixed state (" +
                                std::to_string(l1) + " vs " + std::to_string(l2) + ")");
    }

    loss_and_grad(params);
    // snapshot analytic grads; FD evals below may clobber them
    std::vector<Tensor<Real>> ad(params.size());
    for (int p = 0; p < params.size(); ++p) ad[p] = params.grad(p);

    GradCheckReport rep;
    for (int p = 0; p < params.size(); ++p) {
        auto& val = params.value(p);
        GradCheckReport::PerParam pp{params.entry(p).name, 0.0, 0.0, 0.0};
        for (long long i = 0; i < val.numel(); ++i) {
            const Real saved = val.data[i];
            val.data[i] = saved + static_cast<Real>(eps);
            const double fp = eval(params);
            val.data[i] = saved - static_cast<Real>(eps);
            const double fm = eval(params);
            val.data[i] = saved;
            const double fd = (fp - fm) / (2.0 * eps);
            const double a = static_cast<double>(ad[p].data[i]);
            const double rel = std::fabs(a - fd) / std::max({std::fabs(a), std::fabs(fd), denom_floor});
            pp.max_rel_err = std::max(pp.max_rel_err, rel);
            pp.max_ad_abs = std::max(pp.max_ad_abs, std::fabs(a));
            pp.max_fd_abs = std::max(pp.max_fd_abs, std::fabs(fd));
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst_param = pp.name;
                rep.worst_index = i;
                rep.worst_ad = a;
                rep.worst_fd = fd;
            }
        }
        rep.per_param.push_back(pp);
    }
    // restore analytic grads so callers can inspect them after the check
    for (int p = 0; p < params.size(); ++p) params.grad(p) = ad[p];
    return rep;
}

}  // namespace dragan
