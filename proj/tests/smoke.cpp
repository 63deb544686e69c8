// Compilation smoke test: pulls in every public header and exercises one
// cheap code path from each module.
#include <cstdio>

#include "bpinn/compiler.hpp"
#include "bpinn/experiments.hpp"
#include "bpinn/gadgets.hpp"
#include "bpinn/jet.hpp"
#include "bpinn/network.hpp"
#include "bpinn/pde.hpp"
#include "bpinn/posterior.hpp"
#include "bpinn/prior.hpp"
#include "bpinn/spline.hpp"

int main() {
    using namespace bpinn;
    const GadgetCoefficients g = derive_gadgets();
    (void)g;
    const EllipticProblem p = make_sin1d();
    validate_problem(p, 9);
    std::mt19937_64 rng(1);
    PriorConfig prior;
    const NetworkParams net = sample_prior(prior, 1, rng);
    if (!net.valid()) {
        std::puts("smoke: invalid prior draw");
        return 1;
    }
    const Dataset data = generate_dataset(p, 4, 1);
    (void)log_likelihood(net, data, p);
    std::puts("smoke: ok");
    return 0;
}
