// Minimal end-to-end usage: simulate, fit, and score one dataset.

#include <iostream>

#include "gsdr/gsdr.hpp"

int main() {
    using namespace gsdr;

    SimData sim = generate({SimCaseId::case2, 100, 10, 42});

    FitConfig cfg;
    cfg.q = 2;
    cfg.method = FitMethod::gsksir1;
    cfg.max_iters = 15;
    FitResult result = fit(sim.data, cfg);

    std::cout << "objective: " << result.objective_trace.front() << " -> "
              << result.objective_trace.back() << " in " << result.iterations
              << " iterations\n";
    std::cout << "r-bar^2 against the true predictors: "
              << multiple_correlation(sim.u_true, result.features) << "\n";
    return 0;
}
