// Recovers D, r and b of a nine-term model from its k = 3 and k = 7
// clusters, then from slightly noisy copies.

#include <cstdio>

#include "ebm/ebm.hpp"

int main() {
    const auto truth = ebm::preset_model("n9-d0.5");
    const auto a = ebm::observe(ebm::cluster_roots(truth, ebm::ModeIndex(3)));
    const auto b = ebm::observe(ebm::cluster_roots(truth, ebm::ModeIndex(7)));
    const auto rec = ebm::recover_model(a, b);

    std::printf("D = %.15g (true %.15g)\n", rec.modulus, truth.modulus());
    for (std::size_t i = 0; i < truth.size(); ++i)
        std::printf("r_%zu = %-20.15g b_%zu = %.15g\n", i + 1, rec.model.rate(i), i + 1, rec.model.weight(i));
    std::printf("lambda^2 residual %.2e, forward distance %.2e\n", rec.diagnostics.lambda2_residual,
                rec.diagnostics.forward_distance);

    for (double noise : {1e-12, 1e-9, 1e-6}) {
        const auto t = ebm::perturbation_study(truth, ebm::ModeIndex(3), ebm::ModeIndex(7), noise, 32, 1);
        std::printf("noise %.0e: %zu/32 failed, max rel error r %.2e b %.2e D %.2e\n", noise, t.failures,
                    t.max_rate_error, t.max_weight_error, t.max_modulus_error);
    }
}
