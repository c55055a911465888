// Prints the limit spectrum of a five-term ladder and how the mode-k
// clusters close in on it.

#include <cmath>
#include <cstdio>

#include "ebm/ebm.hpp"

int main() {
    const auto model = ebm::preset_model("n5-d5");
    const auto limit = ebm::limit_roots(model);
    std::printf("limit roots:");
    for (double a : limit.roots) std::printf(" %.10f", a);
    std::printf("\n\n   k   a_1^k - a_1     p^k            q^k / (2k-1)\n");

    for (int k : {1, 2, 5, 10, 50, 200}) {
        const auto cl = ebm::cluster_roots(model, ebm::ModeIndex(k), limit);
        if (cl.has_complex_pair())
            std::printf("%4d   %12.4e   %12.8f   %12.8f\n", k, cl.real_roots[0] - limit.roots[0], cl.pair().re,
                        cl.pair().im / cl.k.wavenumber());
        else
            std::printf("%4d   %12.4e   (real pair)\n", k, cl.real_roots[0] - limit.roots[0]);
    }
    std::printf("\nsqrt(D) = %.8f, -sum b / 2D = %.8f\n", std::sqrt(model.modulus()),
                -model.weight_sum() / (2.0 * model.modulus()));
}
