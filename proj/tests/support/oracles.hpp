#pragma once

// Test-only reference computations, deliberately independent of the library
// root finders: long-double arithmetic, dense sign scans and reference
// values computed offline with 60-digit polynomial root finding.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "ebm/prony_model.hpp"

namespace oracle {

using ld = long double;

/// D + c x^2 - sum b_i / (x + r_i) in long double.
inline ld secular(const ebm::PronyModel& m, ld c, ld x) {
    ld f = static_cast<ld>(m.modulus()) + c * x * x;
    for (std::size_t i = 0; i < m.size(); ++i) f -= static_cast<ld>(m.weight(i)) / (x + static_cast<ld>(m.rate(i)));
    return f;
}

/// Sign changes of f on a uniform grid over (lo, hi); returns the midpoints
/// of the cells where the sign flips from negative to non-negative.
inline std::vector<ld> sign_scan(const std::function<ld(ld)>& f, ld lo, ld hi, std::size_t points) {
    std::vector<ld> out;
    ld prev_x = lo, prev = f(lo);
    for (std::size_t i = 1; i <= points; ++i) {
        const ld x = lo + (hi - lo) * static_cast<ld>(i) / static_cast<ld>(points);
        const ld v = f(x);
        if ((prev < 0) != (v < 0)) out.push_back(0.5L * (prev_x + x));
        prev_x = x;
        prev = v;
    }
    return out;
}

/// Plain bisection to the long-double resolution.
inline ld bisect(const std::function<ld(ld)>& f, ld lo, ld hi) {
    const bool rising = f(lo) < 0;
    for (int i = 0; i < 200; ++i) {
        const ld mid = 0.5L * (lo + hi);
        if (mid == lo || mid == hi) break;
        if ((f(mid) < 0) == rising) lo = mid;
        else hi = mid;
    }
    return 0.5L * (lo + hi);
}

/// Central difference with step h.
inline double central_difference(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// ---------------------------------------------------------------------------
// Reference roots (60-digit polynomial root finding on the exact
// coefficients), sorted by real part descending; a conjugate pair is given
// once as (p, q) with q > 0.

struct ReferenceCluster {
    const char* preset;
    int k;  // 0 for the limit polynomial
    std::vector<double> real_roots;  // all real roots, descending
    double p = 0.0, q = 0.0;         // conjugate pair when q > 0
};

inline const std::vector<ReferenceCluster>& reference_clusters() {
    static const std::vector<ReferenceCluster> table = {
        {"toy", 1, {-0.56984029099805326591}, -0.21507985450097336704, 1.3071412786820454805},
        {"toy", 0, {-0.5}},
        {"n5-d1", 0, {0.0, -6.7778356592086570785, -12.280438720488309846, -17.719561279511690154, -23.222164340791342921}},
        {"n5-d1", 1, {0.0, -0.092432096315310779309, -4.9589837349559038864, -9.9798933132636650493, -14.986655031573527276, -19.990011753060206871, -24.992024070831386138}},
        {"n5-d1", 10, {0.0, -7.0165749872923016816, -12.764638881589150039, -18.33108404650999901, -23.798384379971248695}, -6.544658852318650287, 16.541239233098772441},
        {"n5-d1", 100, {0.0, -6.7797992588242396508, -12.284640008815696306, -17.725617527132435224, -23.228872495878684817}, -7.4905353546744720014, 198.73332927831126546},
        {"n5-d0.5", 0, {13.137905492234051413, -6.1066989951328825077, -11.755476288497875849, -17.323151799857154275, -22.952578408746138781}},
        {"n5-d0.5", 1, {0.6662194607771456984, -0.75967598465225469436, -4.9581099683150974613, -9.9797913218746824933, -14.986625231318317082, -19.98999925444950072, -24.992017700167293247}},
        {"n5-d0.5", 100, {12.901802258171880746, -6.1076221039907312636, -11.758826107655732498, -17.329254200380347061, -22.960330058811570991}, -14.872884893666749466, 141.13453645082003551},
        {"n5-d5", 1, {-4.9648355764147394344, -9.9806734896115220403, -14.986888728698509116, -19.990110627333127469, -24.99207467216084174}, -0.042708452890630100583, 2.01025330608297222},
        {"n5-d5", 100, {-4.738169474295210581, -9.4969982606504073866, -14.318710687756461553, -19.222048990521751768, -24.228217672911013067}, -1.4979274569325778218, 444.92339226771503376},
        {"n9-d0.5", 0, {21.141166547068328859, -5.7247968215901599314, -11.179831422023538824, -16.546244952829044941, -21.872382348067993696, -27.18314197277012233, -32.498622450254620077, -37.845726883969460496, -43.290419695563388564}},
        {"n9-d0.5", 1, {0.67838490147018524371, -0.74225036386676907363, -4.9769298363037106988, -9.9887805684301601214, -14.992561943627003853, -19.994433170528462837, -24.995551214243739707, -29.996295020895457345, -34.996825731348706596, -39.997223620863063162, -44.99753343136311185}},
        {"n9-d0.5", 10, {8.4130013142796236747, -5.813099079619423039, -11.660899779527633972, -17.622522950880299281, -23.326028616198874846, -28.748552109458310396, -34.017149224334448452, -39.208537402501609767, -44.371478585978202579}, -14.322366782890410672, 10.752855650179976742},
        {"n9-d5", 10, {-4.8570997941238779924, -9.7262299816370274204, -14.626449139334500748, -19.562857744648394197, -24.53114554445202028, -29.523727643375233653, -34.533798668347489103, -39.557500535642491902, -44.59820942529455929}, -1.7414907615722027071, 41.386603777629416328},
        {"n9-d5", 100, {-4.8546876271425345218, -9.7077170519087656662, -14.571033042544432002, -19.452775010603926035, -24.357962285234015343, -29.289472624179478032, -34.249771335032895037, -39.244208454163503163, -44.293315993481073947}, -2.4895282878546881267, 444.82140507890067917},
    };
    return table;
}

/// G(0.1) for r = (5, 10), b = (2.5, 5), summed at 60 digits.
inline constexpr double relaxation_n2_at_0_1 = 0.4872050504420378726;

/// k0 of the worked N = 2 model with mu = 12.5/121, R = 31 at 60 digits.
inline constexpr double worked_k0 = 27386.401433424149482;

}  // namespace oracle
