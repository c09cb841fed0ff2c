// Times the serial and OpenMP row checkers on the same sampled inputs.
#include <chrono>
#include <cstdio>

#include <CLI11.hpp>
#include <omp.h>

#include "atr/stdlib.hpp"
#include "atr/verify.hpp"

using namespace atr;

namespace {

template <class F>
double best_of(int reps, F&& f) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs parallel bound verification"};
    std::string program = "ins_sort";
    std::size_t samples = 400;
    int reps = 3;
    app.add_option("program", program, "stdlib program name");
    app.add_option("--samples", samples);
    app.add_option("--reps", reps);
    CLI11_PARSE(app, argc, argv);

    auto b = infer_bound(load_program(program));
    if (!b.supported) {
        std::printf("%s: unsupported bound\n", program.c_str());
        return 3;
    }
    VerifyConfig cfg;
    cfg.samples = samples;
    cfg.seed = 99;
    auto inputs = sample_inputs(cfg, main_arity(b.term));

    std::vector<BoundRow> s, p;
    double ts = best_of(reps, [&] { s = verify_rows_serial(b, inputs, {}, {}); });
    double tp = best_of(reps, [&] { p = verify_rows_parallel(b, inputs, {}, {}); });
    bool same = s.size() == p.size();
    for (std::size_t i = 0; same && i < s.size(); ++i)
        same = s[i].cost == p[i].cost && s[i].ok() == p[i].ok();
    std::printf("program=%s rows=%zu threads=%d serial=%.3fs parallel=%.3fs speedup=%.2f rows_agree=%s\n",
                program.c_str(), inputs.size(), omp_get_max_threads(), ts, tp, ts / tp, same ? "yes" : "no");
    return same ? 0 : 1;
}
