#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "ptawcet/explorer.hpp"
#include "ptawcet/model.hpp"

using ptawcet::Pta;
using ptawcet::SimStats;

namespace {

Pta load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return ptawcet::parse_model(os.str());
}

// Wall time of one call, in milliseconds.
template <typename F>
double timed(F&& f, SimStats& out) {
    auto t0 = std::chrono::steady_clock::now();
    out = f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

// Benchmarks the parallel simulator against the serial reference on one
// model.  The two must agree bit for bit: each trial owns an RNG stream and
// the reduction is replayed sequentially, so threading must not show up in
// the statistics at all.
int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: bench_simulate <model.pta> [trials] [seed]\n";
        return 1;
    }
    std::string path = argv[1];
    std::int64_t trials = argc > 2 ? std::atoll(argv[2]) : 200000;
    std::uint64_t seed = argc > 3 ? static_cast<std::uint64_t>(std::atoll(argv[3])) : 0;

    try {
        Pta pta = load_model(path);

        SimStats serial;
        SimStats parallel;
        // Parallel first so its thread pool spin-up is not billed to serial.
        double par_ms = timed([&] { return ptawcet::simulate(pta, trials, seed); }, parallel);
        double ser_ms = timed([&] { return ptawcet::simulate_serial(pta, trials, seed); }, serial);

        std::cout.precision(15);
        std::cout << "model: " << pta.name << "  trials: " << trials << "  seed: " << seed
                  << "\n"
                  << "serial:    " << ser_ms << " ms  mean " << serial.mean << "  std err "
                  << serial.std_err << "\n"
                  << "parallel:  " << par_ms << " ms  mean " << parallel.mean << "  std err "
                  << parallel.std_err << "\n"
                  << "speedup:   " << (par_ms > 0.0 ? ser_ms / par_ms : 0.0) << "x\n";

        bool identical = serial.trials == parallel.trials && serial.mean == parallel.mean &&
                         serial.std_err == parallel.std_err &&
                         serial.terminated_fraction == parallel.terminated_fraction;
        std::cout << "bit-identical: " << (identical ? "yes" : "NO") << "\n";
        return identical ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
