#pragma once

#include <cstdint>
#include <random>

namespace sfs {

// One round of the splitmix64 output function; used to spread seeds and
// derive independent substreams from (seed, stream id) pairs.
std::uint64_t splitmix64(std::uint64_t x);

// Deterministic random stream: a std::mt19937_64 engine (bit-exact across
// platforms) plus our own variate transforms, so that every draw is
// reproducible from the seed alone. Distribution algorithms are fixed:
//   uniform  - 53-bit mantissa draw, strictly inside (0,1)
//   normal   - Box-Muller (no rejection)
//   gamma    - Marsaglia-Tsang squeeze, boosted for shape < 1
//   beta     - gamma ratio
//   poisson  - sequential inversion for mean < 10, Hormann PTRS above
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    // Substream `stream_id` of the stream family rooted at `seed`.
    // Streams with distinct ids are independent for practical purposes,
    // and do not depend on how many sibling streams exist.
    static RngStream derive(std::uint64_t seed, std::uint64_t stream_id);
    static RngStream derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on the open interval (0,1).
    double uniform01();

    // Uniform on {0, ..., n-1}; unbiased via rejection.
    std::uint64_t uniform_below(std::uint64_t n);

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double normal();

    // Gamma(shape, 1), shape > 0.
    double gamma(double shape);

    // Beta(a, b), a, b > 0.
    double beta(double a, double b);

    // Poisson with the given nonnegative mean.
    std::uint64_t poisson(double mean);

  private:
    std::mt19937_64 eng_;
};

}  // namespace sfs
