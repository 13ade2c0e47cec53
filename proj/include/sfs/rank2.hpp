#pragma once

#include "sfs/matrix.hpp"
#include "sfs/sampler.hpp"

namespace sfs {

// Closed-form set of feasible solutions for a rank-2 factorization.
struct Rank2Sfs {
    FeasibleInterval interval_12;  // mixing column 0 with column 1
    FeasibleInterval interval_21;  // mixing column 1 with column 0
    SfsEnvelope envelope;
};

// Exact rank-2 envelope. Every normalized orientation-preserving transform
// has the form A(a,b) = [[1-a, b], [a, 1-b]] with a in interval_12 and b in
// interval_21 (the two constraint families decouple; see
// docs/rank2-envelope.md). Each entry of P A and A^-1 E is monotone in a
// and in b separately, so the elementwise extremes are attained at corners
// of the rectangle; the envelope is the min/max over corner evaluations.
// Throws ConfigError unless f.rank == 2.
Rank2Sfs rank2_sfs(const Factorization& f);

}  // namespace sfs
