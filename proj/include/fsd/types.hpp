#pragma once

#include <cstdint>
#include <vector>

#include "fsd/errors.hpp"

namespace fsd {

// Round geometry: l data dimensions, n samples per detection round, values
// per dimension in [0, d].
struct SchemeDims {
    uint32_t l = 1;
    uint32_t n = 2;
    uint64_t d = 1;

    void validate() const {
        if (l < 1) throw Error(Errc::argument, "dimension count must be >= 1");
        if (n < 2) throw Error(Errc::argument, "samples per round must be >= 2");
        if (d < 1) throw Error(Errc::argument, "max data value must be >= 1");
    }
};

// One multidimensional sensor reading, already quantized to integers.
struct DataSample {
    std::vector<int64_t> v;
    bool operator==(const DataSample&) const = default;
};

using SampleSet = std::vector<DataSample>;

// Dense square symmetric matrix of doubles, row-major vectors.
using Matrix = std::vector<std::vector<double>>;

}  // namespace fsd
