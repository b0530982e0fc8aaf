#pragma once

#include <cstddef>

#include "spinmoments/errors.hpp"

namespace spinmoments {

// Tensor-factor layout of a multi-party operator. Party 0 owns the most
// significant digit of the computational index.
struct PartyStructure {
    int n_parties = 1;
    int local_dim = 2;

    std::size_t dim() const {
        std::size_t d = 1;
        for (int i = 0; i < n_parties; ++i) d *= static_cast<std::size_t>(local_dim);
        return d;
    }

    void require_party(int p) const {
        if (p < 0 || p >= n_parties) throw BadPartition("party index out of range");
    }

    bool operator==(const PartyStructure& o) const {
        return n_parties == o.n_parties && local_dim == o.local_dim;
    }
};

}  // namespace spinmoments
