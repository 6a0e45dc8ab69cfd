#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "mdbell/model.hpp"
#include "mdbell/random.hpp"

namespace mdbell {

/// Shots per Monte Carlo chunk. Chunk i of an estimate draws from the substream
/// (master_seed, context_id, counter base = i * kChunkShots), so results are
/// bit-identical regardless of how chunks are distributed over workers.
inline constexpr std::uint64_t kChunkShots = std::uint64_t{1} << 16;

/// Empirical joint outcome distribution over (a, b) in {+1, -1}^2.
/// Counts are kept as integers so merging chunks and deriving the correlator
/// are exact operations.
struct JointDistribution {
    // counts[i][j]: i indexes Alice's outcome (0 -> +1, 1 -> -1), j Bob's.
    std::array<std::array<std::uint64_t, 2>, 2> counts{{{0, 0}, {0, 0}}};
    std::uint64_t shots = 0;

    static int index_of(int outcome) { return outcome > 0 ? 0 : 1; }

    double p(int a, int b) const {
        return static_cast<double>(counts[index_of(a)][index_of(b)]) / static_cast<double>(shots);
    }

    /// Signed sum of a*b over all shots; exact.
    std::int64_t signed_sum() const {
        const std::int64_t agree = static_cast<std::int64_t>(counts[0][0] + counts[1][1]);
        const std::int64_t disagree = static_cast<std::int64_t>(counts[0][1] + counts[1][0]);
        return agree - disagree;
    }

    /// Correlator mean computed from the integer counts (single rounding).
    double correlator() const {
        return static_cast<double>(signed_sum()) / static_cast<double>(shots);
    }

    double alice_plus_fraction() const {
        return static_cast<double>(counts[0][0] + counts[0][1]) / static_cast<double>(shots);
    }
    double bob_plus_fraction() const {
        return static_cast<double>(counts[0][0] + counts[1][0]) / static_cast<double>(shots);
    }

    void merge(const JointDistribution& other) {
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                counts[i][j] += other.counts[i][j];
            }
        }
        shots += other.shots;
    }
};

/// Monte Carlo correlator estimate with its standard error.
struct CorrelatorEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t shots = 0;
};

namespace detail {

/// Accumulates `n` shots from one substream into `acc`. Every shot draws lambda
/// from Alice's setting, then evaluates both deterministic outcomes.
inline void accumulate_shots(const ModelDescriptor& model, const Setting& alice_setting,
                             const Setting& bob_setting, std::uint64_t n, RandomStream& stream,
                             JointDistribution& acc) {
    const std::uint64_t counter_base = stream.counter();
    for (std::uint64_t k = 0; k < n; ++k) {
        const HiddenVar lambda = sample_lambda(model, alice_setting, stream);
        const Outcome a = outcome_alice(model, alice_setting, lambda);
        const Outcome b = outcome_bob(model, bob_setting, lambda);
        ++acc.counts[JointDistribution::index_of(a.value)][JointDistribution::index_of(b.value)];
    }
    acc.shots += n;
    if (stream.counter() - counter_base > kChunkShots) {
        throw std::logic_error("estimator: chunk exceeded its counter budget");
    }
}

/// Joint distribution of chunk `chunk_index` (the last chunk may be partial).
inline JointDistribution chunk_joint(const ModelDescriptor& model, const Setting& alice_setting,
                                     const Setting& bob_setting, std::uint64_t chunk_index,
                                     std::uint64_t chunk_shots, const RandomStream& stream) {
    RandomStream sub = stream.substream(stream.context_id(), chunk_index * kChunkShots);
    JointDistribution acc;
    accumulate_shots(model, alice_setting, bob_setting, chunk_shots, sub, acc);
    return acc;
}

}  // namespace detail

/// Empirical joint distribution of the four outcome pairs over `shots` draws.
///
/// Chunking is fixed (kChunkShots per chunk, substream counter base i * kChunkShots),
/// so the result depends only on (model, settings, stream identity, shots) and is
/// unchanged by the worker count. The stream's own counter position is ignored;
/// callers give each logical estimate its own context_id.
inline JointDistribution estimate_joint(const ModelDescriptor& model, const Setting& alice_setting,
                                        const Setting& bob_setting, std::uint64_t shots,
                                        const RandomStream& stream, unsigned workers = 1) {
    if (shots == 0) {
        throw std::invalid_argument("estimate_joint: shots must be >= 1");
    }
    const std::uint64_t num_chunks = (shots + kChunkShots - 1) / kChunkShots;
    auto shots_in_chunk = [&](std::uint64_t i) {
        return i + 1 < num_chunks ? kChunkShots : shots - i * kChunkShots;
    };

    JointDistribution total;
    if (workers <= 1 || num_chunks == 1) {
        for (std::uint64_t i = 0; i < num_chunks; ++i) {
            total.merge(detail::chunk_joint(model, alice_setting, bob_setting, i,
                                            shots_in_chunk(i), stream));
        }
        return total;
    }

    const unsigned n_threads = static_cast<unsigned>(
        std::min<std::uint64_t>(workers, num_chunks));
    std::vector<JointDistribution> partial(num_chunks);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
        pool.emplace_back([&, w]() {
            for (std::uint64_t i = w; i < num_chunks; i += n_threads) {
                partial[i] = detail::chunk_joint(model, alice_setting, bob_setting, i,
                                                 shots_in_chunk(i), stream);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    // Deterministic reduction in chunk order (counts are integers, so this is exact).
    for (const auto& p : partial) {
        total.merge(p);
    }
    return total;
}

/// Monte Carlo estimate of <ab>. Shares its draws with estimate_joint on the
/// same stream: the mean equals JointDistribution::correlator() exactly.
inline CorrelatorEstimate estimate_correlator(const ModelDescriptor& model,
                                              const Setting& alice_setting,
                                              const Setting& bob_setting, std::uint64_t shots,
                                              const RandomStream& stream, unsigned workers = 1) {
    if (shots == 0) {
        throw std::invalid_argument("estimate_correlator: shots must be >= 1");
    }
    const JointDistribution joint =
        estimate_joint(model, alice_setting, bob_setting, shots, stream, workers);

    CorrelatorEstimate est;
    est.shots = shots;
    est.mean = joint.correlator();
    if (shots >= 2) {
        // Products are +-1, so sum of squares is exactly `shots`; Bessel-corrected
        // sample variance then reduces to n(1 - mean^2)/(n - 1).
        const double n = static_cast<double>(shots);
        const double variance = std::fmax(0.0, n * (1.0 - est.mean * est.mean) / (n - 1.0));
        est.std_error = std::sqrt(variance / n);
    }
    return est;
}

/// One local marginal P(.|local setting) tracked across every remote setting.
struct MarginalRow {
    std::size_t local_index = 0;           // index into the caller's setting list
    std::vector<double> p_plus;            // P(outcome = +1) per remote setting
    std::vector<double> std_error;         // binomial standard error per entry
    double variation = 0.0;                // max - min of p_plus
    double variation_std_error = 0.0;      // combined error of the extremal pair
};

/// Marginal scan over a grid of settings: how much each party's outcome marginal
/// moves when the remote party changes setting.
struct MarginalScanReport {
    std::vector<MarginalRow> alice;  // P(a = +1 | X_i) across Bob's settings
    std::vector<MarginalRow> bob;    // P(b = +1 | Y_j) across Alice's settings
    std::uint64_t shots_per_pair = 0;
};

namespace detail {

inline double binomial_std_error(double p, std::uint64_t n) {
    return std::sqrt(std::fmax(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

inline MarginalRow make_marginal_row(std::size_t local_index, std::vector<double> p,
                                     std::uint64_t shots) {
    MarginalRow row;
    row.local_index = local_index;
    row.p_plus = std::move(p);
    row.std_error.reserve(row.p_plus.size());
    for (const double v : row.p_plus) {
        row.std_error.push_back(binomial_std_error(v, shots));
    }
    std::size_t hi = 0;
    std::size_t lo = 0;
    for (std::size_t k = 1; k < row.p_plus.size(); ++k) {
        if (row.p_plus[k] > row.p_plus[hi]) hi = k;
        if (row.p_plus[k] < row.p_plus[lo]) lo = k;
    }
    row.variation = row.p_plus[hi] - row.p_plus[lo];
    row.variation_std_error =
        std::sqrt(row.std_error[hi] * row.std_error[hi] + row.std_error[lo] * row.std_error[lo]);
    return row;
}

}  // namespace detail

/// Estimates P(a = +1 | X_i) across all Y_j and P(b = +1 | Y_j) across all X_i,
/// reporting the maximum variation of each local marginal over remote settings.
/// Pair (i, j) draws from context derive_context(stream.context_id(), i * |bob| + j).
inline MarginalScanReport marginal_scan(const ModelDescriptor& model,
                                        const std::vector<Setting>& alice_settings,
                                        const std::vector<Setting>& bob_settings,
                                        std::uint64_t shots, const RandomStream& stream,
                                        unsigned workers = 1) {
    if (alice_settings.empty() || bob_settings.empty()) {
        throw std::invalid_argument("marginal_scan: setting lists must be non-empty");
    }
    const std::size_t na = alice_settings.size();
    const std::size_t nb = bob_settings.size();

    std::vector<std::vector<JointDistribution>> joint(na, std::vector<JointDistribution>(nb));
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            const RandomStream pair_stream =
                stream.substream(derive_context(stream.context_id(), i * nb + j));
            joint[i][j] = estimate_joint(model, alice_settings[i], bob_settings[j], shots,
                                         pair_stream, workers);
        }
    }

    MarginalScanReport report;
    report.shots_per_pair = shots;
    for (std::size_t i = 0; i < na; ++i) {
        std::vector<double> p(nb);
        for (std::size_t j = 0; j < nb; ++j) {
            p[j] = joint[i][j].alice_plus_fraction();
        }
        report.alice.push_back(detail::make_marginal_row(i, std::move(p), shots));
    }
    for (std::size_t j = 0; j < nb; ++j) {
        std::vector<double> p(na);
        for (std::size_t i = 0; i < na; ++i) {
            p[i] = joint[i][j].bob_plus_fraction();
        }
        report.bob.push_back(detail::make_marginal_row(j, std::move(p), shots));
    }
    return report;
}

}  // namespace mdbell
