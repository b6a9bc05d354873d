#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "bstsim/profile.hpp"
#include "bstsim/rng.hpp"
#include "bstsim/stats.hpp"

namespace bstsim {

using Rational = boost::multiprecision::cpp_rational;

/// Node-level binary tree grown by uniform leaf expansion. Stores depths and
/// child links only, no keys.
class ExplicitTree {
public:
    static constexpr Count kMaxLeaves = 1'000'000;

    struct Node {
        Depth depth = 0;
        bool is_leaf = true;
        std::uint32_t left = 0;   // valid when !is_leaf
        std::uint32_t right = 0;
    };

    ExplicitTree();

    Count n() const noexcept { return leaves_.size(); }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<std::uint32_t>& leaves() const noexcept { return leaves_; }

    /// Expands the leaf at position `slot` of leaves(): the slot is
    /// overwritten by the left child and the right child is appended.
    void expand(std::size_t slot);

    /// Leaf depths in ascending order.
    std::vector<Depth> leaf_depths() const;

private:
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> leaves_;
};

/// n - 1 uniform expansions from the root. Throws ResourceError above
/// ExplicitTree::kMaxLeaves.
ExplicitTree grow_explicit(Xoshiro256& gen, Count n);
ExplicitTree grow_explicit(RandomStream stream, Count n);

/// H and F from leaf depths; h from the node set as the deepest level whose
/// 2^k nodes are all present (independent of the minimum leaf depth).
Observables observables_explicit(const ExplicitTree& tree);

enum class Statistic { H, h, F, Joint };

std::string_view to_string(Statistic s) noexcept;
/// Accepts "H", "h", "F", "joint". Throws ConfigError otherwise.
Statistic parse_statistic(std::string_view text);

/// Value of `s` as a table key: one component for H/h/F, three for Joint.
CellKey statistic_key(Statistic s, const Observables& obs);

struct DistributionTable {
    Count n = 0;
    Statistic statistic = Statistic::Joint;
    std::map<CellKey, Rational> entries;

    Rational total() const;
    ProbabilityTable to_doubles() const;
};

/// Exact law of the level profile after n - 1 expansions, keyed by
/// counts[0..max_level]. Memoised forward dynamic program over profile
/// states with exact rational weights. 1 <= n <= 12.
std::map<std::vector<Count>, Rational> profile_distribution(Count n);

/// Marginal of profile_distribution. 2 <= n <= 12: smaller n is a
/// ContractViolation, larger a ResourceError.
DistributionTable exact_distribution(Count n, Statistic statistic);

/// Independent route: enumerates every sequence of leaf choices on explicit
/// trees, each weighted by prod 1/k. Joint statistic; n <= 9.
DistributionTable enumerate_sequences(Count n);

DistributionTable marginal(const DistributionTable& joint, Statistic statistic);

nlohmann::json to_json(const DistributionTable& table);
DistributionTable distribution_from_json(const nlohmann::json& j);

struct StatisticComparison {
    Statistic statistic = Statistic::H;
    bool exact_available = false;
    ChiSquareResult profile_vs_exact;
    ChiSquareResult explicit_vs_exact;
    ChiSquareResult profile_vs_explicit;

    double min_p_value() const noexcept;
};

struct ComparisonReport {
    Count n = 0;
    Count trials = 0;
    CountTable profile_counts;   // joint (H, h, F)
    CountTable explicit_counts;
    std::vector<StatisticComparison> statistics;  // H, h, F, Joint
    /// Trees where the node-set saturation level differed from the minimum
    /// leaf depth. Must be zero.
    Count saturation_mismatches = 0;

    double min_p_value() const noexcept;
};

/// Runs both simulators `trials` times (profile-core on stream (seed, 2i),
/// explicit on (seed, 2i + 1) for stream index i of `stream`) and tests each
/// against the exact law (n <= 12) and against each other.
ComparisonReport compare_simulators(Count n, Count trials, RandomStream stream);

nlohmann::json to_json(const ComparisonReport& report);

} // namespace bstsim
