#include "bstsim/oracle.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "bstsim/errors.hpp"

namespace bstsim {

namespace {
constexpr Count kExactCap = 12;
constexpr Count kEnumerationCap = 9;
} // namespace

ExplicitTree::ExplicitTree() {
    nodes_.push_back(Node{});
    leaves_.push_back(0);
}

void ExplicitTree::expand(std::size_t slot) {
    if (slot >= leaves_.size()) {
        throw ContractViolation("leaf slot " + std::to_string(slot) + " out of range");
    }
    const std::uint32_t parent = leaves_[slot];
    const Depth depth = nodes_[parent].depth + 1;
    const auto left = static_cast<std::uint32_t>(nodes_.size());
    const auto right = left + 1;
    nodes_.push_back(Node{depth, true, 0, 0});
    nodes_.push_back(Node{depth, true, 0, 0});
    Node& p = nodes_[parent];
    p.is_leaf = false;
    p.left = left;
    p.right = right;
    leaves_[slot] = left;
    leaves_.push_back(right);
}

std::vector<Depth> ExplicitTree::leaf_depths() const {
    std::vector<Depth> depths;
    depths.reserve(leaves_.size());
    for (const auto idx : leaves_) {
        depths.push_back(nodes_[idx].depth);
    }
    std::sort(depths.begin(), depths.end());
    return depths;
}

ExplicitTree grow_explicit(Xoshiro256& gen, Count n) {
    if (n < 1) {
        throw ContractViolation("tree size must be >= 1");
    }
    if (n > ExplicitTree::kMaxLeaves) {
        throw ResourceError("explicit tree capped at " + std::to_string(ExplicitTree::kMaxLeaves) +
                            " leaves");
    }
    ExplicitTree tree;
    while (tree.n() < n) {
        tree.expand(uniform_below(gen, tree.n()));
    }
    return tree;
}

ExplicitTree grow_explicit(RandomStream stream, Count n) {
    Xoshiro256 gen(stream);
    return grow_explicit(gen, n);
}

Observables observables_explicit(const ExplicitTree& tree) {
    std::vector<Count> nodes_at;
    Depth height = 0;
    for (const auto& node : tree.nodes()) {
        if (node.depth >= nodes_at.size()) {
            nodes_at.resize(node.depth + 1, 0);
        }
        ++nodes_at[node.depth];
        if (node.is_leaf) {
            height = std::max(height, node.depth);
        }
    }
    Depth saturation = 0;
    while (saturation + 1 < nodes_at.size() && saturation + 1 < 64 &&
           nodes_at[saturation + 1] == (Count{1} << (saturation + 1))) {
        ++saturation;
    }
    Count fringe = 0;
    for (const auto idx : tree.leaves()) {
        if (tree.nodes()[idx].depth == height) {
            ++fringe;
        }
    }
    return {height, saturation, fringe};
}

std::string_view to_string(Statistic s) noexcept {
    switch (s) {
    case Statistic::H:
        return "H";
    case Statistic::h:
        return "h";
    case Statistic::F:
        return "F";
    case Statistic::Joint:
        return "joint";
    }
    return "?";
}

Statistic parse_statistic(std::string_view text) {
    if (text == "H") {
        return Statistic::H;
    }
    if (text == "h") {
        return Statistic::h;
    }
    if (text == "F") {
        return Statistic::F;
    }
    if (text == "joint") {
        return Statistic::Joint;
    }
    throw ConfigError("unknown statistic '" + std::string(text) + "' (expected H, h, F or joint)");
}

CellKey statistic_key(Statistic s, const Observables& obs) {
    switch (s) {
    case Statistic::H:
        return {obs.H};
    case Statistic::h:
        return {obs.h};
    case Statistic::F:
        return {obs.F};
    case Statistic::Joint:
        break;
    }
    return {obs.H, obs.h, obs.F};
}

Rational DistributionTable::total() const {
    Rational sum = 0;
    for (const auto& [key, p] : entries) {
        sum += p;
    }
    return sum;
}

ProbabilityTable DistributionTable::to_doubles() const {
    ProbabilityTable out;
    for (const auto& [key, p] : entries) {
        out[key] = static_cast<double>(p);
    }
    return out;
}

std::map<std::vector<Count>, Rational> profile_distribution(Count n) {
    if (n < 1) {
        throw ContractViolation("tree size must be >= 1");
    }
    if (n > kExactCap) {
        throw ResourceError("exact enumeration is capped at n = " + std::to_string(kExactCap));
    }
    std::map<std::vector<Count>, Rational> layer{{{1}, Rational(1)}};
    for (Count size = 1; size < n; ++size) {
        std::map<std::vector<Count>, Rational> next;
        for (const auto& [counts, weight] : layer) {
            for (std::size_t j = 0; j < counts.size(); ++j) {
                if (counts[j] == 0) {
                    continue;
                }
                std::vector<Count> child = counts;
                child[j] -= 1;
                if (j + 1 == child.size()) {
                    child.push_back(0);
                }
                child[j + 1] += 2;
                next[child] += weight * Rational(counts[j], size);
            }
        }
        layer = std::move(next);
    }
    return layer;
}

DistributionTable exact_distribution(Count n, Statistic statistic) {
    if (n < 2) {
        throw ContractViolation("exact_distribution needs n >= 2");
    }
    DistributionTable table{n, statistic, {}};
    for (const auto& [counts, weight] : profile_distribution(n)) {
        const auto profile = LevelProfile::from_counts(counts);
        table.entries[statistic_key(statistic, profile.observables())] += weight;
    }
    return table;
}

namespace {

void enumerate_from(ExplicitTree& tree, Count n, const Rational& weight,
                    std::map<CellKey, Rational>& out) {
    if (tree.n() == n) {
        out[statistic_key(Statistic::Joint, observables_explicit(tree))] += weight;
        return;
    }
    const Rational branch = weight / Rational(tree.n());
    for (std::size_t slot = 0; slot < tree.n(); ++slot) {
        ExplicitTree child = tree;
        child.expand(slot);
        enumerate_from(child, n, branch, out);
    }
}

} // namespace

DistributionTable enumerate_sequences(Count n) {
    if (n < 1) {
        throw ContractViolation("tree size must be >= 1");
    }
    if (n > kEnumerationCap) {
        throw ResourceError("sequence enumeration is capped at n = " +
                            std::to_string(kEnumerationCap));
    }
    DistributionTable table{n, Statistic::Joint, {}};
    ExplicitTree root;
    enumerate_from(root, n, Rational(1), table.entries);
    return table;
}

DistributionTable marginal(const DistributionTable& joint, Statistic statistic) {
    if (joint.statistic != Statistic::Joint) {
        throw ContractViolation("marginal() expects a joint table");
    }
    DistributionTable out{joint.n, statistic, {}};
    for (const auto& [key, p] : joint.entries) {
        const Observables obs{static_cast<Depth>(key[0]), static_cast<Depth>(key[1]), key[2]};
        out.entries[statistic_key(statistic, obs)] += p;
    }
    return out;
}

nlohmann::json to_json(const DistributionTable& table) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [key, p] : table.entries) {
        nlohmann::json value = key.size() == 1 ? nlohmann::json(key[0]) : nlohmann::json(key);
        const std::string text = numerator(p).str() + "/" + denominator(p).str();
        entries.push_back({{"value", value}, {"p", text}});
    }
    return {{"n", table.n}, {"statistic", std::string(to_string(table.statistic))},
            {"entries", entries}};
}

DistributionTable distribution_from_json(const nlohmann::json& j) {
    DistributionTable table;
    table.n = j.at("n").get<Count>();
    table.statistic = parse_statistic(j.at("statistic").get<std::string>());
    for (const auto& entry : j.at("entries")) {
        CellKey key;
        const auto& value = entry.at("value");
        if (value.is_array()) {
            key = value.get<CellKey>();
        } else {
            key = {value.get<std::uint64_t>()};
        }
        const auto text = entry.at("p").get<std::string>();
        const auto slash = text.find('/');
        Rational p;
        if (slash == std::string::npos) {
            p = Rational(boost::multiprecision::cpp_int(text));
        } else {
            p = Rational(boost::multiprecision::cpp_int(text.substr(0, slash)),
                         boost::multiprecision::cpp_int(text.substr(slash + 1)));
        }
        table.entries[key] = p;
    }
    return table;
}

double StatisticComparison::min_p_value() const noexcept {
    double p = profile_vs_explicit.p_value;
    if (exact_available) {
        p = std::min({p, profile_vs_exact.p_value, explicit_vs_exact.p_value});
    }
    return p;
}

double ComparisonReport::min_p_value() const noexcept {
    double p = 1.0;
    for (const auto& s : statistics) {
        p = std::min(p, s.min_p_value());
    }
    return p;
}

namespace {

CountTable marginal_counts(const CountTable& joint, Statistic statistic) {
    CountTable out;
    for (const auto& [key, c] : joint) {
        const Observables obs{static_cast<Depth>(key[0]), static_cast<Depth>(key[1]), key[2]};
        out[statistic_key(statistic, obs)] += c;
    }
    return out;
}

} // namespace

ComparisonReport compare_simulators(Count n, Count trials, RandomStream stream) {
    if (n < 1) {
        throw ContractViolation("tree size must be >= 1");
    }
    if (trials < 1) {
        throw ContractViolation("compare_simulators needs at least one trial");
    }
    ComparisonReport report;
    report.n = n;
    report.trials = trials;

    Xoshiro256 profile_gen(stream.seed, 2 * stream.stream_index);
    Xoshiro256 explicit_gen(stream.seed, 2 * stream.stream_index + 1);
    for (Count t = 0; t < trials; ++t) {
        LevelProfile profile;
        while (profile.n() < n) {
            profile.step(profile_gen);
        }
        ++report.profile_counts[statistic_key(Statistic::Joint, profile.observables())];

        const ExplicitTree tree = grow_explicit(explicit_gen, n);
        const Observables obs = observables_explicit(tree);
        ++report.explicit_counts[statistic_key(Statistic::Joint, obs)];
        if (obs.h != tree.leaf_depths().front()) {
            ++report.saturation_mismatches;
        }
    }

    const bool exact = n >= 2 && n <= kExactCap;
    for (const Statistic s : {Statistic::H, Statistic::h, Statistic::F, Statistic::Joint}) {
        StatisticComparison cmp;
        cmp.statistic = s;
        cmp.exact_available = exact;
        const CountTable from_profile = marginal_counts(report.profile_counts, s);
        const CountTable from_explicit = marginal_counts(report.explicit_counts, s);
        if (exact) {
            const ProbabilityTable p = exact_distribution(n, s).to_doubles();
            cmp.profile_vs_exact = chi_square_gof(from_profile, p);
            cmp.explicit_vs_exact = chi_square_gof(from_explicit, p);
        }
        cmp.profile_vs_explicit = chi_square_homogeneity(from_profile, from_explicit);
        report.statistics.push_back(cmp);
    }
    return report;
}

namespace {

nlohmann::json to_json(const ChiSquareResult& r) {
    return {{"statistic", r.statistic}, {"dof", r.dof}, {"p_value", r.p_value}, {"bins", r.bins}};
}

} // namespace

nlohmann::json to_json(const ComparisonReport& report) {
    nlohmann::json stats = nlohmann::json::array();
    for (const auto& s : report.statistics) {
        nlohmann::json entry{{"statistic", std::string(to_string(s.statistic))},
                             {"profile_vs_explicit", to_json(s.profile_vs_explicit)}};
        if (s.exact_available) {
            entry["profile_vs_exact"] = to_json(s.profile_vs_exact);
            entry["explicit_vs_exact"] = to_json(s.explicit_vs_exact);
        }
        stats.push_back(entry);
    }
    return {{"n", report.n},
            {"trials", report.trials},
            {"saturation_mismatches", report.saturation_mismatches},
            {"min_p_value", report.min_p_value()},
            {"statistics", stats}};
}

} // namespace bstsim
