#include "viexec/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace viexec {

const std::vector<Transition>& Mdp::successors(int s, int a) const {
    if (s < 0 || s >= num_states) {
        throw std::out_of_range("state index " + std::to_string(s) + " out of range [0, " +
                                std::to_string(num_states) + ")");
    }
    if (a < 0 || a >= num_actions) {
        throw std::out_of_range("action index " + std::to_string(a) + " out of range [0, " +
                                std::to_string(num_actions) + ")");
    }
    return transitions[static_cast<std::size_t>(s) * num_actions + a];
}

std::vector<std::string> validate(const Mdp& mdp) {
    std::vector<std::string> report;
    auto add = [&](const std::string& msg) { report.push_back(msg); };

    if (mdp.num_states <= 0) add("num_states must be positive");
    if (mdp.num_actions <= 0) add("num_actions must be positive");
    if (!(mdp.gamma >= 0.0) || mdp.gamma >= 1.0) {
        add("gamma out of range [0,1): " + std::to_string(mdp.gamma));
    }
    const std::size_t n_pairs = static_cast<std::size_t>(mdp.num_states) * mdp.num_actions;
    if (mdp.transitions.size() != n_pairs) {
        add("transitions table has " + std::to_string(mdp.transitions.size()) + " entries, expected " +
            std::to_string(n_pairs));
        return report;
    }
    if (mdp.rewards.size() != n_pairs) {
        add("rewards table has " + std::to_string(mdp.rewards.size()) + " entries, expected " +
            std::to_string(n_pairs));
    }

    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            const auto& succ = mdp.transitions[static_cast<std::size_t>(s) * mdp.num_actions + a];
            const std::string at = " at (s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
            if (succ.empty()) {
                add("empty successor list" + at);
                continue;
            }
            double total = 0.0;
            int prev = -1;
            for (const auto& t : succ) {
                if (t.next < 0 || t.next >= mdp.num_states) add("successor out of range" + at);
                if (t.next == prev) add("duplicate successor " + std::to_string(t.next) + at);
                if (t.next < prev) add("successors not sorted" + at);
                if (!(t.prob > 0.0) || t.prob > 1.0) add("probability out of (0,1]" + at);
                if (!std::isfinite(t.prob)) add("non-finite probability" + at);
                prev = t.next;
                total += t.prob;
            }
            if (std::fabs(total - 1.0) > 1e-9) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "probabilities sum to %.12g != 1", total);
                add(std::string(buf) + at);
            }
        }
    }
    for (std::size_t i = 0; i < mdp.rewards.size(); ++i) {
        if (!std::isfinite(mdp.rewards[i])) {
            add("non-finite reward at (s=" + std::to_string(i / mdp.num_actions) + ", a=" +
                std::to_string(i % mdp.num_actions) + ")");
        }
    }
    return report;
}

std::set<std::pair<int, int>> edge_set(const Mdp& mdp) {
    std::set<std::pair<int, int>> edges;
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            for (const auto& t : mdp.transitions[static_cast<std::size_t>(s) * mdp.num_actions + a]) {
                edges.emplace(s, t.next);
            }
        }
    }
    return edges;
}

Mdp permute_states(const Mdp& mdp, const std::vector<int>& perm) {
    Mdp out;
    out.num_states = mdp.num_states;
    out.num_actions = mdp.num_actions;
    out.gamma = mdp.gamma;
    out.transitions.resize(mdp.transitions.size());
    out.rewards.resize(mdp.rewards.size());
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            const std::size_t src = static_cast<std::size_t>(s) * mdp.num_actions + a;
            const std::size_t dst = static_cast<std::size_t>(perm[s]) * mdp.num_actions + a;
            auto succ = mdp.transitions[src];
            for (auto& t : succ) t.next = perm[t.next];
            std::sort(succ.begin(), succ.end(), [](const Transition& x, const Transition& y) { return x.next < y.next; });
            out.transitions[dst] = std::move(succ);
            out.rewards[dst] = mdp.rewards[src];
        }
    }
    return out;
}

Mdp permute_actions(const Mdp& mdp, const std::vector<int>& perm) {
    Mdp out = mdp;
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            const std::size_t src = static_cast<std::size_t>(s) * mdp.num_actions + a;
            const std::size_t dst = static_cast<std::size_t>(s) * mdp.num_actions + perm[a];
            out.transitions[dst] = mdp.transitions[src];
            out.rewards[dst] = mdp.rewards[src];
        }
    }
    return out;
}

ValueFunction permute_values(const ValueFunction& v, const std::vector<int>& perm) {
    ValueFunction out(v.size());
    for (std::size_t s = 0; s < v.size(); ++s) out[perm[s]] = v[s];
    return out;
}

namespace {
constexpr int kMdpFormatVersion = 1;
}

std::string mdp_to_json(const Mdp& mdp) {
    nlohmann::json j;
    j["format_version"] = kMdpFormatVersion;
    j["num_states"] = mdp.num_states;
    j["num_actions"] = mdp.num_actions;
    j["gamma"] = mdp.gamma;
    auto rewards = nlohmann::json::array();
    for (int s = 0; s < mdp.num_states; ++s) {
        auto row = nlohmann::json::array();
        for (int a = 0; a < mdp.num_actions; ++a) row.push_back(mdp.reward(s, a));
        rewards.push_back(std::move(row));
    }
    j["rewards"] = std::move(rewards);
    auto transitions = nlohmann::json::array();
    for (const auto& succ : mdp.transitions) {
        auto list = nlohmann::json::array();
        for (const auto& t : succ) list.push_back(nlohmann::json::array({t.next, t.prob}));
        transitions.push_back(std::move(list));
    }
    j["transitions"] = std::move(transitions);
    return j.dump(2) + "\n";
}

Mdp mdp_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format_version").get<int>() != kMdpFormatVersion) {
        throw std::runtime_error("unsupported MDP format_version");
    }
    Mdp mdp;
    mdp.num_states = j.at("num_states").get<int>();
    mdp.num_actions = j.at("num_actions").get<int>();
    mdp.gamma = j.at("gamma").get<double>();
    const auto& rewards = j.at("rewards");
    for (const auto& row : rewards) {
        for (const auto& r : row) mdp.rewards.push_back(r.get<double>());
    }
    for (const auto& list : j.at("transitions")) {
        std::vector<Transition> succ;
        for (const auto& t : list) succ.push_back({t.at(0).get<int>(), t.at(1).get<double>()});
        mdp.transitions.push_back(std::move(succ));
    }
    return mdp;
}

void save_mdp(const std::string& path, const Mdp& mdp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << mdp_to_json(mdp);
}

Mdp load_mdp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return mdp_from_json(buf.str());
}

}  // namespace viexec
