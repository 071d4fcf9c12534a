// Generates a regular-column-weight LDPC parity-check matrix by progressive
// edge growth and writes it in alist format.
//
//   make_peg_ldpc --n 4096 --m 2048 --dv 3 --seed 1 --out peg_n4096_r12.alist

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "otfs/ldpc.hpp"
#include "otfs/rng.hpp"

namespace {

using Adjacency = std::vector<std::vector<std::uint32_t>>;

// Checks reachable from variable v, expanded depth by depth until the reached
// set either covers every check or stops growing. Returns the candidates:
// checks not reached before the final expansion.
std::vector<std::uint32_t> peg_candidates(std::uint32_t v, const Adjacency& var_adj, const Adjacency& chk_adj,
                                          std::size_t m) {
    std::vector<char> chk_seen(m, 0), var_seen(var_adj.size(), 0);
    std::vector<std::uint32_t> frontier_vars{v};
    var_seen[v] = 1;
    std::size_t reached = 0;
    for (;;) {
        std::vector<std::uint32_t> new_checks;
        for (auto u : frontier_vars)
            for (auto c : var_adj[u])
                if (!chk_seen[c]) {
                    chk_seen[c] = 1;
                    new_checks.push_back(c);
                }
        const std::size_t before = reached;
        reached += new_checks.size();
        if (reached == before || reached == m) {
            // Either stalled (all unreached are candidates) or complete (take
            // the checks that were only reached in this last layer).
            std::vector<std::uint32_t> out;
            if (reached == m && before < m) {
                out = new_checks;
            } else {
                for (std::uint32_t c = 0; c < m; ++c)
                    if (!chk_seen[c]) out.push_back(c);
            }
            return out;
        }
        std::vector<std::uint32_t> next_vars;
        for (auto c : new_checks)
            for (auto u : chk_adj[c])
                if (!var_seen[u]) {
                    var_seen[u] = 1;
                    next_vars.push_back(u);
                }
        frontier_vars.swap(next_vars);
    }
}

Adjacency build_peg(std::size_t n, std::size_t m, unsigned dv, std::uint64_t seed) {
    otfs::Philox4x32 rng(seed);
    Adjacency var_adj(n), chk_adj(m);
    for (std::uint32_t v = 0; v < n; ++v) {
        for (unsigned e = 0; e < dv; ++e) {
            std::vector<std::uint32_t> cand;
            if (e == 0) {
                cand.resize(m);
                std::iota(cand.begin(), cand.end(), 0u);
            } else {
                cand = peg_candidates(v, var_adj, chk_adj, m);
            }
            // Never connect the same check twice.
            std::erase_if(cand, [&](std::uint32_t c) {
                return std::find(var_adj[v].begin(), var_adj[v].end(), c) != var_adj[v].end();
            });
            std::size_t best = std::numeric_limits<std::size_t>::max();
            for (auto c : cand) best = std::min(best, chk_adj[c].size());
            std::vector<std::uint32_t> lowest;
            for (auto c : cand)
                if (chk_adj[c].size() == best) lowest.push_back(c);
            const std::uint32_t pick = lowest[std::uniform_int_distribution<std::size_t>(0, lowest.size() - 1)(rng)];
            var_adj[v].push_back(pick);
            chk_adj[pick].push_back(v);
        }
    }
    return chk_adj;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Progressive edge growth LDPC generator"};
    std::size_t n = 1024, m = 0;
    unsigned dv = 3;
    std::uint64_t seed = 1;
    std::string out_path;
    int attempts = 20;
    app.add_option("--n", n, "code length")->required();
    app.add_option("--m", m, "number of checks (default n/2)");
    app.add_option("--dv", dv, "column weight");
    app.add_option("--seed", seed, "generator seed");
    app.add_option("--attempts", attempts, "seeds to try until the matrix has full rank");
    app.add_option("--out", out_path, "alist output file")->required();
    CLI11_PARSE(app, argc, argv);
    if (m == 0) m = n / 2;

    for (int a = 0; a < attempts; ++a) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(a);
        auto rows = build_peg(n, m, dv, s);
        try {
            otfs::LdpcCode code(n, std::move(rows));
            std::ofstream out(out_path);
            if (!out) {
                std::cerr << "error: cannot write " << out_path << '\n';
                return 1;
            }
            code.write_alist(out);
            std::cout << "wrote " << out_path << ": n=" << code.n() << " m=" << code.m() << " k=" << code.k()
                      << " seed=" << s << '\n';
            return 0;
        } catch (const std::invalid_argument& e) {
            std::cerr << "seed " << s << ": " << e.what() << '\n';
        }
    }
    std::cerr << "error: no full-rank matrix found\n";
    return 1;
}
