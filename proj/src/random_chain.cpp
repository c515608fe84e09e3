#include "qsteer/random_chain.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace qsteer {

void RandomAmplitudeSpec::check() const {
    if (b.size() < 1) throw std::invalid_argument("RandomAmplitudeSpec: empty b");
    if ((b.array() < 0.0).any())
        throw std::invalid_argument("RandomAmplitudeSpec: b_j must be nonnegative");
    if (!(unit_dt > 0.0) || unit_dt > 0.5)
        throw std::invalid_argument("RandomAmplitudeSpec: unit_dt in (0, 0.5] required");
}

RandomAmplitudeSpec RandomAmplitudeSpec::power_law(int j_trunc, double scale, double decay,
                                                   double unit_dt) {
    if (j_trunc < 1) throw std::invalid_argument("RandomAmplitudeSpec: j_trunc >= 1");
    RandomAmplitudeSpec spec;
    spec.b.resize(j_trunc);
    for (int j = 1; j <= j_trunc; ++j) spec.b(j - 1) = scale * std::pow(double(j), -decay);
    spec.unit_dt = unit_dt;
    spec.check();
    return spec;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t domain, std::uint64_t index) {
    return splitmix64(splitmix64(master ^ splitmix64(domain)) + index);
}

double temporal_basis(int j, double t) {
    if (j < 1) throw std::out_of_range("temporal_basis: j >= 1");
    if (j == 1) return 1.0;
    return std::sqrt(2.0) * std::cos((j - 1) * M_PI * t);
}

ControlSignal sample_eta(const RandomAmplitudeSpec& spec, std::uint64_t seed) {
    spec.check();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd xi(spec.j_trunc());
    for (int j = 0; j < spec.j_trunc(); ++j) xi(j) = normal(rng);

    const int steps = static_cast<int>(std::llround(1.0 / spec.unit_dt));
    ControlSignal eta;
    eta.t0 = 0.0;
    eta.t1 = 1.0;
    eta.dt = 1.0 / steps;
    eta.samples.setZero(steps + 1);
    for (int k = 0; k <= steps; ++k) {
        const double t = k * eta.dt;
        double v = 0.0;
        for (int j = 1; j <= spec.j_trunc(); ++j)
            v += spec.b(j - 1) * xi(j - 1) * temporal_basis(j, t);
        eta.samples(k) = v;
    }
    return eta;
}

ModalState step_chain(const ModalState& c, const RandomAmplitudeSpec& spec,
                      std::uint64_t seed, const EigenBasis& basis, const CouplingMatrix& B) {
    return propagate_final(c, sample_eta(spec, seed), basis, B);
}

ChainRun run_chain(const ModalState& c0, int n_steps, std::uint64_t seed,
                   const RandomAmplitudeSpec& spec, const EigenBasis& basis,
                   const CouplingMatrix& B, int step_offset) {
    if (n_steps < 1) throw std::invalid_argument("run_chain: n_steps >= 1");
    ChainRun run;
    run.seed = seed;
    run.states.reserve(n_steps + 1);
    run.states.push_back(c0);
    ModalState c = c0;
    for (int k = 0; k < n_steps; ++k) {
        c = step_chain(c, spec, substream_seed(seed, 0, std::uint64_t(step_offset + k)),
                       basis, B);
        run.states.push_back(c);
    }
    return run;
}

std::vector<Functional> default_functionals(int N) {
    std::vector<Functional> fs;
    for (int j = 1; j <= N; ++j) {
        fs.push_back({"mod2_" + std::to_string(j),
                      [j](const Eigen::VectorXcd& c) { return std::norm(c(j - 1)); }});
    }
    const int top = std::min(N, 4);
    for (int j = 1; j <= top; ++j) {
        for (int k = j + 1; k <= top; ++k) {
            fs.push_back({"re_" + std::to_string(j) + std::to_string(k),
                          [j, k](const Eigen::VectorXcd& c) {
                              return (std::conj(c(j - 1)) * c(k - 1)).real();
                          }});
            fs.push_back({"im_" + std::to_string(j) + std::to_string(k),
                          [j, k](const Eigen::VectorXcd& c) {
                              return (std::conj(c(j - 1)) * c(k - 1)).imag();
                          }});
        }
    }
    return fs;
}

Eigen::VectorXd empirical_average(const ChainRun& run, const std::vector<Functional>& fs,
                                  int burn_in) {
    const int n = static_cast<int>(run.states.size());
    if (burn_in < 0 || burn_in >= n - 1)
        throw std::invalid_argument("empirical_average: empty averaging window");
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(fs.size());
    int count = 0;
    for (int k = burn_in + 1; k < n; ++k) {
        for (std::size_t f = 0; f < fs.size(); ++f) acc(f) += fs[f].f(run.states[k].coeffs);
        ++count;
    }
    return acc / count;
}

namespace {

struct ReplicaResult {
    Eigen::VectorXd averages;
    bool hit{false};
};

// One side of the diagnostic: `replicas` chains fanned out over a small
// thread pool, each fully determined by its substream.
std::vector<ReplicaResult> run_side(const ModalState& c0, const RandomAmplitudeSpec& spec,
                                    const EigenBasis& basis, const CouplingMatrix& B,
                                    const std::vector<Functional>& fs,
                                    std::uint64_t master, std::uint64_t domain,
                                    const DiagnosticParams& p, int burn_in,
                                    const Eigen::VectorXcd& target) {
    std::vector<ReplicaResult> results(p.replicas);
    const int hw = p.threads > 0 ? p.threads
                                 : std::max(1u, std::thread::hardware_concurrency());
    const int n_workers = std::min(hw, p.replicas);

    auto worker = [&](int w) {
        for (int r = w; r < p.replicas; r += n_workers) {
            const std::uint64_t seed = substream_seed(master, domain, std::uint64_t(r));
            ModalState c = c0;
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(fs.size());
            bool hit = false;
            int count = 0;
            for (int k = 0; k < p.n_steps; ++k) {
                c = step_chain(c, spec, substream_seed(seed, 0, std::uint64_t(k)), basis, B);
                if ((c.coeffs - target).norm() < p.ball_radius) hit = true;
                if (k >= burn_in) {
                    for (std::size_t f = 0; f < fs.size(); ++f) acc(f) += fs[f].f(c.coeffs);
                    ++count;
                }
            }
            results[r] = {acc / count, hit};
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
    return results;
}

struct SideStats {
    double mean, se, ci_lo, ci_hi;
};

SideStats side_stats(const std::vector<ReplicaResult>& rs, std::size_t f, int n_boot,
                     std::uint64_t boot_seed) {
    const int R = static_cast<int>(rs.size());
    double mean = 0.0;
    for (const auto& r : rs) mean += r.averages(f);
    mean /= R;
    double var = 0.0;
    for (const auto& r : rs) var += (r.averages(f) - mean) * (r.averages(f) - mean);
    var /= (R - 1);
    const double se = std::sqrt(var / R);

    // Percentile bootstrap over replicas.
    std::mt19937_64 rng(boot_seed);
    std::uniform_int_distribution<int> pick(0, R - 1);
    std::vector<double> boot(n_boot);
    for (int b = 0; b < n_boot; ++b) {
        double m = 0.0;
        for (int r = 0; r < R; ++r) m += rs[pick(rng)].averages(f);
        boot[b] = m / R;
    }
    std::sort(boot.begin(), boot.end());
    const int lo = static_cast<int>(0.025 * (n_boot - 1));
    const int hi = static_cast<int>(0.975 * (n_boot - 1));
    return {mean, se, boot[lo], boot[hi]};
}

}  // namespace

UniquenessReport uniqueness_diagnostic(const ModalState& c0_a, const ModalState& c0_b,
                                       const RandomAmplitudeSpec& spec,
                                       const EigenBasis& basis, const CouplingMatrix& B,
                                       std::uint64_t master_seed,
                                       const DiagnosticParams& params) {
    if (params.replicas < 10)
        throw std::invalid_argument("uniqueness_diagnostic: replicas >= 10 required");
    if (params.n_steps < 2) throw std::invalid_argument("uniqueness_diagnostic: n_steps >= 2");
    const int burn_in = params.burn_in > 0 ? params.burn_in : params.n_steps / 10;
    if (burn_in >= params.n_steps)
        throw std::invalid_argument("uniqueness_diagnostic: burn_in < n_steps required");

    const auto fs = default_functionals(basis.n_modes);
    const Eigen::VectorXcd target =
        ModalState::basis_state(basis.n_modes, params.target).coeffs;

    const auto side_a = run_side(c0_a, spec, basis, B, fs, master_seed, 0xA, params,
                                 burn_in, target);
    const auto side_b = run_side(c0_b, spec, basis, B, fs, master_seed, 0xB, params,
                                 burn_in, target);

    UniquenessReport rep;
    rep.replicas = params.replicas;
    rep.n_steps = params.n_steps;
    rep.burn_in = burn_in;
    rep.ball_radius = params.ball_radius;
    rep.max_discrepancy = 0.0;

    for (std::size_t f = 0; f < fs.size(); ++f) {
        const SideStats sa = side_stats(side_a, f, params.bootstrap,
                                        substream_seed(master_seed, 0xB00, f));
        const SideStats sb = side_stats(side_b, f, params.bootstrap,
                                        substream_seed(master_seed, 0xB01, f));
        FunctionalStats st;
        st.name = fs[f].name;
        st.mean_a = sa.mean;
        st.se_a = sa.se;
        st.ci_lo_a = sa.ci_lo;
        st.ci_hi_a = sa.ci_hi;
        st.mean_b = sb.mean;
        st.se_b = sb.se;
        st.ci_lo_b = sb.ci_lo;
        st.ci_hi_b = sb.ci_hi;
        const double denom = std::sqrt(sa.se * sa.se + sb.se * sb.se);
        st.discrepancy = std::abs(sa.mean - sb.mean) / std::max(denom, 1e-300);
        if (st.discrepancy > rep.max_discrepancy) {
            rep.max_discrepancy = st.discrepancy;
            rep.max_discrepancy_name = st.name;
        }
        rep.stats.push_back(std::move(st));
    }

    int hits_a = 0, hits_b = 0;
    for (const auto& r : side_a) hits_a += r.hit ? 1 : 0;
    for (const auto& r : side_b) hits_b += r.hit ? 1 : 0;
    rep.hit_frequency_a = double(hits_a) / params.replicas;
    rep.hit_frequency_b = double(hits_b) / params.replicas;
    rep.consistent = rep.max_discrepancy <= 3.0;
    return rep;
}

}  // namespace qsteer
