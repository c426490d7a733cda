#include "tebounds/simulate.hpp"

#include "tebounds/error.hpp"
#include "tebounds/normal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

namespace tebounds {

namespace {

constexpr long kChunk = 4096;
constexpr std::uint64_t kTruthSeed = 0x7472757468ULL;
constexpr std::uint64_t kAssignStream = 0xA55167ULL;

std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

double shock_cdf(ShockDist dist, double x) {
    if (dist == ShockDist::Normal) return normal_cdf(x);
    return 1.0 / (1.0 + std::exp(-x));
}

double lognormal_cdf(double x, double mu, double sigma) {
    if (x <= 0.0) return 0.0;
    return normal_cdf((std::log(x) - mu) / sigma);
}

// Uniform shocks u_t; with serial correlation they are Phi of an AR(1) chain.
class ShockChain {
public:
    explicit ShockChain(double rho) : rho_(rho), scale_(std::sqrt(1.0 - rho * rho)) {}

    template <class Eng>
    double next(Eng& eng, bool first) {
        if (rho_ == 0.0) return unif_(eng);
        const double e = normal_(eng);
        z_ = first ? e : rho_ * z_ + scale_ * e;
        return normal_cdf(z_);
    }

private:
    double rho_;
    double scale_;
    double z_ = 0.0;
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
    std::normal_distribution<double> normal_;
};

template <class Eng>
PotentialPaths draw_duration_unit(const DurationDgpParams& p, Eng& eng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double v = 0.0;
    switch (p.v.kind) {
        case FrailtySpec::Kind::PointMass: v = p.v.values[0]; break;
        case FrailtySpec::Kind::TwoPoint: v = unif(eng) < p.v.weight ? p.v.values[0] : p.v.values[1]; break;
        case FrailtySpec::Kind::Normal: v = p.v.sd * std::normal_distribution<double>()(eng); break;
    }
    double gamma = p.gamma.values[0];
    if (p.gamma.kind != GammaSpec::Kind::Constant) gamma = unif(eng) < p.gamma.weight ? p.gamma.values[0] : p.gamma.values[1];

    PotentialPaths out;
    out.effect_sign = gamma > 0.0 ? 1 : (gamma < 0.0 ? -1 : 0);
    ShockChain c0(p.serial_corr), c1(p.serial_corr);
    for (int t = 0; t < p.t_max; ++t) {
        const double a0 = p.alpha[static_cast<std::size_t>(t)] + v;
        const double u0 = c0.next(eng, t == 0);
        const double u1 = p.shock_mode == ShockMode::Shared ? u0 : c1.next(eng, t == 0);
        if (u0 <= shock_cdf(p.shock_dist, a0)) out.y0 |= 1u << t;
        if (u1 <= shock_cdf(p.shock_dist, a0 + gamma)) out.y1 |= 1u << t;
    }
    return out;
}

template <class Eng>
PotentialPaths draw_job_unit(const JobSearchParams& p, Eng& eng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double pick = unif(eng);
    std::size_t k = 0;
    double acc = p.type_weight[0];
    while (pick >= acc && k + 1 < p.type_weight.size()) acc += p.type_weight[++k];

    PotentialPaths out;
    for (int t = 0; t < p.t_max; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        if (p.xi_treated[ut] < p.xi_control[ut]) out.effect_sign = 1;
        const double offer_p = std::clamp(p.offer_prob[ut] * p.offer_scale[k], 0.0, 1.0);
        const bool offer = unif(eng) < offer_p;
        const double wage_u = unif(eng);  // H(wage)
        if (!offer) continue;
        if (wage_u >= lognormal_cdf(p.xi_control[ut], p.wage_mu, p.wage_sigma)) out.y0 |= 1u << t;
        if (wage_u >= lognormal_cdf(p.xi_treated[ut], p.wage_mu, p.wage_sigma)) out.y1 |= 1u << t;
    }
    return out;
}

// Fills paths [begin, end) of chunk-aligned blocks; each chunk has its own stream.
void fill_paths(const DgpSpec& dgp, std::uint64_t seed, long first_chunk, long n, PotentialPaths* out) {
    const long chunks = (n + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(dynamic, 4)
    for (long c = 0; c < chunks; ++c) {
        auto eng = stream_engine(seed, static_cast<std::uint64_t>(first_chunk + c));
        const long lo = c * kChunk;
        const long hi = std::min(n, lo + kChunk);
        for (long i = lo; i < hi; ++i) {
            out[i] = std::visit(
                [&](const auto& p) -> PotentialPaths {
                    using P = std::decay_t<decltype(p)>;
                    if constexpr (std::is_same_v<P, DurationDgpParams>) {
                        return draw_duration_unit(p, eng);
                    } else {
                        return draw_job_unit(p, eng);
                    }
                },
                dgp);
        }
    }
}

struct EffectCounts {
    std::vector<long> surv1, both;
    std::vector<long> diff1, diff_both;

    explicit EffectCounts(int t_max)
        : surv1(static_cast<std::size_t>(t_max)), both(static_cast<std::size_t>(t_max)),
          diff1(static_cast<std::size_t>(t_max)), diff_both(static_cast<std::size_t>(t_max)) {}

    void add(const PotentialPaths& u, int t_max) {
        for (int t = 0; t < t_max; ++t) {
            const std::uint32_t before = (1u << t) - 1u;
            const int diff = static_cast<int>((u.y1 >> t) & 1u) - static_cast<int>((u.y0 >> t) & 1u);
            const auto ut = static_cast<std::size_t>(t);
            if ((u.y1 & before) != 0) break;
            ++surv1[ut];
            diff1[ut] += diff;
            if ((u.y0 & before) == 0) {
                ++both[ut];
                diff_both[ut] += diff;
            }
        }
    }

    void merge(const EffectCounts& o) {
        for (std::size_t t = 0; t < surv1.size(); ++t) {
            surv1[t] += o.surv1[t];
            both[t] += o.both[t];
            diff1[t] += o.diff1[t];
            diff_both[t] += o.diff_both[t];
        }
    }

    TrueEffects effects() const {
        TrueEffects te;
        te.simulated = true;
        for (std::size_t t = 0; t < surv1.size(); ++t) {
            te.atets.push_back(surv1[t] > 0 ? std::optional<double>(static_cast<double>(diff1[t]) / static_cast<double>(surv1[t]))
                                            : std::nullopt);
            te.ates.push_back(both[t] > 0 ? std::optional<double>(static_cast<double>(diff_both[t]) / static_cast<double>(both[t]))
                                          : std::nullopt);
        }
        return te;
    }
};

// Streams `units` simulated units in blocks so memory stays bounded.
TrueEffects simulated_truth(const DgpSpec& dgp, long units) {
    const int T = dgp_t_max(dgp);
    constexpr long kBlock = kChunk * 64;
    EffectCounts total(T);
    std::vector<PotentialPaths> buf(static_cast<std::size_t>(kBlock));
    for (long start = 0; start < units; start += kBlock) {
        const long len = std::min(kBlock, units - start);
        fill_paths(dgp, kTruthSeed, start / kChunk, len, buf.data());
        EffectCounts part(T);
        for (long i = 0; i < len; ++i) part.add(buf[static_cast<std::size_t>(i)], T);
        total.merge(part);
    }
    return total.effects();
}

std::string unit_id(int i, int n) {
    const auto digits = std::max<std::size_t>(4, std::to_string(n).size());
    auto num = std::to_string(i + 1);
    return "u" + std::string(digits > num.size() ? digits - num.size() : 0, '0') + num;
}

}  // namespace

std::vector<PotentialPaths> draw_paths(const DgpSpec& dgp, long n, std::uint64_t seed) {
    validate(dgp);
    if (n < 0) throw Error(ErrorCode::InvalidParams, "n must be non-negative");
    std::vector<PotentialPaths> out(static_cast<std::size_t>(n));
    fill_paths(dgp, seed, 0, n, out.data());
    return out;
}

TrueEffects dgp_true_effects(const DgpSpec& dgp, long truth_units) {
    if (auto mix = type_mixture(dgp)) return true_effects(*mix);
    return simulated_truth(dgp, truth_units);
}

TrueEffects effects_from_paths(const std::vector<PotentialPaths>& paths, int t_max) {
    EffectCounts c(t_max);
    for (const auto& u : paths) c.add(u, t_max);
    return c.effects();
}

SimulatedSample simulate(const DgpSpec& dgp, int n, std::uint64_t seed, long truth_units) {
    if (n < 2) throw Error(ErrorCode::InvalidParams, "n must be at least 2");
    validate(dgp);
    const int T = dgp_t_max(dgp);
    auto paths = draw_paths(dgp, n, seed);

    // Exactly floor(n/2) treated units, chosen by a Fisher-Yates permutation.
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    auto eng = stream_engine(seed, kAssignStream);
    for (int i = n - 1; i > 0; --i) {
        std::uniform_int_distribution<int> pick(0, i);
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(eng))]);
    }
    std::vector<char> treated(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n / 2; ++i) treated[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;

    std::vector<UnitRecord> records;
    records.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto& u = paths[static_cast<std::size_t>(i)];
        UnitRecord r;
        r.id = unit_id(i, n);
        r.arm = treated[static_cast<std::size_t>(i)];
        const std::uint32_t y = r.arm == 1 ? u.y1 : u.y0;
        r.duration = T;
        r.event = false;
        for (int t = 0; t < T; ++t) {
            if ((y >> t) & 1u) {
                r.duration = t + 1;
                r.event = true;
                break;
            }
        }
        records.push_back(std::move(r));
    }

    SimulatedSample out{PanelDataset(std::move(records), T, 1), std::move(paths), {}};
    if (auto mix = type_mixture(dgp)) {
        out.truth = true_effects(*mix);
    } else if (truth_units > 0) {
        out.truth = simulated_truth(dgp, truth_units);
    }
    return out;
}

SimulatedSample simulate_duration_model(const DurationDgpParams& p, int n, std::uint64_t seed, long truth_units) {
    return simulate(DgpSpec{p}, n, seed, truth_units);
}

SimulatedSample simulate_job_search(const JobSearchParams& p, int n, std::uint64_t seed) {
    return simulate(DgpSpec{p}, n, seed);
}

bool check_pco_paths(const std::vector<PotentialPaths>& paths, int t_max, double tol) {
    for (int t = 2; t <= t_max; ++t) {
        const int tb = t - 1;  // bit of period t
        const std::uint32_t hist = (1u << tb) - 1u;
        long nb = 0;
        std::array<long, 2> yb{};
        for (const auto& u : paths) {
            if ((u.y1 & hist) || (u.y0 & hist)) continue;
            ++nb;
            yb[0] += (u.y0 >> tb) & 1u;
            yb[1] += (u.y1 >> tb) & 1u;
        }
        if (nb == 0) continue;
        for (int m = 1; m < t; ++m) {
            const std::uint32_t before = (1u << (m - 1)) - 1u;
            const std::uint32_t at = 1u << (m - 1);
            for (int exit_arm = 0; exit_arm < 2; ++exit_arm) {
                long ne = 0;
                std::array<long, 2> ye{};
                for (const auto& u : paths) {
                    const std::uint32_t ex = exit_arm == 1 ? u.y1 : u.y0;
                    const std::uint32_t other = exit_arm == 1 ? u.y0 : u.y1;
                    if ((ex & before) || !(ex & at) || (other & hist)) continue;
                    ++ne;
                    ye[0] += (u.y0 >> tb) & 1u;
                    ye[1] += (u.y1 >> tb) & 1u;
                }
                if (ne == 0) continue;
                for (int d = 0; d < 2; ++d) {
                    const double lhs = static_cast<double>(ye[static_cast<std::size_t>(d)]) / static_cast<double>(ne);
                    const double rhs = static_cast<double>(yb[static_cast<std::size_t>(d)]) / static_cast<double>(nb);
                    if (lhs < rhs - tol) return false;
                }
            }
        }
    }
    return true;
}

bool check_cs_paths(const std::vector<PotentialPaths>& paths, int t_max) {
    const std::uint32_t mask = t_max >= 32 ? ~0u : (1u << t_max) - 1u;
    for (const auto& u : paths) {
        const std::uint32_t only1 = u.y1 & ~u.y0 & mask;
        const std::uint32_t only0 = u.y0 & ~u.y1 & mask;
        if (u.effect_sign >= 0 && only0) return false;
        if (u.effect_sign <= 0 && only1) return false;
    }
    return true;
}

}  // namespace tebounds
