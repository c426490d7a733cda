#include "tebounds/dgp_config.hpp"

#include "tebounds/error.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace tebounds {

namespace {

std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::InvalidParams, msg); }

double to_double(const std::string& key, std::string_view s) {
    double v = 0.0;
    const auto t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) bad("bad number for " + key + ": '" + t + "'");
    return v;
}

std::vector<double> to_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(',', start);
        out.push_back(to_double(key, std::string_view(s).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

class Entries {
public:
    explicit Entries(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

    bool has(const std::string& k) const { return kv_.count(k) != 0; }
    std::string text(const std::string& k, const std::string& fallback) {
        used_.push_back(k);
        const auto it = kv_.find(k);
        return it == kv_.end() ? fallback : it->second;
    }
    std::string text(const std::string& k) {
        if (!has(k)) bad("missing key '" + k + "'");
        return text(k, "");
    }
    double number(const std::string& k, double fallback) { return has(k) ? to_double(k, text(k)) : (used_.push_back(k), fallback); }
    std::vector<double> list(const std::string& k) { return to_list(k, text(k)); }
    std::vector<double> per_period(const std::string& k, int t_max) {
        auto v = list(k);
        if (v.size() == 1) v.assign(static_cast<std::size_t>(t_max), v[0]);
        if (v.size() != static_cast<std::size_t>(t_max)) bad("'" + k + "' needs 1 or t_max values");
        return v;
    }
    void reject_unknown() const {
        for (const auto& [k, v] : kv_) {
            bool known = false;
            for (const auto& u : used_) known = known || u == k;
            if (!known) bad("unknown key '" + k + "'");
        }
    }

private:
    std::map<std::string, std::string> kv_;
    std::vector<std::string> used_;
};

std::string join(const std::vector<double>& v) {
    std::ostringstream out;
    out << std::setprecision(17);
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i];
    return out.str();
}

DgpSpec parse_entries(Entries e) {
    const auto model = e.text("model", "duration");
    const int t_max = static_cast<int>(e.number("t_max", 6));
    if (t_max < 1 || t_max > 31) bad("t_max must lie in 1..31");

    if (model == "duration") {
        DurationDgpParams p;
        p.t_max = t_max;
        p.alpha = e.per_period("alpha", t_max);

        const auto gk = e.text("gamma_kind", "constant");
        if (gk == "constant") p.gamma.kind = GammaSpec::Kind::Constant;
        else if (gk == "heterogeneous") p.gamma.kind = GammaSpec::Kind::Heterogeneous;
        else if (gk == "mixed") p.gamma.kind = GammaSpec::Kind::MixedSign;
        else bad("gamma_kind must be constant, heterogeneous or mixed");
        p.gamma.values = e.has("gamma") ? e.list("gamma") : std::vector<double>{0.0};
        p.gamma.weight = e.number("gamma_weight", 0.5);

        const auto vk = e.text("v_dist", "point");
        if (vk == "point") p.v.kind = FrailtySpec::Kind::PointMass;
        else if (vk == "two-point") p.v.kind = FrailtySpec::Kind::TwoPoint;
        else if (vk == "normal") p.v.kind = FrailtySpec::Kind::Normal;
        else bad("v_dist must be point, two-point or normal");
        p.v.values = e.has("v") ? e.list("v") : std::vector<double>{0.0};
        p.v.weight = e.number("v_weight", 0.5);
        p.v.sd = e.number("v_sd", 1.0);

        const auto sm = e.text("shock_mode", "shared");
        if (sm == "shared") p.shock_mode = ShockMode::Shared;
        else if (sm == "independent") p.shock_mode = ShockMode::Independent;
        else bad("shock_mode must be shared or independent");
        const auto sd = e.text("shock_dist", "logistic");
        if (sd == "logistic") p.shock_dist = ShockDist::Logistic;
        else if (sd == "normal") p.shock_dist = ShockDist::Normal;
        else bad("shock_dist must be logistic or normal");
        p.serial_corr = e.number("serial_corr", 0.0);
        e.reject_unknown();
        DgpSpec spec{p};
        validate(spec);
        return spec;
    }
    if (model == "job-search") {
        JobSearchParams p;
        p.t_max = t_max;
        p.offer_prob = e.per_period("offer_prob", t_max);
        p.offer_scale = e.has("offer_scale") ? e.list("offer_scale") : std::vector<double>{1.0};
        if (e.has("type_weight")) {
            p.type_weight = e.list("type_weight");
        } else {
            p.type_weight.assign(p.offer_scale.size(), 1.0 / static_cast<double>(p.offer_scale.size()));
            e.text("type_weight", "");
        }
        p.xi_treated = e.per_period("xi_treated", t_max);
        p.xi_control = e.per_period("xi_control", t_max);
        p.wage_mu = e.number("wage_mu", 0.0);
        p.wage_sigma = e.number("wage_sigma", 1.0);
        e.reject_unknown();
        DgpSpec spec{p};
        validate(spec);
        return spec;
    }
    bad("model must be duration or job-search");
}

}  // namespace

DgpSpec parse_dgp_config(std::string_view text) {
    std::map<std::string, std::string> kv;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) bad("line " + std::to_string(line_no) + ": expected key = value");
        const auto key = trim(std::string_view(t).substr(0, eq));
        if (!kv.emplace(key, trim(std::string_view(t).substr(eq + 1))).second) bad("duplicate key '" + key + "'");
    }
    return parse_entries(Entries(std::move(kv)));
}

DgpSpec parse_dgp_config(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dgp_config(std::string_view(buf.str()));
}

std::string to_dgp_config(const DgpSpec& dgp) {
    std::ostringstream out;
    out << std::setprecision(17);
    if (const auto* p = std::get_if<DurationDgpParams>(&dgp)) {
        out << "model = duration\n";
        out << "t_max = " << p->t_max << '\n';
        out << "alpha = " << join(p->alpha) << '\n';
        const char* gk = p->gamma.kind == GammaSpec::Kind::Constant        ? "constant"
                         : p->gamma.kind == GammaSpec::Kind::Heterogeneous ? "heterogeneous"
                                                                           : "mixed";
        out << "gamma_kind = " << gk << '\n' << "gamma = " << join(p->gamma.values) << '\n';
        out << "gamma_weight = " << p->gamma.weight << '\n';
        const char* vk = p->v.kind == FrailtySpec::Kind::PointMass  ? "point"
                         : p->v.kind == FrailtySpec::Kind::TwoPoint ? "two-point"
                                                                    : "normal";
        out << "v_dist = " << vk << '\n' << "v = " << join(p->v.values) << '\n';
        out << "v_weight = " << p->v.weight << '\n' << "v_sd = " << p->v.sd << '\n';
        out << "shock_mode = " << (p->shock_mode == ShockMode::Shared ? "shared" : "independent") << '\n';
        out << "shock_dist = " << (p->shock_dist == ShockDist::Logistic ? "logistic" : "normal") << '\n';
        out << "serial_corr = " << p->serial_corr << '\n';
        return out.str();
    }
    const auto& p = std::get<JobSearchParams>(dgp);
    out << "model = job-search\n";
    out << "t_max = " << p.t_max << '\n';
    out << "offer_prob = " << join(p.offer_prob) << '\n';
    out << "offer_scale = " << join(p.offer_scale) << '\n';
    out << "type_weight = " << join(p.type_weight) << '\n';
    out << "xi_treated = " << join(p.xi_treated) << '\n';
    out << "xi_control = " << join(p.xi_control) << '\n';
    out << "wage_mu = " << p.wage_mu << '\n' << "wage_sigma = " << p.wage_sigma << '\n';
    return out.str();
}

std::vector<std::string> preset_names() { return {"null-shared", "mtr-cs", "mixed-sign", "pco-violation", "job-bonus"}; }

DgpSpec preset_dgp(std::string_view name) {
    if (name == "null-shared") {
        // No effect, heterogeneous frailty, common shocks.
        return parse_dgp_config(
            "model = duration\nt_max = 6\nalpha = -1.6, -1.7, -1.8, -1.9, -2.0, -2.1\n"
            "v_dist = two-point\nv = -0.6, 0.6\nshock_mode = shared\n");
    }
    if (name == "mtr-cs") {
        return parse_dgp_config(
            "model = duration\nt_max = 6\nalpha = -1.6, -1.7, -1.8, -1.9, -2.0, -2.1\n"
            "gamma_kind = heterogeneous\ngamma = 0.2, 0.6\nv_dist = two-point\nv = -0.6, 0.6\nshock_mode = shared\n");
    }
    if (name == "mixed-sign") {
        return parse_dgp_config(
            "model = duration\nt_max = 6\nalpha = -1.0\n"
            "gamma_kind = mixed\ngamma = -2.5, 2.5\nv_dist = two-point\nv = -1.5, 1.5\nshock_mode = independent\n");
    }
    if (name == "pco-violation") {
        return parse_dgp_config(
            "model = duration\nt_max = 6\nalpha = -1.2\ngamma = 0.4\nshock_mode = shared\nserial_corr = -0.8\n");
    }
    if (name == "job-bonus") {
        // Bonus lowers the treated reservation wage through period 5 only.
        return parse_dgp_config(
            "model = job-search\nt_max = 10\noffer_prob = 0.35\noffer_scale = 0.7, 1.3\ntype_weight = 0.5, 0.5\n"
            "xi_treated = 0.6, 0.6, 0.6, 0.6, 0.6, 1.2, 1.2, 1.2, 1.2, 1.2\nxi_control = 1.2\n"
            "wage_mu = 0.3\nwage_sigma = 0.6\n");
    }
    throw Error(ErrorCode::InvalidParams, "unknown preset '" + std::string(name) + "'");
}

DgpSpec load_dgp(const std::string& where) {
    constexpr std::string_view prefix = "preset:";
    if (where.rfind(prefix, 0) == 0) return preset_dgp(std::string_view(where).substr(prefix.size()));
    std::ifstream in(where);
    if (!in) throw Error(ErrorCode::Io, "cannot open DGP file " + where);
    return parse_dgp_config(in);
}

}  // namespace tebounds
