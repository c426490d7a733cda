#include "tebounds/data.hpp"

#include "tebounds/error.hpp"

#include <algorithm>
#include <charconv>
#include <iterator>
#include <sstream>
#include <unordered_set>

namespace tebounds {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return fields;
}

std::optional<int> parse_int(std::string_view s) {
    int value = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
    return value;
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

PanelDataset::PanelDataset(std::vector<UnitRecord> records, int t_max, int bin_width)
    : records_(std::move(records)), t_max_(t_max), bin_width_(bin_width) {
    if (t_max_ < 1) throw Error(ErrorCode::InvalidParams, "t_max must be >= 1");
    if (bin_width_ < 1) throw Error(ErrorCode::InvalidParams, "bin_width must be >= 1");
    for (auto& r : records_) {
        if (r.duration < 1) throw Error(ErrorCode::InvalidParams, "duration must be >= 1 (id " + r.id + ")");
        if (r.arm != 0 && r.arm != 1) throw Error(ErrorCode::InvalidParams, "arm must be 0 or 1 (id " + r.id + ")");
        if (r.duration > t_max_) {
            r.duration = t_max_;
            r.event = false;
        }
        ++arm_counts_[static_cast<std::size_t>(r.arm)];
    }
}

bool PanelDataset::has_treat_start() const {
    return std::any_of(records_.begin(), records_.end(), [](const UnitRecord& r) { return r.treat_start.has_value(); });
}

void PanelDataset::require_both_arms() const {
    if (arm_counts_[0] == 0) throw Error(ErrorCode::EmptyArm, "control arm has no units");
    if (arm_counts_[1] == 0) throw Error(ErrorCode::EmptyArm, "treated arm has no units");
}

PanelDataset parse_compact_csv(std::string_view text) {
    std::vector<UnitRecord> records;
    std::unordered_set<std::string> seen;
    bool have_header = false;
    bool five_columns = false;
    int t_max = 0;
    std::size_t line_no = 0;

    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(start, end - start));
        ++line_no;
        start = end + 1;

        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        auto fields = split_commas(line);
        if (!have_header) {
            const bool four = fields.size() == 4;
            const bool five = fields.size() == 5 && fields[4] == "treat_start";
            if (!(four || five) || fields[0] != "id" || fields[1] != "arm" || fields[2] != "duration" ||
                fields[3] != "event") {
                throw Error(ErrorCode::MalformedRow, "header must be id,arm,duration,event[,treat_start]", line_no);
            }
            five_columns = five;
            have_header = true;
            continue;
        }

        if (fields.size() != 4 && !(five_columns && fields.size() == 5)) {
            throw Error(ErrorCode::MalformedRow, "wrong number of fields", line_no);
        }
        UnitRecord r;
        r.id = std::string(fields[0]);
        if (r.id.empty()) throw Error(ErrorCode::MalformedRow, "empty id", line_no);

        const auto arm = parse_int(fields[1]);
        if (!arm || (*arm != 0 && *arm != 1)) throw Error(ErrorCode::MalformedRow, "arm must be 0 or 1", line_no);
        r.arm = *arm;

        const auto duration = parse_int(fields[2]);
        if (!duration || *duration < 1) throw Error(ErrorCode::MalformedRow, "duration must be an integer >= 1", line_no);
        r.duration = *duration;

        const auto event = parse_int(fields[3]);
        if (!event || (*event != 0 && *event != 1)) throw Error(ErrorCode::MalformedRow, "event must be 0 or 1", line_no);
        r.event = *event == 1;

        if (fields.size() == 5 && !fields[4].empty()) {
            const auto k = parse_int(fields[4]);
            if (!k || *k < 1) throw Error(ErrorCode::MalformedRow, "treat_start must be an integer >= 1", line_no);
            if (r.arm == 0) throw Error(ErrorCode::MalformedRow, "treat_start given for a control unit", line_no);
            r.treat_start = *k;
        }

        if (!seen.insert(r.id).second) throw Error(ErrorCode::DuplicateId, "duplicate id " + r.id, line_no);
        t_max = std::max(t_max, r.duration);
        records.push_back(std::move(r));
    }
    if (!have_header) throw Error(ErrorCode::MalformedRow, "missing header", line_no);
    if (records.empty()) throw Error(ErrorCode::EmptyArm, "no records");

    PanelDataset ds(std::move(records), t_max, 1);
    ds.require_both_arms();
    return ds;
}

PanelDataset parse_compact_csv(std::istream& in) {
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_compact_csv(std::string_view(text));
}

std::string to_compact_csv(const PanelDataset& ds) {
    std::ostringstream out;
    const bool five = ds.has_treat_start();
    out << "id,arm,duration,event" << (five ? ",treat_start" : "") << '\n';
    for (const auto& r : ds.records()) {
        out << r.id << ',' << r.arm << ',' << r.duration << ',' << (r.event ? 1 : 0);
        if (five) {
            out << ',';
            if (r.treat_start) out << *r.treat_start;
        }
        out << '\n';
    }
    return out.str();
}

PanelDataset bin_periods(const PanelDataset& ds, int width) {
    if (width < 1) throw Error(ErrorCode::InvalidParams, "bin width must be >= 1");
    std::vector<UnitRecord> out(ds.records().begin(), ds.records().end());
    for (auto& r : out) {
        r.duration = ceil_div(r.duration, width);
        if (r.treat_start) r.treat_start = ceil_div(*r.treat_start, width);
    }
    return PanelDataset(std::move(out), ceil_div(ds.t_max(), width), ds.bin_width() * width);
}

PanelDataset filter_subgroup(const PanelDataset& ds, const std::function<bool(std::string_view)>& keep) {
    std::vector<UnitRecord> out;
    std::copy_if(ds.records().begin(), ds.records().end(), std::back_inserter(out),
                 [&](const UnitRecord& r) { return keep(r.id); });
    PanelDataset filtered(std::move(out), ds.t_max(), ds.bin_width());
    filtered.require_both_arms();
    return filtered;
}

PanelDataset with_horizon(const PanelDataset& ds, int t_max) {
    return PanelDataset(std::vector<UnitRecord>(ds.records().begin(), ds.records().end()), t_max, ds.bin_width());
}

PanelDataset restrict_to_start(const PanelDataset& ds, int k) {
    if (k < 1) throw Error(ErrorCode::InvalidParams, "treatment start k must be >= 1");
    std::vector<UnitRecord> out;
    for (const auto& r : ds.records()) {
        if (r.duration < k) continue;  // transition or censoring before k
        const auto start = r.effective_treat_start();
        if (start && *start < k) continue;  // treated before k
        UnitRecord u;
        u.id = r.id;
        u.arm = (start && *start == k) ? 1 : 0;
        u.duration = r.duration - k + 1;
        u.event = r.event;
        if (start && *start > k && *start <= r.duration) {
            // Leaves the control risk set once its own treatment begins.
            u.duration = *start - k;
            u.event = false;
        }
        if (u.duration < 1) continue;
        out.push_back(std::move(u));
    }
    const int horizon = std::max(1, ds.t_max() - k + 1);
    return PanelDataset(std::move(out), horizon, ds.bin_width());
}

std::vector<std::string> read_id_list(std::istream& in) {
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        ids.emplace_back(t);
    }
    return ids;
}

}  // namespace tebounds
