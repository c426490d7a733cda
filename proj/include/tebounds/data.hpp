#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tebounds {

/// One unit of a randomized event-history sample in compact form: at most one
/// transition, observed in period `duration` (event) or censored there.
struct UnitRecord {
    std::string id;
    int arm = 0;                     // 1 = treated, 0 = control
    int duration = 1;                // last observed period, >= 1
    bool event = false;              // transition in `duration`
    std::optional<int> treat_start;  // period treatment began; blank means 1 for treated units

    /// Period in which treatment starts for this unit, or nullopt if never treated.
    std::optional<int> effective_treat_start() const {
        if (arm == 0) return std::nullopt;
        return treat_start.value_or(1);
    }

    friend bool operator==(const UnitRecord&, const UnitRecord&) = default;
};

/// Immutable collection of unit records with an analysis horizon.
///
/// Construction enforces the horizon: durations beyond `t_max` become
/// censored at `t_max`.
class PanelDataset {
public:
    PanelDataset(std::vector<UnitRecord> records, int t_max, int bin_width = 1);

    std::span<const UnitRecord> records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    int t_max() const { return t_max_; }
    int bin_width() const { return bin_width_; }
    std::size_t arm_count(int arm) const { return arm_counts_[static_cast<std::size_t>(arm)]; }
    bool has_treat_start() const;

    /// Throws EmptyArm unless both arms have at least one unit.
    void require_both_arms() const;

private:
    std::vector<UnitRecord> records_;
    int t_max_;
    int bin_width_;
    std::array<std::size_t, 2> arm_counts_{};
};

/// Parses the compact CSV format (`id,arm,duration,event[,treat_start]`).
/// Result has bin_width = 1 and t_max = max duration.
PanelDataset parse_compact_csv(std::string_view text);
PanelDataset parse_compact_csv(std::istream& in);

/// Inverse of parse_compact_csv. Emits the treat_start column only when some
/// record carries one.
std::string to_compact_csv(const PanelDataset& ds);

/// Aggregates raw periods into analysis periods of `width` raw periods each.
PanelDataset bin_periods(const PanelDataset& ds, int width);

/// Keeps the records whose id satisfies `keep`; t_max is unchanged.
PanelDataset filter_subgroup(const PanelDataset& ds, const std::function<bool(std::string_view)>& keep);

/// Re-applies a (shorter or longer) analysis horizon.
PanelDataset with_horizon(const PanelDataset& ds, int t_max);

/// Sample for the effect of a treatment started in period k: units that are
/// transition-free and untreated through k-1, re-indexed so that k is period 1.
/// Treated arm: treatment starts exactly at k. Control arm: not treated at k;
/// units treated later are censored in the period before their start.
PanelDataset restrict_to_start(const PanelDataset& ds, int k);

/// Reads one id per line (blank lines and `#` comments ignored).
std::vector<std::string> read_id_list(std::istream& in);

}  // namespace tebounds
