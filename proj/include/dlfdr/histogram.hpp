#ifndef DLFDR_HISTOGRAM_HPP
#define DLFDR_HISTOGRAM_HPP

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace dlfdr {

using count_t = std::int64_t;

/// Counts above this are treated as corrupt input unless the caller raises it.
inline constexpr count_t kDefaultCountCeiling = 1'000'000;

/// Sparse histogram of per-position counts: j -> n_j, where n_j is the
/// number of positions carrying exactly j events. Only n_j >= 1 is stored.
class CountHistogram {
public:
    CountHistogram() = default;

    static CountHistogram from_positions(std::span<const count_t> positions,
                                         count_t ceiling = kDefaultCountCeiling)
    {
        if (positions.empty()) {
            throw input_error("no positions");
        }
        std::map<count_t, count_t> tally;
        for (count_t a : positions) {
            check_count(a, ceiling);
            ++tally[a];
        }
        return CountHistogram(std::move(tally));
    }

    /// Builds from an already tallied map; zero entries are dropped.
    static CountHistogram from_tally(const std::map<count_t, count_t>& tally,
                                     count_t ceiling = kDefaultCountCeiling)
    {
        std::map<count_t, count_t> clean;
        for (auto [j, nj] : tally) {
            check_count(j, ceiling);
            if (nj < 0) {
                throw input_error("negative number of positions at count " + std::to_string(j));
            }
            if (nj > 0) {
                clean.emplace(j, nj);
            }
        }
        if (clean.empty()) {
            throw input_error("no positions");
        }
        return CountHistogram(std::move(clean));
    }

    /// N, the number of positions.
    count_t total() const noexcept { return total_; }
    /// K, the largest observed count.
    count_t max_count() const noexcept { return counts_.empty() ? 0 : counts_.rbegin()->first; }
    /// L, the number of distinct observed counts.
    std::size_t support_size() const noexcept { return counts_.size(); }

    count_t at(count_t j) const noexcept
    {
        auto it = counts_.find(j);
        return it == counts_.end() ? 0 : it->second;
    }

    const std::map<count_t, count_t>& counts() const noexcept { return counts_; }

    /// Number of distinct observed counts j <= c.
    std::size_t distinct_up_to(count_t c) const noexcept
    {
        return static_cast<std::size_t>(
            std::distance(counts_.begin(), counts_.upper_bound(c)));
    }

    /// Sum of n_j over j <= c.
    count_t positions_up_to(count_t c) const noexcept
    {
        count_t s = 0;
        for (auto it = counts_.begin(); it != counts_.end() && it->first <= c; ++it) {
            s += it->second;
        }
        return s;
    }

    /// Expands back to one entry per position, in ascending count order.
    std::vector<count_t> expand() const
    {
        std::vector<count_t> out;
        out.reserve(static_cast<std::size_t>(total_));
        for (auto [j, nj] : counts_) {
            out.insert(out.end(), static_cast<std::size_t>(nj), j);
        }
        return out;
    }

    friend bool operator==(const CountHistogram&, const CountHistogram&) = default;

private:
    explicit CountHistogram(std::map<count_t, count_t> counts)
        : counts_(std::move(counts))
    {
        for (auto [j, nj] : counts_) {
            total_ += nj;
        }
    }

    static void check_count(count_t j, count_t ceiling)
    {
        if (j < 0) {
            throw input_error("negative count " + std::to_string(j));
        }
        if (j > ceiling) {
            throw input_error("count " + std::to_string(j) + " exceeds ceiling " +
                              std::to_string(ceiling));
        }
    }

    std::map<count_t, count_t> counts_;
    count_t total_ = 0;
};

struct NullMassSplit {
    count_t at_or_below;  ///< n = sum_{j <= C} n_j
    count_t above;        ///< N - n
};

inline NullMassSplit null_mass_split(const CountHistogram& h, count_t cutoff)
{
    if (cutoff < 0) {
        throw domain_error("negative cut-off");
    }
    if (cutoff > h.max_count()) {
        throw domain_error("cut-off beyond support");
    }
    const count_t n = h.positions_up_to(cutoff);
    return {n, h.total() - n};
}

// ---------------------------------------------------------------------------
// TSV ingestion

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_tab(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline count_t parse_count(std::string_view field, std::size_t line_no)
{
    count_t v = 0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc{} || ptr != end || field.empty()) {
        throw input_error("line " + std::to_string(line_no) + ": not an integer: '" +
                          std::string(field) + "'");
    }
    return v;
}

} // namespace detail

/// Reads either `position<TAB>count` (one row per position) or
/// `count<TAB>n_positions` (one row per distinct count). The schema is chosen
/// from the header row; `#` lines and blank lines are skipped.
inline CountHistogram read_histogram_tsv(std::istream& in, count_t ceiling = kDefaultCountCeiling)
{
    enum class Schema { unknown, per_position, tallied } schema = Schema::unknown;
    std::map<count_t, count_t> tally;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') {
            continue;
        }
        const auto fields = detail::split_tab(body);
        if (schema == Schema::unknown) {
            if (fields.size() == 2 && fields[0] == "position" && fields[1] == "count") {
                schema = Schema::per_position;
            } else if (fields.size() == 2 && fields[0] == "count" && fields[1] == "n_positions") {
                schema = Schema::tallied;
            } else {
                throw input_error("line " + std::to_string(line_no) +
                                  ": expected header 'position\\tcount' or 'count\\tn_positions'");
            }
            continue;
        }
        if (fields.size() != 2) {
            throw input_error("line " + std::to_string(line_no) + ": expected 2 tab-separated fields");
        }
        if (schema == Schema::per_position) {
            const count_t a = detail::parse_count(fields[1], line_no);
            if (a < 0) {
                throw input_error("line " + std::to_string(line_no) + ": negative count");
            }
            ++tally[a];
        } else {
            const count_t j = detail::parse_count(fields[0], line_no);
            const count_t nj = detail::parse_count(fields[1], line_no);
            if (j < 0 || nj < 0) {
                throw input_error("line " + std::to_string(line_no) + ": negative value");
            }
            if (tally.contains(j)) {
                throw input_error("line " + std::to_string(line_no) + ": duplicate count " +
                                  std::to_string(j));
            }
            tally[j] = nj;
        }
    }
    if (schema == Schema::unknown) {
        throw input_error("empty input");
    }
    return CountHistogram::from_tally(tally, ceiling);
}

inline CountHistogram read_histogram_tsv(const std::string& path,
                                         count_t ceiling = kDefaultCountCeiling)
{
    std::ifstream in(path);
    if (!in) {
        throw input_error("cannot open '" + path + "'");
    }
    return read_histogram_tsv(in, ceiling);
}

} // namespace dlfdr

#endif // DLFDR_HISTOGRAM_HPP
