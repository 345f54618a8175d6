#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mesynth/au.hpp"
#include "mesynth/csv.hpp"
#include "mesynth/error.hpp"

namespace mesynth {

// Parsing of real-dataset inputs: per-frame AU time series (OpenFace-style
// CSV), clip annotation tables, and identity lists.

struct AuFrame {
    std::int64_t index = 0;
    AuVector au;

    friend bool operator==(const AuFrame&, const AuFrame&) = default;
};

struct AuTimeSeries {
    std::string clip_id;
    std::vector<AuFrame> frames;  // strictly increasing indices, starting at 0

    const AuVector* find(std::int64_t frame_index) const {
        auto it = std::lower_bound(frames.begin(), frames.end(), frame_index,
                                   [](const AuFrame& f, std::int64_t idx) { return f.index < idx; });
        if (it == frames.end() || it->index != frame_index) return nullptr;
        return &it->au;
    }

    friend bool operator==(const AuTimeSeries&, const AuTimeSeries&) = default;
};

inline void validate_series(const AuTimeSeries& s) {
    if (s.frames.size() < 2) {
        fail("InvalidSeries", "clip '" + s.clip_id + "' has fewer than 2 frames");
    }
    if (s.frames.front().index != 0) {
        fail("InvalidSeries", "clip '" + s.clip_id + "' frame indices must start at 0");
    }
    for (std::size_t i = 1; i < s.frames.size(); ++i) {
        if (s.frames[i].index <= s.frames[i - 1].index) {
            fail("DuplicateFrame", "clip '" + s.clip_id + "' frame index " +
                                       std::to_string(s.frames[i].index) + " is not increasing");
        }
    }
}

struct ClipAnnotation {
    std::string clip_id;
    std::string dataset;
    std::string subject_id;
    std::string raw_label;
    EmotionClass label = EmotionClass::Positive;  // mapped from raw_label
    std::int64_t onset = 0;
    std::int64_t apex = 0;
    std::optional<std::int64_t> offset;
    std::int64_t n_frames = 0;
};

inline void validate_annotation(const ClipAnnotation& a) {
    if (a.onset < 0 || a.onset >= a.apex || a.apex >= a.n_frames) {
        fail("InvalidAnnotation", "clip '" + a.clip_id + "': require 0 <= onset < apex < n_frames, got onset=" +
                                      std::to_string(a.onset) + " apex=" + std::to_string(a.apex) +
                                      " n_frames=" + std::to_string(a.n_frames));
    }
    if (a.offset && *a.offset < a.apex) {
        fail("InvalidAnnotation", "clip '" + a.clip_id + "': offset must be >= apex");
    }
}

struct ClipRecord {
    ClipAnnotation annotation;
    AuTimeSeries series;
    EmotionClass label = EmotionClass::Positive;
};

struct IdentityPool {
    struct Entry {
        std::string id;
        std::string face_ref;
    };
    std::vector<Entry> entries;  // file order is the canonical sampling order

    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
};

namespace detail {

inline double parse_double_cell(const std::string& cell, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        fail("ParseError", "row " + std::to_string(row) + ", column '" + column +
                               "': cell '" + cell + "' is not numeric");
    }
    return value;
}

inline std::int64_t parse_int_cell(const std::string& cell, std::size_t row, const std::string& column) {
    std::int64_t value = 0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        fail("ParseError", "row " + std::to_string(row) + ", column '" + column +
                               "': cell '" + cell + "' is not an integer");
    }
    return value;
}

inline std::string au_column_name(int au_number) {
    std::string n = std::to_string(au_number);
    if (n.size() < 2) n = "0" + n;
    return "AU" + n + "_r";
}

}  // namespace detail

// Parses an OpenFace-style AU intensity CSV. Required columns: "frame" and
// the 17 intensity columns AU01_r ... AU45_r; an optional "clip_id" column
// splits the file into several clips, otherwise the whole file is one clip
// named `default_clip_id`. Unknown extra columns (confidence, pose, gaze
// ...) are ignored. Raw intensities are divided by `scale_max` and clamped
// to [0,1]. Rows may arrive in any order; they are grouped per clip and
// sorted by frame index.
inline std::vector<AuTimeSeries> parse_au_csv(std::istream& in, double scale_max = 5.0,
                                              const std::string& default_clip_id = "clip") {
    std::string line;
    if (!read_line(in, line)) fail("ParseError", "empty AU csv: header row required");
    std::vector<std::string> header = split_csv_line(line);

    std::optional<std::size_t> frame_col;
    std::optional<std::size_t> clip_col;
    std::array<std::optional<std::size_t>, kNumAus> au_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "frame") frame_col = c;
        if (header[c] == "clip_id") clip_col = c;
        for (std::size_t a = 0; a < kNumAus; ++a) {
            if (header[c] == detail::au_column_name(kAuNumbers[a])) au_cols[a] = c;
        }
    }
    if (!frame_col) fail("MissingColumn", "required column 'frame' not found");
    for (std::size_t a = 0; a < kNumAus; ++a) {
        if (!au_cols[a]) {
            fail("MissingColumn", "required column '" + detail::au_column_name(kAuNumbers[a]) +
                                      "' not found (AU" + std::to_string(kAuNumbers[a]) + ")");
        }
    }

    // clip id -> frames, in first-appearance order of clips
    std::vector<std::string> clip_order;
    std::map<std::string, std::vector<AuFrame>> by_clip;

    std::size_t row = 1;
    while (read_line(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() < header.size()) {
            fail("ParseError", "row " + std::to_string(row) + ": expected " +
                                   std::to_string(header.size()) + " cells, got " +
                                   std::to_string(cells.size()));
        }
        std::string clip = clip_col ? cells[*clip_col] : default_clip_id;
        std::int64_t frame = detail::parse_int_cell(cells[*frame_col], row, "frame");

        std::array<double, kNumAus> values{};
        for (std::size_t a = 0; a < kNumAus; ++a) {
            double raw = detail::parse_double_cell(cells[*au_cols[a]], row,
                                                   detail::au_column_name(kAuNumbers[a]));
            values[a] = normalize_intensity(raw, scale_max);
        }

        auto [it, inserted] = by_clip.try_emplace(clip);
        if (inserted) clip_order.push_back(clip);
        it->second.push_back(AuFrame{frame, AuVector(values)});
    }

    std::vector<AuTimeSeries> out;
    out.reserve(clip_order.size());
    for (const std::string& clip : clip_order) {
        AuTimeSeries series;
        series.clip_id = clip;
        series.frames = std::move(by_clip[clip]);
        std::sort(series.frames.begin(), series.frames.end(),
                  [](const AuFrame& a, const AuFrame& b) { return a.index < b.index; });
        for (std::size_t i = 1; i < series.frames.size(); ++i) {
            if (series.frames[i].index == series.frames[i - 1].index) {
                fail("DuplicateFrame", "clip '" + clip + "' has duplicate frame index " +
                                           std::to_string(series.frames[i].index));
            }
        }
        validate_series(series);
        out.push_back(std::move(series));
    }
    return out;
}

// Inverse of parse_au_csv for a batch of series sharing one file. Intensities
// are written back on the raw scale with 6 decimals.
inline void serialize_au_csv(std::span<const AuTimeSeries> batch, std::ostream& out,
                             double scale_max = 5.0) {
    out << "clip_id,frame";
    for (int au : kAuNumbers) out << ',' << detail::au_column_name(au);
    out << '\n';
    char buf[32];
    for (const AuTimeSeries& series : batch) {
        for (const AuFrame& frame : series.frames) {
            out << series.clip_id << ',' << frame.index;
            for (std::size_t a = 0; a < kNumAus; ++a) {
                std::snprintf(buf, sizeof(buf), "%.6f", frame.au[a] * scale_max);
                out << ',' << buf;
            }
            out << '\n';
        }
    }
}

// Parses the clip annotation table: CSV with columns clip_id, dataset,
// subject_id, label, onset, apex, offset, n_frames ("-" marks an absent
// offset). Every row is validated and its label mapped through `map`.
inline std::vector<ClipAnnotation> parse_annotations(std::istream& in, const LabelMap& map) {
    std::string line;
    if (!read_line(in, line)) fail("ParseError", "empty annotation csv: header row required");
    std::vector<std::string> header = split_csv_line(line);

    auto col = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == name) return c;
        }
        return std::nullopt;
    };
    const std::array<std::string, 7> required = {"clip_id", "dataset",  "subject_id", "label",
                                                 "onset",   "apex",     "n_frames"};
    std::map<std::string, std::size_t> cols;
    for (const std::string& name : required) {
        auto c = col(name);
        if (!c) fail("MissingColumn", "required column '" + name + "' not found");
        cols[name] = *c;
    }
    std::optional<std::size_t> offset_col = col("offset");

    std::vector<ClipAnnotation> out;
    std::size_t row = 1;
    while (read_line(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() < header.size()) {
            fail("ParseError", "row " + std::to_string(row) + ": expected " +
                                   std::to_string(header.size()) + " cells, got " +
                                   std::to_string(cells.size()));
        }
        ClipAnnotation a;
        a.clip_id = cells[cols["clip_id"]];
        a.dataset = cells[cols["dataset"]];
        a.subject_id = cells[cols["subject_id"]];
        a.raw_label = cells[cols["label"]];
        a.label = map.map_label(a.raw_label);
        a.onset = detail::parse_int_cell(cells[cols["onset"]], row, "onset");
        a.apex = detail::parse_int_cell(cells[cols["apex"]], row, "apex");
        a.n_frames = detail::parse_int_cell(cells[cols["n_frames"]], row, "n_frames");
        if (offset_col) {
            const std::string& cell = cells[*offset_col];
            if (!cell.empty() && cell != "-") {
                a.offset = detail::parse_int_cell(cell, row, "offset");
            }
        }
        validate_annotation(a);
        out.push_back(std::move(a));
    }
    return out;
}

inline void serialize_annotations(std::span<const ClipAnnotation> annotations, std::ostream& out) {
    out << "clip_id,dataset,subject_id,label,onset,apex,offset,n_frames\n";
    for (const ClipAnnotation& a : annotations) {
        out << a.clip_id << ',' << a.dataset << ',' << a.subject_id << ',' << a.raw_label << ','
            << a.onset << ',' << a.apex << ',';
        if (a.offset) {
            out << *a.offset;
        } else {
            out << '-';
        }
        out << ',' << a.n_frames << '\n';
    }
}

struct JoinReport {
    std::vector<std::string> unmatched_annotations;  // clip ids without a series
    std::vector<std::string> unmatched_series;       // clip ids without an annotation
};

struct JoinResult {
    std::vector<ClipRecord> records;
    JoinReport report;
};

// Inner join of annotations and series on clip id. A matched clip whose
// onset or apex frame is absent from its series is a hard error.
inline JoinResult join_clips(std::span<const ClipAnnotation> annotations,
                             std::span<const AuTimeSeries> series) {
    std::map<std::string, const AuTimeSeries*> by_id;
    for (const AuTimeSeries& s : series) by_id[s.clip_id] = &s;

    JoinResult result;
    std::set<std::string> matched;
    for (const ClipAnnotation& a : annotations) {
        auto it = by_id.find(a.clip_id);
        if (it == by_id.end()) {
            result.report.unmatched_annotations.push_back(a.clip_id);
            continue;
        }
        const AuTimeSeries& s = *it->second;
        if (!s.find(a.onset) || !s.find(a.apex)) {
            fail("FrameCoverage", "clip '" + a.clip_id + "': series does not cover onset " +
                                      std::to_string(a.onset) + " and apex " + std::to_string(a.apex));
        }
        matched.insert(a.clip_id);
        result.records.push_back(ClipRecord{a, s, a.label});
    }
    for (const AuTimeSeries& s : series) {
        if (!matched.count(s.clip_id)) result.report.unmatched_series.push_back(s.clip_id);
    }
    return result;
}

// Identity list: one "id<TAB>face-ref" per line, '#' comment lines ignored.
inline IdentityPool load_identities(std::istream& in) {
    IdentityPool pool;
    std::set<std::string> seen;
    std::string line;
    std::size_t row = 0;
    while (read_line(in, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            fail("ParseError", "identity line " + std::to_string(row) +
                                   ": expected 'id<TAB>face-ref'");
        }
        std::string id = trim(std::string_view(line).substr(0, tab));
        std::string face_ref = trim(std::string_view(line).substr(tab + 1));
        if (id.empty()) fail("ParseError", "identity line " + std::to_string(row) + ": empty id");
        if (!seen.insert(id).second) {
            fail("DuplicateIdentity", "identity '" + id + "' appears more than once");
        }
        pool.entries.push_back(IdentityPool::Entry{std::move(id), std::move(face_ref)});
    }
    return pool;
}

inline void serialize_identities(const IdentityPool& pool, std::ostream& out) {
    for (const auto& e : pool.entries) out << e.id << '\t' << e.face_ref << '\n';
}

}  // namespace mesynth
