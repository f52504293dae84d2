#pragma once
// Delimited-text time series ingestion, modal reference files and
// crash-safe output writing.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "falsikit/errors.hpp"
#include "falsikit/modal.hpp"
#include "falsikit/series.hpp"

namespace falsikit {

/// Shortest text that round-trips the double ("%.17g").
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes to `path.tmp` then renames, so readers never see a partial file.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace detail {

// Commas, semicolons and blanks all separate fields; runs collapse, so an
// empty field shows up as a short row.
inline std::vector<std::string_view> split_fields(std::string_view line) {
    auto is_sep = [](char c) { return c == ',' || c == ';' || c == ' ' || c == '\t' || c == '\r'; };
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_sep(line[i])) ++i;
        std::size_t j = i;
        while (j < line.size() && !is_sep(line[j])) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline bool parse_number(std::string_view f, double& v) {
    const std::string s(f);
    errno = 0;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && !s.empty() && errno != ERANGE;
}

} // namespace detail

/// Numeric rows of a delimited file. Comma, semicolon, tab and blank
/// delimiters are accepted; a first non-numeric line is taken as a header;
/// lines starting with '#' and blank lines are skipped.
struct DelimitedTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> line_numbers; // 1-based file line of each row
};

inline DelimitedTable read_delimited(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    DelimitedTable t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool first = true;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string_view line(text.data() + pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        const auto fields = detail::split_fields(line);
        if (fields.empty() || fields[0].front() == '#') {
            if (nl == text.size()) break;
            continue;
        }
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (!detail::parse_number(fields[i], row[i])) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (first) {
                for (auto f : fields) t.header.emplace_back(f);
                first = false;
                continue;
            }
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
        }
        first = false;
        for (double v : row)
            if (!std::isfinite(v)) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": NaN or infinite entry");
        if (!t.rows.empty() && row.size() != t.rows.front().size())
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(t.rows.front().size()) + " columns, found " + std::to_string(row.size()));
        t.rows.push_back(std::move(row));
        t.line_numbers.push_back(line_no);
        if (nl == text.size()) break;
    }
    if (t.rows.empty()) throw ParseError(path.string() + ": no data rows");
    return t;
}

namespace detail {

// Column 0 is time; successive steps must agree with the first within 1e-6 dt.
inline double check_uniform_grid(const DelimitedTable& t, const std::filesystem::path& path) {
    if (t.rows.size() < 2) throw ParseError(path.string() + ": need at least two rows to infer dt");
    const double dt = t.rows[1][0] - t.rows[0][0];
    if (!(dt > 0.0)) throw ParseError(path.string() + ":" + std::to_string(t.line_numbers[1]) + ": time must increase");
    for (std::size_t k = 1; k < t.rows.size(); ++k) {
        const double step = t.rows[k][0] - t.rows[k - 1][0];
        if (std::fabs(step - dt) >= 1e-6 * dt)
            throw ParseError(path.string() + ":" + std::to_string(t.line_numbers[k]) +
                             ": non-uniform time grid (step " + format_double(step) + " vs dt " + format_double(dt) + ")");
    }
    return dt;
}

inline void expect_columns(const DelimitedTable& t, std::size_t data_columns, const std::filesystem::path& path) {
    if (t.rows.front().size() != data_columns + 1)
        throw ParseError(path.string() + ":" + std::to_string(t.line_numbers.front()) + ": expected " +
                         std::to_string(data_columns + 1) + " columns (time + " + std::to_string(data_columns) +
                         "), found " + std::to_string(t.rows.front().size()));
}

} // namespace detail

/// Excitation file: time column plus `channel_count` value columns.
inline ExcitationRecord ingest_excitation(const std::filesystem::path& path, std::size_t channel_count,
                                          std::string label = {}) {
    const DelimitedTable t = read_delimited(path);
    detail::expect_columns(t, channel_count, path);
    ExcitationRecord r;
    r.dt = detail::check_uniform_grid(t, path);
    r.channel_count = channel_count;
    r.label = label.empty() ? path.stem().string() : std::move(label);
    r.samples.reserve(t.rows.size() * channel_count);
    for (const auto& row : t.rows)
        for (std::size_t c = 0; c < channel_count; ++c) r.samples.push_back(row[c + 1]);
    r.validate();
    return r;
}

/// Measurement file: time column plus one column per named channel.
inline MeasurementSet ingest_measurement(const std::filesystem::path& path, const std::vector<std::string>& channels) {
    const DelimitedTable t = read_delimited(path);
    detail::expect_columns(t, channels.size(), path);
    MeasurementSet m;
    m.dt = detail::check_uniform_grid(t, path);
    m.channels = channels;
    m.values.reserve(t.rows.size() * channels.size());
    for (const auto& row : t.rows)
        for (std::size_t c = 0; c < channels.size(); ++c) m.values.push_back(row[c + 1]);
    return m;
}

inline std::string series_to_text(const ExcitationRecord& r) {
    std::string s = "time";
    for (std::size_t c = 0; c < r.channel_count; ++c) s += ",ch" + std::to_string(c);
    s += '\n';
    for (std::size_t k = 0; k < r.steps(); ++k) {
        s += format_double(static_cast<double>(k) * r.dt);
        for (std::size_t c = 0; c < r.channel_count; ++c) s += "," + format_double(r.at(k, c));
        s += '\n';
    }
    return s;
}

/// time, channel values..., then optional extra columns named `extra_suffix`
/// per channel (used for the weighted std of predictions).
inline std::string series_to_text(const StackedSeries& s, const std::vector<double>* extra = nullptr,
                                  const std::string& extra_suffix = "_std") {
    std::string out = "time";
    for (const auto& c : s.channels) out += "," + c;
    if (extra)
        for (const auto& c : s.channels) out += "," + c + extra_suffix;
    out += '\n';
    const std::size_t nc = s.channel_count();
    for (std::size_t k = 0; k < s.steps(); ++k) {
        out += format_double(static_cast<double>(k) * s.dt);
        for (std::size_t c = 0; c < nc; ++c) out += "," + format_double(s.at(k, c));
        if (extra)
            for (std::size_t c = 0; c < nc; ++c) out += "," + format_double((*extra)[k * nc + c]);
        out += '\n';
    }
    return out;
}

/// Modal reference:
///   [frequencies]   one value per line (Hz)
///   [shapes]        one row per DOF, one column per mode
inline ModalResult read_modal_reference(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    enum { None, Freq, Shapes } section = None;
    ModalResult r;
    std::vector<std::vector<double>> shape_rows;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = detail::split_fields(line);
        if (fields.empty() || fields[0].front() == '#') continue;
        if (fields[0] == "[frequencies]") {
            section = Freq;
            continue;
        }
        if (fields[0] == "[shapes]") {
            section = Shapes;
            continue;
        }
        std::vector<double> row(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (!detail::parse_number(fields[i], row[i]) || !std::isfinite(row[i]))
                throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                                 std::string(fields[i]) + "'");
        if (section == Freq) {
            for (double v : row) r.frequencies.push_back(v);
        } else if (section == Shapes) {
            shape_rows.push_back(std::move(row));
        } else {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": data before a section header");
        }
    }
    const std::size_t modes = r.frequencies.size();
    if (modes == 0) throw ParseError(path.string() + ": no [frequencies] entries");
    if (shape_rows.empty()) throw ParseError(path.string() + ": no [shapes] rows");
    r.mode_shapes.resize(static_cast<Eigen::Index>(shape_rows.size()), static_cast<Eigen::Index>(modes));
    for (std::size_t i = 0; i < shape_rows.size(); ++i) {
        if (shape_rows[i].size() != modes)
            throw ParseError(path.string() + ": shape row " + std::to_string(i + 1) + " has " +
                             std::to_string(shape_rows[i].size()) + " columns, expected " + std::to_string(modes));
        for (std::size_t j = 0; j < modes; ++j)
            r.mode_shapes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = shape_rows[i][j];
    }
    for (double f : r.frequencies) r.eigenvalues.push_back(std::pow(2.0 * std::numbers::pi * f, 2));
    return r;
}

inline std::string modal_reference_to_text(const ModalResult& m) {
    std::string s = "[frequencies]\n";
    for (double f : m.frequencies) s += format_double(f) + "\n";
    s += "[shapes]\n";
    for (Eigen::Index i = 0; i < m.mode_shapes.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.mode_shapes.cols(); ++j) s += (j ? " " : "") + format_double(m.mode_shapes(i, j));
        s += "\n";
    }
    return s;
}

} // namespace falsikit
