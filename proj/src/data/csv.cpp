#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "zonectl/data.hpp"

namespace zonectl::data {

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

void append_double(std::string& out, double v) { out += format_number(v); }

bool parse_double(std::string_view field, double& out) {
    if (field.empty()) return false;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
    return res.ec == std::errc{} && res.ptr == field.data() + field.size() && std::isfinite(out);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

}  // namespace

std::string format_csv(const std::vector<RawRecord>& records) {
    std::string out;
    out.reserve(64 + records.size() * 96);
    out.append(kCsvHeader);
    out.push_back('\n');
    for (const auto& r : records) {
        out.append(format_timestamp(r.timestamp));
        for (double v : {r.t_zone, r.t_neigh, r.t_out, r.solar, r.power}) {
            out.push_back(',');
            if (r.valid) append_double(out, v);
        }
        out.push_back(',');
        out.push_back(mode_code(r.mode));
        out.push_back('\n');
    }
    return out;
}

void write_csv(const std::vector<RawRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << format_csv(records);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

CsvData parse_csv(std::string_view text) {
    CsvData data;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!header_seen) {
            if (line != kCsvHeader) {
                throw std::invalid_argument("line 1: expected header '" + std::string(kCsvHeader) +
                                            "', got '" + std::string(line) + "'");
            }
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;

        const auto fields = split_fields(line);
        if (fields.size() != 7) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 7 fields, got " +
                                        std::to_string(fields.size()));
        }
        RawRecord rec;
        try {
            rec.timestamp = parse_timestamp(fields[0]);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (fields[6] == "H") {
            rec.mode = Mode::heating;
        } else if (fields[6] == "C") {
            rec.mode = Mode::cooling;
        } else {
            rec.valid = false;
        }
        double* targets[] = {&rec.t_zone, &rec.t_neigh, &rec.t_out, &rec.solar, &rec.power};
        for (std::size_t i = 0; i < 5; ++i) {
            if (!parse_double(fields[i + 1], *targets[i])) rec.valid = false;
        }
        if (rec.valid && rec.solar < 0.0) rec.valid = false;
        if (rec.valid && ((rec.mode == Mode::heating && rec.power < 0.0) ||
                          (rec.mode == Mode::cooling && rec.power > 0.0))) {
            rec.valid = false;
        }
        if (!rec.valid) {
            rec.t_zone = rec.t_neigh = rec.t_out = rec.solar = rec.power =
                std::numeric_limits<double>::quiet_NaN();
            data.bad_rows.push_back({line_no, "unparsable or inconsistent fields"});
        }

        if (!data.records.empty()) {
            const auto prev = data.records.back().timestamp;
            if (rec.timestamp <= prev) {
                throw std::invalid_argument("line " + std::to_string(line_no) +
                                            ": timestamps must be strictly increasing");
            }
            const auto delta = rec.timestamp - prev;
            if (delta != kStep) {
                data.gaps.push_back({prev, delta / kStep - (delta % kStep == decltype(delta){0} ? 1 : 0),
                                     line_no});
            }
        }
        data.records.push_back(rec);
    }
    if (!header_seen) throw std::invalid_argument("empty CSV: missing header");
    return data;
}

CsvData load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

}  // namespace zonectl::data
