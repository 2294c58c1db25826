#pragma once
// Measured zone data: records, synthetic generation, CSV I/O, trajectory
// extraction and normalization.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace zonectl::data {

using Timestamp = std::chrono::sys_seconds;

/// Sampling period of every series: 15 minutes.
inline constexpr std::chrono::seconds kStep{900};
inline constexpr double kStepHours = 0.25;
inline constexpr int kStepsPerDay = 96;

enum class Mode { heating, cooling };

char mode_code(Mode m);  // 'H' / 'C'

/// "2023-01-01T00:15:00Z"
std::string format_timestamp(Timestamp t);
/// Accepts "YYYY-MM-DDTHH:MM:SSZ" (the trailing Z is optional). Throws
/// std::invalid_argument on malformed input.
Timestamp parse_timestamp(std::string_view text);

struct CalendarInfo {
    int month = 1;               // 1..12
    int day_of_year = 0;         // 0-based
    int day_of_week = 0;         // 0 = Monday .. 6 = Sunday
    double hour_of_day = 0.0;    // fractional hour in [0, 24)
};
CalendarInfo calendar(Timestamp t);

struct RawRecord {
    Timestamp timestamp{};
    double t_zone = 0.0;   // degC
    double t_neigh = 0.0;  // degC
    double t_out = 0.0;    // degC
    double solar = 0.0;    // W/m^2
    double power = 0.0;    // kW, + heating / - cooling
    Mode mode = Mode::heating;
    /// False for rows whose fields could not be parsed; such rows are kept as
    /// explicit gaps and never end up inside a trajectory.
    bool valid = true;

    bool operator==(const RawRecord&) const = default;
};

struct GeneratorConfig {
    int days = 365;
    std::uint64_t seed = 1;
    Timestamp start = std::chrono::sys_days{std::chrono::year{2023} / 1 / 1};
    /// Measurement noise on the zone temperature, degC.
    double measurement_sigma = 0.1;
};

/// Synthetic year: seasonal + diurnal + AR(1) weather, clipped diurnal solar
/// bell with cloud noise, and a hidden 2-node RC zone (air + envelope) driven
/// by a scripted hysteresis controller with random excitation. Deterministic
/// per seed. Throws std::invalid_argument when days < 3.
std::vector<RawRecord> generate_synthetic(const GeneratorConfig& config);
std::vector<RawRecord> generate_synthetic(int days, std::uint64_t seed);

/// Heating from October to April, cooling from May to September.
Mode season_of(Timestamp t);

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kCsvHeader = "timestamp,t_zone,t_neigh,t_out,solar,power,mode";

struct Gap {
    Timestamp after{};         // last good timestamp before the gap
    std::int64_t missing_steps = 0;  // number of absent 15-minute samples
    std::size_t line = 0;      // CSV line where the gap was detected (1-based)
};

struct CsvIssue {
    std::size_t line = 0;
    std::string message;
};

struct CsvData {
    std::vector<RawRecord> records;
    std::vector<Gap> gaps;
    /// Rows kept as invalid records because a numeric field did not parse.
    std::vector<CsvIssue> bad_rows;
};

/// Throws std::invalid_argument on a header mismatch or a malformed timestamp
/// (with the line number), std::runtime_error if the file cannot be opened.
CsvData load_csv(const std::filesystem::path& path);
CsvData parse_csv(std::string_view text);
void write_csv(const std::vector<RawRecord>& records, const std::filesystem::path& path);
std::string format_csv(const std::vector<RawRecord>& records);

/// Shortest decimal text that reads back to the same double. Used for every
/// numeric output so reruns are byte-identical.
std::string format_number(double v);

// ---------------------------------------------------------------------------
// Trajectories

struct Trajectory {
    std::vector<RawRecord> records;

    std::size_t length() const { return records.size(); }
    Mode mode() const { return records.front().mode; }
};

inline constexpr std::size_t kMinTrajectoryLength = 48;   // 12 h
inline constexpr std::size_t kMaxTrajectoryLength = 288;  // 72 h
inline constexpr std::size_t kTrajectoryStride = 4;       // 1 h

/// Splits the stream into maximal runs that are valid, gap-free, strictly on
/// the 15-minute grid and of constant mode. A run of n >= max_len samples
/// yields floor((n - max_len) / stride) + 1 windows of length max_len starting
/// every stride samples; a run with min_len <= n < max_len yields itself.
std::vector<Trajectory> extract_trajectories(const std::vector<RawRecord>& records,
                                             std::size_t min_len = kMinTrajectoryLength,
                                             std::size_t max_len = kMaxTrajectoryLength,
                                             std::size_t stride = kTrajectoryStride);

struct DatasetSplit {
    std::vector<Trajectory> train;
    std::vector<Trajectory> validation;
};

struct SplitConfig {
    double validation_fraction = 0.2;
    std::size_t min_len = kMinTrajectoryLength;
    std::size_t max_len = kMaxTrajectoryLength;
    std::size_t stride = kTrajectoryStride;
};

/// Time-based split: the final validation_fraction of the calendar span is
/// held out before windows are extracted, so no trajectory crosses the cut.
DatasetSplit split_dataset(const std::vector<RawRecord>& records, const SplitConfig& config = {});

/// Picks count items evenly spaced over [0, n); all of them if count >= n.
std::vector<std::size_t> evenly_spaced(std::size_t n, std::size_t count);

// ---------------------------------------------------------------------------
// Normalization

enum class Feature : std::size_t {
    temperature = 0,  // shared by t_zone, t_neigh and t_out
    solar = 1,
};
inline constexpr std::size_t kFeatureCount = 2;

struct FeatureRange {
    double min = 0.0;
    double max = 1.0;
    bool operator==(const FeatureRange&) const = default;
};

/// Per-feature min-max map onto [0.1, 0.9]. Values outside the fitted range
/// map outside the interval; nothing is clipped.
class Normalizer {
public:
    static constexpr double kLow = 0.1;
    static constexpr double kHigh = 0.9;

    Normalizer() = default;
    /// Throws std::invalid_argument unless max > min for every feature.
    explicit Normalizer(std::vector<FeatureRange> ranges);

    double apply(Feature f, double value) const;
    double invert(Feature f, double normalized) const;
    /// Normalized units per physical unit (the slope of apply).
    double scale(Feature f) const;
    const FeatureRange& range(Feature f) const;
    const std::vector<FeatureRange>& ranges() const { return ranges_; }

    bool operator==(const Normalizer&) const = default;

private:
    std::vector<FeatureRange> ranges_;
};

/// Fits on training data only. Throws std::invalid_argument for an empty set
/// or a constant feature.
Normalizer fit_normalizer(const std::vector<Trajectory>& train);

}  // namespace zonectl::data
