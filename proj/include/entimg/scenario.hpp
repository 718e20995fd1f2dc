#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "entimg/grid.hpp"
#include "entimg/measure.hpp"
#include "entimg/optics.hpp"
#include "entimg/sampling.hpp"
#include "entimg/sources.hpp"

// Scenario documents: a versioned JSON description of a source, two optical
// arms and the measurements to take, plus the runner that evaluates it and
// writes CSV / PGM / JSON outputs.

namespace entimg::scenario {

inline constexpr int kSchemaVersion = 1;

// -- profiles: named functions of x sampled onto the grid -------------------

namespace profile {
struct Uniform {
    friend bool operator==(const Uniform&, const Uniform&) = default;
};
/// Single lattice point nearest x.
struct Delta {
    double x = 0.0;
    friend bool operator==(const Delta&, const Delta&) = default;
};
/// exp(-(x - center)^2 / waist^2); an amplitude profile.
struct Gaussian {
    double waist = 0.0;
    double center = 0.0;
    friend bool operator==(const Gaussian&, const Gaussian&) = default;
};
/// Same shape as Gaussian, intended as a transmittance with peak 1.
struct GaussianAperture {
    double waist = 0.0;
    double center = 0.0;
    friend bool operator==(const GaussianAperture&, const GaussianAperture&) = default;
};
struct SingleSlit {
    double width = 0.0;
    double center = 0.0;
    friend bool operator==(const SingleSlit&, const SingleSlit&) = default;
};
/// Two slits of `width` whose centers are `separation` apart.
struct DoubleSlit {
    double width = 0.0;
    double separation = 0.0;
    double center = 0.0;
    friend bool operator==(const DoubleSlit&, const DoubleSlit&) = default;
};
/// 1 for x >= x0, 0 otherwise.
struct StepEdge {
    double x0 = 0.0;
    friend bool operator==(const StepEdge&, const StepEdge&) = default;
};
struct Values {
    CVector values;
    friend bool operator==(const Values& a, const Values& b) { return a.values == b.values; }
};
} // namespace profile

using Profile = std::variant<profile::Uniform, profile::Delta, profile::Gaussian, profile::GaussianAperture,
                             profile::SingleSlit, profile::DoubleSlit, profile::StepEdge, profile::Values>;

CVector evaluate(const Profile& p, const Grid& grid);

/// Samples a profile at wrapped lattice offsets 0, dx, ..., -dx; used as the
/// first column of a circulant kernel.
CVector evaluate_offsets(const Profile& p, const Grid& grid);

// -- optical elements as written in documents -------------------------------

namespace doc {
struct Identity {
    friend bool operator==(const Identity&, const Identity&) = default;
};
struct FreeSpace {
    double distance = 0.0;
    std::optional<double> wavelength;
    friend bool operator==(const FreeSpace&, const FreeSpace&) = default;
};
struct ThinLens {
    double focal_length = 0.0;
    std::optional<double> wavelength;
    friend bool operator==(const ThinLens&, const ThinLens&) = default;
};
struct Fourier {
    double focal_length = 0.0;
    std::optional<double> wavelength;
    friend bool operator==(const Fourier&, const Fourier&) = default;
};
struct Mask {
    Profile transmittance;
    friend bool operator==(const Mask&, const Mask&) = default;
};
struct CustomMatrix {
    CMatrix matrix;
    friend bool operator==(const CustomMatrix& a, const CustomMatrix& b) { return a.matrix == b.matrix; }
};
/// H(i, j) = column[(i - j) mod n]: a periodic shift-invariant system.
struct CustomCirculant {
    Profile column;
    friend bool operator==(const CustomCirculant&, const CustomCirculant&) = default;
};
} // namespace doc

using ElementDoc = std::variant<doc::Identity, doc::FreeSpace, doc::ThinLens, doc::Fourier, doc::Mask,
                                doc::CustomMatrix, doc::CustomCirculant>;

ElementSpec to_element(const ElementDoc& e, const Grid& grid, double wavelength);

// -- sources ----------------------------------------------------------------

namespace source {
struct SinglePure {
    Profile amplitude;
    friend bool operator==(const SinglePure&, const SinglePure&) = default;
};
/// Gaussian Schell model: a(x) a*(x') exp(-(x-x')^2 / 2 l^2); l = 0 is incoherent.
struct SingleMixed {
    Profile amplitude;
    double coherence_length = 0.0;
    friend bool operator==(const SingleMixed&, const SingleMixed&) = default;
};
struct Factorizable {
    Profile amplitude1;
    Profile amplitude2;
    friend bool operator==(const Factorizable&, const Factorizable&) = default;
};
struct EntangledDelta {
    Profile amplitude;
    friend bool operator==(const EntangledDelta&, const EntangledDelta&) = default;
};
struct Spdc {
    Profile pump;
    double pm_width = 0.0;
    friend bool operator==(const Spdc&, const Spdc&) = default;
};
/// Classically correlated pairs with gamma(x) = |amplitude(x)|^2.
struct Correlated {
    Profile amplitude;
    friend bool operator==(const Correlated&, const Correlated&) = default;
};

using Component = std::variant<Factorizable, EntangledDelta, Spdc, Correlated>;

struct WeightedComponent {
    double weight = 0.0;
    Component source;
    friend bool operator==(const WeightedComponent&, const WeightedComponent&) = default;
};

struct Mixture {
    std::vector<WeightedComponent> components;
    friend bool operator==(const Mixture&, const Mixture&) = default;
};
} // namespace source

using SourceDoc = std::variant<source::SinglePure, source::SingleMixed, source::Factorizable, source::EntangledDelta,
                               source::Spdc, source::Correlated, source::Mixture>;

struct LabeledSource {
    std::string label;
    SourceDoc source;
    friend bool operator==(const LabeledSource&, const LabeledSource&) = default;
};

/// Document name of a source kind ("entangled_delta", "spdc", ...).
std::string_view kind_name(const SourceDoc& s);

// -- scatterers ---------------------------------------------------------------

struct ScatterPlane {
    std::vector<ElementDoc> before; // source plane -> scattering plane
    std::vector<ElementDoc> after;  // scattering plane -> detector plane
    std::vector<Scatterer> points;
    friend bool operator==(const ScatterPlane&, const ScatterPlane&) = default;
};

/// Weak scatterers added to a named arm. With `dark_field` the unscattered
/// background is blocked and only scattered light reaches the detector.
struct Scattering {
    std::string arm;
    bool dark_field = false;
    std::vector<ScatterPlane> planes;
    friend bool operator==(const Scattering&, const Scattering&) = default;
};

// -- measurements -------------------------------------------------------------

enum class MeasureKind { Joint, Singles1, Singles2, Marginal1, Marginal2, Schmidt, Sample, Metrics };

std::string_view kind_name(MeasureKind k);

struct Measurement {
    MeasureKind kind = MeasureKind::Joint;
    std::string name;
    std::string arm1 = "arm1";
    std::string arm2 = "arm2";
    std::vector<std::string> sources; // empty: every source
    std::uint64_t samples = 0;        // sample
    std::uint64_t seed = 0;           // sample
    std::string of;                   // metrics: name of a 1-D measurement
    IndexRange region{0, 0};          // metrics
    friend bool operator==(const Measurement&, const Measurement&) = default;
};

struct Outputs {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "pgm", "json"};
    friend bool operator==(const Outputs&, const Outputs&) = default;
};

struct Scenario {
    int schema_version = kSchemaVersion;
    std::string name;
    std::string description;
    Grid grid{2, 1.0, 0.0};
    double wavelength = 0.0;
    std::vector<LabeledSource> sources;
    std::map<std::string, std::vector<ElementDoc>> arms;
    std::vector<Scattering> scatterers;
    std::vector<Measurement> measurements;
    Outputs outputs;
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Parses and validates a JSON scenario document. Errors are ValidationError
/// with the offending document path in field().
Scenario parse_scenario(std::string_view text);

std::string serialize_scenario(const Scenario& s);

/// Range and consistency checks; parse_scenario calls this.
void validate_scenario(const Scenario& s);

/// Kernel of a named arm with any scatterers applied.
Kernel build_arm(const Scenario& s, const std::string& arm);

// -- running ----------------------------------------------------------------

struct SampleResult {
    CoincidenceCounts counts;
    EmpiricalDensities empirical;
    double tv_marginal_1;
    double tv_marginal_2;
    ChiSquare chi_square;
    double chi_square_p999;
};

using MeasurementValue = std::variant<Density, JointDensity, SchmidtSpectrum, SampleResult, ImageMetrics>;

struct MeasurementResult {
    std::string source;
    std::string measurement;
    MeasureKind kind;
    MeasurementValue value;
};

struct RunResult {
    std::string scenario;
    std::vector<MeasurementResult> results;
    std::map<std::string, double> scalars;

    const MeasurementResult* find(std::string_view source, std::string_view measurement) const;
};

struct RunSummary {
    std::vector<std::string> files;
    std::map<std::string, double> scalars;
    double seconds = 0.0;
};

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::vector<std::string>> formats;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
};

/// Evaluates every measurement in memory. Deterministic for a given scenario
/// and seed override, independent of `jobs`.
RunResult evaluate_scenario(const Scenario& s, const RunOptions& opt = {});

/// Writes densities, counts and summary.json into `dir`; returns the file
/// names written, relative to `dir`.
std::vector<std::string> write_outputs(const RunResult& r, const std::filesystem::path& dir,
                                       const std::vector<std::string>& formats);

RunSummary run_scenario(const Scenario& s, const RunOptions& opt = {});

/// The summary document written as summary.json.
std::string summary_json(const RunResult& r, const std::vector<std::string>& files);

struct NamedScenario {
    std::string name;
    std::string document;
};

/// Built-in demos as JSON documents.
std::vector<NamedScenario> demo_catalog();

/// Parsed demo by name; throws ValidationError for unknown names.
Scenario demo(std::string_view name);

} // namespace entimg::scenario
