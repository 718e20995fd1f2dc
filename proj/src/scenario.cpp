#include "entimg/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "entimg/errors.hpp"

namespace entimg::scenario {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr Index kMaxGridPoints = 4096;

std::string join(const std::string& path, const std::string& field)
{
    if (field.empty()) return path;
    if (path.empty()) return field;
    return path + "." + field;
}

// Runs fn and re-raises validation errors with `path` prepended to their field.
void at_path(const std::string& path, const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const ValidationError& e) {
        throw ValidationError(join(path, e.field()), e.message());
    }
}

void require(bool ok, const std::string& field, const std::string& message)
{
    if (!ok) throw ValidationError(field, message);
}

void positive(double v, const char* field) { require(v > 0.0 && std::isfinite(v), field, "must be positive"); }
void finite(double v, const char* field) { require(std::isfinite(v), field, "must be finite"); }

bool safe_name(const std::string& s)
{
    if (s.empty() || s.size() > 64) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

// Analytic profiles at arbitrary positions; Delta picks the nearest position.
CVector sample_at(const Profile& p, const RVector& xs, double dx)
{
    const Index n = xs.size();
    const double eps = 1e-9 * dx;
    CVector out = CVector::Zero(n);
    std::visit(overloaded{
                   [&](const profile::Uniform&) { out.setOnes(); },
                   [&](const profile::Delta& d) {
                       Index best = 0;
                       for (Index i = 1; i < n; ++i) {
                           if (std::abs(xs[i] - d.x) < std::abs(xs[best] - d.x)) best = i;
                       }
                       out[best] = 1.0;
                   },
                   [&](const profile::Gaussian& g) {
                       positive(g.waist, "waist");
                       finite(g.center, "center");
                       for (Index i = 0; i < n; ++i) {
                           const double u = (xs[i] - g.center) / g.waist;
                           out[i] = std::exp(-u * u);
                       }
                   },
                   [&](const profile::GaussianAperture& g) {
                       positive(g.waist, "waist");
                       finite(g.center, "center");
                       for (Index i = 0; i < n; ++i) {
                           const double u = (xs[i] - g.center) / g.waist;
                           out[i] = std::exp(-u * u);
                       }
                   },
                   [&](const profile::SingleSlit& s) {
                       positive(s.width, "width");
                       finite(s.center, "center");
                       for (Index i = 0; i < n; ++i) out[i] = std::abs(xs[i] - s.center) <= 0.5 * s.width + eps ? 1.0 : 0.0;
                   },
                   [&](const profile::DoubleSlit& s) {
                       positive(s.width, "width");
                       positive(s.separation, "separation");
                       finite(s.center, "center");
                       require(s.separation >= s.width, "separation", "slits overlap (separation < width)");
                       const double a = s.center - 0.5 * s.separation;
                       const double b = s.center + 0.5 * s.separation;
                       for (Index i = 0; i < n; ++i) {
                           const bool in = std::abs(xs[i] - a) <= 0.5 * s.width + eps ||
                                           std::abs(xs[i] - b) <= 0.5 * s.width + eps;
                           out[i] = in ? 1.0 : 0.0;
                       }
                   },
                   [&](const profile::StepEdge& s) {
                       finite(s.x0, "x0");
                       for (Index i = 0; i < n; ++i) out[i] = xs[i] >= s.x0 - eps ? 1.0 : 0.0;
                   },
                   [&](const profile::Values& v) {
                       require(v.values.size() == n, "values",
                               "expected " + std::to_string(n) + " samples, got " + std::to_string(v.values.size()));
                       require(v.values.allFinite(), "values", "entries must be finite");
                       out = v.values;
                   },
               },
               p);
    return out;
}

CVector nonzero_amplitude(const Profile& p, const Grid& grid)
{
    CVector a = evaluate(p, grid);
    require(a.cwiseAbs().maxCoeff() > 0.0, "", "profile vanishes on every grid point");
    return a;
}

void check_transmittance(const CVector& t)
{
    for (Index i = 0; i < t.size(); ++i) require(std::abs(t[i]) <= 1.0 + 1e-12, "", "|t| must not exceed 1");
}

void validate_component(const source::Component& c, const Grid& grid)
{
    std::visit(overloaded{
                   [&](const source::Factorizable& f) {
                       at_path("amplitude1", [&] { nonzero_amplitude(f.amplitude1, grid); });
                       at_path("amplitude2", [&] { nonzero_amplitude(f.amplitude2, grid); });
                   },
                   [&](const source::EntangledDelta& e) { at_path("amplitude", [&] { nonzero_amplitude(e.amplitude, grid); }); },
                   [&](const source::Spdc& s) {
                       at_path("pump", [&] { nonzero_amplitude(s.pump, grid); });
                       positive(s.pm_width, "pm_width");
                   },
                   [&](const source::Correlated& c2) { at_path("amplitude", [&] { nonzero_amplitude(c2.amplitude, grid); }); },
               },
               c);
}

void validate_source(const SourceDoc& s, const Grid& grid)
{
    std::visit(overloaded{
                   [&](const source::SinglePure& p) { at_path("amplitude", [&] { nonzero_amplitude(p.amplitude, grid); }); },
                   [&](const source::SingleMixed& m) {
                       at_path("amplitude", [&] { nonzero_amplitude(m.amplitude, grid); });
                       require(m.coherence_length >= 0.0 && std::isfinite(m.coherence_length), "coherence_length",
                               "must be >= 0");
                   },
                   [&](const source::Mixture& m) {
                       require(!m.components.empty(), "components", "mixture needs at least one component");
                       double total = 0.0;
                       for (std::size_t i = 0; i < m.components.size(); ++i) {
                           const std::string path = "components[" + std::to_string(i) + "]";
                           const auto& wc = m.components[i];
                           require(wc.weight >= 0.0 && std::isfinite(wc.weight), path + ".weight", "must be >= 0");
                           total += wc.weight;
                           at_path(path + ".source", [&] { validate_component(wc.source, grid); });
                       }
                       require(total > 0.0, "components", "weights sum to zero");
                   },
                   [&](const auto& c) { validate_component(source::Component{c}, grid); },
               },
               s);
}

void validate_elements(const std::vector<ElementDoc>& elements, const Grid& grid, double wavelength,
                       const std::string& path)
{
    for (std::size_t i = 0; i < elements.size(); ++i) {
        at_path(path + "[" + std::to_string(i) + "]", [&] { (void)kernel_of(to_element(elements[i], grid, wavelength), grid); });
    }
}

enum class SourceClass { Single, Pure, Ensemble };

SourceClass classify(const SourceDoc& s)
{
    if (std::holds_alternative<source::SinglePure>(s) || std::holds_alternative<source::SingleMixed>(s))
        return SourceClass::Single;
    if (std::holds_alternative<source::Correlated>(s) || std::holds_alternative<source::Mixture>(s))
        return SourceClass::Ensemble;
    return SourceClass::Pure;
}

bool is_density_1d(MeasureKind k)
{
    return k == MeasureKind::Singles1 || k == MeasureKind::Singles2 || k == MeasureKind::Marginal1 ||
           k == MeasureKind::Marginal2;
}

bool uses_arm1(MeasureKind k)
{
    return k == MeasureKind::Joint || k == MeasureKind::Singles1 || k == MeasureKind::Marginal1 ||
           k == MeasureKind::Marginal2 || k == MeasureKind::Sample;
}

bool uses_arm2(MeasureKind k)
{
    return k == MeasureKind::Joint || k == MeasureKind::Singles2 || k == MeasureKind::Marginal1 ||
           k == MeasureKind::Marginal2 || k == MeasureKind::Sample;
}

} // namespace

CVector evaluate(const Profile& p, const Grid& grid)
{
    if (const auto* d = std::get_if<profile::Delta>(&p)) {
        CVector out = CVector::Zero(grid.size());
        at_path("x", [&] { out[nearest_index(grid, d->x)] = 1.0; });
        return out;
    }
    return sample_at(p, grid.points(), grid.dx());
}

CVector evaluate_offsets(const Profile& p, const Grid& grid)
{
    const Index n = grid.size();
    RVector offsets(n);
    for (Index m = 0; m < n; ++m) offsets[m] = static_cast<double>(m <= n / 2 ? m : m - n) * grid.dx();
    return sample_at(p, offsets, grid.dx());
}

ElementSpec to_element(const ElementDoc& e, const Grid& grid, double wavelength)
{
    return std::visit(overloaded{
                          [&](const doc::Identity&) -> ElementSpec { return element::Identity{}; },
                          [&](const doc::FreeSpace& f) -> ElementSpec {
                              return element::FreeSpace{f.distance, f.wavelength.value_or(wavelength)};
                          },
                          [&](const doc::ThinLens& l) -> ElementSpec {
                              return element::ThinLens{l.focal_length, l.wavelength.value_or(wavelength)};
                          },
                          [&](const doc::Fourier& f) -> ElementSpec {
                              return element::FourierSystem{f.focal_length, f.wavelength.value_or(wavelength)};
                          },
                          [&](const doc::Mask& m) -> ElementSpec {
                              CVector t;
                              at_path("transmittance", [&] {
                                  t = evaluate(m.transmittance, grid);
                                  check_transmittance(t);
                              });
                              return element::Mask{std::move(t)};
                          },
                          [&](const doc::CustomMatrix& c) -> ElementSpec { return element::Custom{c.matrix}; },
                          [&](const doc::CustomCirculant& c) -> ElementSpec {
                              CVector col;
                              at_path("circulant", [&] { col = evaluate_offsets(c.column, grid); });
                              const Index n = grid.size();
                              CMatrix h(n, n);
                              for (Index j = 0; j < n; ++j) {
                                  for (Index i = 0; i < n; ++i) h(i, j) = col[((i - j) % n + n) % n];
                              }
                              return element::Custom{std::move(h)};
                          },
                      },
                      e);
}

std::string_view kind_name(const SourceDoc& s)
{
    return std::visit(overloaded{
                          [](const source::SinglePure&) { return std::string_view("single_pure"); },
                          [](const source::SingleMixed&) { return std::string_view("single_mixed"); },
                          [](const source::Factorizable&) { return std::string_view("factorizable"); },
                          [](const source::EntangledDelta&) { return std::string_view("entangled_delta"); },
                          [](const source::Spdc&) { return std::string_view("spdc"); },
                          [](const source::Correlated&) { return std::string_view("correlated"); },
                          [](const source::Mixture&) { return std::string_view("mixture"); },
                      },
                      s);
}

std::string_view kind_name(MeasureKind k)
{
    switch (k) {
    case MeasureKind::Joint: return "joint";
    case MeasureKind::Singles1: return "singles_1";
    case MeasureKind::Singles2: return "singles_2";
    case MeasureKind::Marginal1: return "marginal_1";
    case MeasureKind::Marginal2: return "marginal_2";
    case MeasureKind::Schmidt: return "schmidt";
    case MeasureKind::Sample: return "sample";
    case MeasureKind::Metrics: return "metrics";
    }
    return "unknown";
}

void validate_scenario(const Scenario& s)
{
    require(s.schema_version == kSchemaVersion, "schema_version",
            "unsupported schema version " + std::to_string(s.schema_version));
    require(safe_name(s.name), "name", "must be 1-64 characters of [A-Za-z0-9_-]");
    require(s.grid.size() <= kMaxGridPoints, "grid.n", "at most " + std::to_string(kMaxGridPoints) + " points");
    require(s.wavelength > 0.0 && std::isfinite(s.wavelength), "wavelength", "must be positive");

    require(!s.sources.empty(), "sources", "at least one source is required");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < s.sources.size(); ++i) {
        const std::string path = "sources[" + std::to_string(i) + "]";
        require(safe_name(s.sources[i].label), path + ".label", "must be 1-64 characters of [A-Za-z0-9_-]");
        require(labels.insert(s.sources[i].label).second, path + ".label", "duplicate source label");
        at_path(path, [&] { validate_source(s.sources[i].source, s.grid); });
    }

    for (const auto& [name, elements] : s.arms) {
        require(safe_name(name), "arms." + name, "arm names must be [A-Za-z0-9_-]");
        validate_elements(elements, s.grid, s.wavelength, "arms." + name);
    }

    std::set<std::string> scattered;
    for (std::size_t i = 0; i < s.scatterers.size(); ++i) {
        const std::string path = "scatterers[" + std::to_string(i) + "]";
        const auto& sc = s.scatterers[i];
        require(s.arms.count(sc.arm) == 1, path + ".arm", "unknown arm '" + sc.arm + "'");
        require(scattered.insert(sc.arm).second, path + ".arm", "arm already has scatterers");
        require(!sc.planes.empty(), path + ".planes", "at least one scattering plane is required");
        for (std::size_t j = 0; j < sc.planes.size(); ++j) {
            const std::string pp = path + ".planes[" + std::to_string(j) + "]";
            validate_elements(sc.planes[j].before, s.grid, s.wavelength, pp + ".before");
            validate_elements(sc.planes[j].after, s.grid, s.wavelength, pp + ".after");
            for (std::size_t k = 0; k < sc.planes[j].points.size(); ++k) {
                const auto& pt = sc.planes[j].points[k];
                const std::string kp = pp + ".points[" + std::to_string(k) + "]";
                at_path(kp + ".x", [&] { (void)nearest_index(s.grid, pt.position); });
                require(std::isfinite(pt.strength.real()) && std::isfinite(pt.strength.imag()), kp + ".strength",
                        "must be finite");
            }
        }
    }

    require(!s.measurements.empty(), "measurements", "at least one measurement is required");
    std::map<std::string, const Measurement*> seen;
    for (std::size_t i = 0; i < s.measurements.size(); ++i) {
        const Measurement& m = s.measurements[i];
        const std::string path = "measurements[" + std::to_string(i) + "]";
        require(safe_name(m.name), path + ".name", "must be 1-64 characters of [A-Za-z0-9_-]");
        require(seen.count(m.name) == 0, path + ".name", "duplicate measurement name '" + m.name + "'");

        if (uses_arm1(m.kind))
            require(s.arms.count(m.arm1) == 1, path + ".arm1", "arm '" + m.arm1 + "' is not defined");
        if (uses_arm2(m.kind))
            require(s.arms.count(m.arm2) == 1, path + ".arm2", "arm '" + m.arm2 + "' is not defined");

        std::vector<const LabeledSource*> applies;
        for (std::size_t k = 0; k < m.sources.size(); ++k)
            require(labels.count(m.sources[k]) == 1, path + ".sources[" + std::to_string(k) + "]",
                    "unknown source '" + m.sources[k] + "'");
        for (const auto& src : s.sources) {
            if (m.sources.empty() || std::find(m.sources.begin(), m.sources.end(), src.label) != m.sources.end())
                applies.push_back(&src);
        }

        for (const auto* src : applies) {
            const SourceClass cls = classify(src->source);
            const bool ok = cls == SourceClass::Pure ||
                            (cls == SourceClass::Single && (m.kind == MeasureKind::Singles1 || m.kind == MeasureKind::Metrics)) ||
                            (cls == SourceClass::Ensemble && m.kind != MeasureKind::Schmidt);
            require(ok, path + ".kind",
                    std::string(kind_name(m.kind)) + " does not apply to " + std::string(kind_name(src->source)) +
                        " source '" + src->label + "'");
        }

        if (m.kind == MeasureKind::Sample) require(m.samples >= 1, path + ".n", "need at least one draw");
        if (m.kind == MeasureKind::Metrics) {
            auto it = seen.find(m.of);
            require(it != seen.end(), path + ".of", "must name an earlier measurement");
            require(is_density_1d(it->second->kind), path + ".of", "metrics need a 1-D density measurement");
            const auto& target = it->second->sources;
            for (const auto* src : applies) {
                require(target.empty() || std::find(target.begin(), target.end(), src->label) != target.end(),
                        path + ".sources", "'" + m.of + "' is not measured for source '" + src->label + "'");
            }
            require(m.region.begin >= 0 && m.region.begin < m.region.end && m.region.end <= s.grid.size(),
                    path + ".region", "must satisfy 0 <= begin < end <= grid.n");
        }
        seen[m.name] = &m;
    }

    static const std::set<std::string> known{"csv", "pgm", "json"};
    for (const auto& f : s.outputs.formats) require(known.count(f) == 1, "outputs.formats", "unknown format '" + f + "'");
}

Kernel build_arm(const Scenario& s, const std::string& arm)
{
    auto it = s.arms.find(arm);
    if (it == s.arms.end()) throw ValidationError("arm", "unknown arm '" + arm + "'");

    auto build = [&](const std::vector<ElementDoc>& docs) {
        std::vector<ElementSpec> specs;
        specs.reserve(docs.size());
        for (const auto& d : docs) specs.push_back(to_element(d, s.grid, s.wavelength));
        return cascade(specs, s.grid);
    };

    Kernel k = build(it->second);
    for (const auto& sc : s.scatterers) {
        if (sc.arm != arm) continue;
        if (sc.dark_field) k = Kernel(s.grid, s.grid, CMatrix::Zero(s.grid.size(), s.grid.size()));
        for (const auto& plane : sc.planes) k = with_scatterers(build(plane.before), build(plane.after), plane.points, k);
    }
    return k;
}

} // namespace entimg::scenario
