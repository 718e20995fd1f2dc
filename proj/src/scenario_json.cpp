#include <set>

#include <json.hpp>

#include "entimg/errors.hpp"
#include "entimg/scenario.hpp"

namespace entimg::scenario {

namespace {

using json = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

// Object reader that records consumed keys so leftovers can be rejected.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ValidationError(path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string path(const std::string& key) const { return child(path_, key); }

    const json& at(const std::string& key)
    {
        used_.insert(key);
        if (!j_.contains(key)) throw ValidationError(path(key), "missing required field");
        return j_.at(key);
    }

    double number(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_number()) throw ValidationError(path(key), "expected a number");
        return v.get<double>();
    }

    double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::optional<double> optional_number(const std::string& key)
    {
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    std::uint64_t unsigned_integer(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw ValidationError(path(key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::int64_t integer(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_number_integer()) throw ValidationError(path(key), "expected an integer");
        return v.get<std::int64_t>();
    }

    std::string string(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_string()) throw ValidationError(path(key), "expected a string");
        return v.get<std::string>();
    }

    std::string string_or(const std::string& key, const std::string& fallback) { return has(key) ? string(key) : fallback; }

    bool boolean_or(const std::string& key, bool fallback)
    {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_boolean()) throw ValidationError(path(key), "expected true or false");
        return v.get<bool>();
    }

    const json& array(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_array()) throw ValidationError(path(key), "expected an array");
        return v;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) throw ValidationError(path(it.key()), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

RVector real_array(const json& j, const std::string& path)
{
    if (!j.is_array()) throw ValidationError(path, "expected an array of numbers");
    RVector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ValidationError(item(path, i), "expected a number");
        v[static_cast<Index>(i)] = j[i].get<double>();
    }
    return v;
}

CVector complex_array(Fields& f)
{
    const RVector re = real_array(f.at("re"), f.path("re"));
    RVector im = RVector::Zero(re.size());
    if (f.has("im")) {
        im = real_array(f.at("im"), f.path("im"));
        if (im.size() != re.size()) throw ValidationError(f.path("im"), "length differs from 're'");
    }
    CVector out(re.size());
    for (Index i = 0; i < re.size(); ++i) out[i] = Complex(re[i], im[i]);
    return out;
}

json complex_array_json(const CVector& v)
{
    json re = json::array();
    json im = json::array();
    bool any_imag = false;
    for (Index i = 0; i < v.size(); ++i) {
        re.push_back(v[i].real());
        im.push_back(v[i].imag());
        any_imag = any_imag || v[i].imag() != 0.0;
    }
    json out = json::object();
    out["re"] = std::move(re);
    if (any_imag) out["im"] = std::move(im);
    return out;
}

// -- profiles ----------------------------------------------------------------

Profile parse_profile(const json& j, const std::string& path)
{
    Fields f(j, path);
    const std::string kind = f.string("kind");
    Profile p;
    if (kind == "uniform") {
        p = profile::Uniform{};
    } else if (kind == "delta") {
        p = profile::Delta{f.number("x")};
    } else if (kind == "gaussian") {
        p = profile::Gaussian{f.number("waist"), f.number_or("center", 0.0)};
    } else if (kind == "gaussian_aperture") {
        p = profile::GaussianAperture{f.number("waist"), f.number_or("center", 0.0)};
    } else if (kind == "single_slit") {
        p = profile::SingleSlit{f.number("width"), f.number_or("center", 0.0)};
    } else if (kind == "double_slit") {
        p = profile::DoubleSlit{f.number("width"), f.number("separation"), f.number_or("center", 0.0)};
    } else if (kind == "step_edge") {
        p = profile::StepEdge{f.number("x0")};
    } else if (kind == "values") {
        p = profile::Values{complex_array(f)};
    } else {
        throw ValidationError(f.path("kind"), "unknown profile kind '" + kind + "'");
    }
    f.finish();
    return p;
}

json profile_json(const Profile& p)
{
    return std::visit(overloaded{
                          [](const profile::Uniform&) { return json{{"kind", "uniform"}}; },
                          [](const profile::Delta& d) { return json{{"kind", "delta"}, {"x", d.x}}; },
                          [](const profile::Gaussian& g) {
                              return json{{"kind", "gaussian"}, {"waist", g.waist}, {"center", g.center}};
                          },
                          [](const profile::GaussianAperture& g) {
                              return json{{"kind", "gaussian_aperture"}, {"waist", g.waist}, {"center", g.center}};
                          },
                          [](const profile::SingleSlit& s) {
                              return json{{"kind", "single_slit"}, {"width", s.width}, {"center", s.center}};
                          },
                          [](const profile::DoubleSlit& s) {
                              return json{{"kind", "double_slit"},
                                          {"width", s.width},
                                          {"separation", s.separation},
                                          {"center", s.center}};
                          },
                          [](const profile::StepEdge& s) { return json{{"kind", "step_edge"}, {"x0", s.x0}}; },
                          [](const profile::Values& v) {
                              json out{{"kind", "values"}};
                              const json parts = complex_array_json(v.values);
                              for (auto& [k, val] : parts.items()) out[k] = val;
                              return out;
                          },
                      },
                      p);
}

// -- elements ----------------------------------------------------------------

ElementDoc parse_element(const json& j, const std::string& path)
{
    Fields f(j, path);
    const std::string type = f.string("type");
    ElementDoc e;
    if (type == "identity") {
        e = doc::Identity{};
    } else if (type == "free_space") {
        e = doc::FreeSpace{f.number("distance"), f.optional_number("wavelength")};
    } else if (type == "thin_lens") {
        e = doc::ThinLens{f.number("focal_length"), f.optional_number("wavelength")};
    } else if (type == "fourier") {
        e = doc::Fourier{f.number("focal_length"), f.optional_number("wavelength")};
    } else if (type == "mask") {
        e = doc::Mask{parse_profile(f.at("transmittance"), f.path("transmittance"))};
    } else if (type == "custom") {
        if (f.has("circulant") == f.has("matrix"))
            throw ValidationError(path, "custom element needs exactly one of 'matrix' or 'circulant'");
        if (f.has("circulant")) {
            e = doc::CustomCirculant{parse_profile(f.at("circulant"), f.path("circulant"))};
        } else {
            Fields m(f.at("matrix"), f.path("matrix"));
            const json& re = m.array("re");
            const std::size_t rows = re.size();
            if (rows == 0) throw ValidationError(m.path("re"), "empty matrix");
            const std::size_t cols = re[0].is_array() ? re[0].size() : 0;
            CMatrix mat = CMatrix::Zero(static_cast<Index>(rows), static_cast<Index>(cols));
            auto fill = [&](const json& rowsj, const std::string& p, bool imag) {
                if (rowsj.size() != rows) throw ValidationError(p, "row count differs from 're'");
                for (std::size_t r = 0; r < rows; ++r) {
                    const RVector row = real_array(rowsj[r], item(p, r));
                    if (static_cast<std::size_t>(row.size()) != cols) throw ValidationError(item(p, r), "ragged matrix");
                    for (std::size_t c = 0; c < cols; ++c) {
                        Complex& z = mat(static_cast<Index>(r), static_cast<Index>(c));
                        z = imag ? Complex(z.real(), row[static_cast<Index>(c)]) : Complex(row[static_cast<Index>(c)], z.imag());
                    }
                }
            };
            fill(re, m.path("re"), false);
            if (m.has("im")) fill(m.array("im"), m.path("im"), true);
            m.finish();
            e = doc::CustomMatrix{std::move(mat)};
        }
    } else {
        throw ValidationError(f.path("type"), "unknown element type '" + type + "'");
    }
    f.finish();
    return e;
}

json element_json(const ElementDoc& e)
{
    auto with_wavelength = [](json j, const std::optional<double>& wl) {
        if (wl) j["wavelength"] = *wl;
        return j;
    };
    return std::visit(
        overloaded{
            [](const doc::Identity&) { return json{{"type", "identity"}}; },
            [&](const doc::FreeSpace& d) {
                return with_wavelength(json{{"type", "free_space"}, {"distance", d.distance}}, d.wavelength);
            },
            [&](const doc::ThinLens& d) {
                return with_wavelength(json{{"type", "thin_lens"}, {"focal_length", d.focal_length}}, d.wavelength);
            },
            [&](const doc::Fourier& d) {
                return with_wavelength(json{{"type", "fourier"}, {"focal_length", d.focal_length}}, d.wavelength);
            },
            [](const doc::Mask& d) { return json{{"type", "mask"}, {"transmittance", profile_json(d.transmittance)}}; },
            [](const doc::CustomMatrix& d) {
                json re = json::array();
                json im = json::array();
                for (Index r = 0; r < d.matrix.rows(); ++r) {
                    json rr = json::array();
                    json ri = json::array();
                    for (Index c = 0; c < d.matrix.cols(); ++c) {
                        rr.push_back(d.matrix(r, c).real());
                        ri.push_back(d.matrix(r, c).imag());
                    }
                    re.push_back(std::move(rr));
                    im.push_back(std::move(ri));
                }
                return json{{"type", "custom"}, {"matrix", json{{"re", re}, {"im", im}}}};
            },
            [](const doc::CustomCirculant& d) { return json{{"type", "custom"}, {"circulant", profile_json(d.column)}}; },
        },
        e);
}

std::vector<ElementDoc> parse_elements(const json& j, const std::string& path)
{
    if (!j.is_array()) throw ValidationError(path, "expected an array of elements");
    std::vector<ElementDoc> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_element(j[i], item(path, i)));
    return out;
}

json elements_json(const std::vector<ElementDoc>& es)
{
    json out = json::array();
    for (const auto& e : es) out.push_back(element_json(e));
    return out;
}

// -- sources -----------------------------------------------------------------

source::Component parse_component(Fields& f, const std::string& kind)
{
    auto prof = [&](const std::string& key) { return parse_profile(f.at(key), f.path(key)); };
    if (kind == "factorizable") return source::Factorizable{prof("amplitude1"), prof("amplitude2")};
    if (kind == "entangled_delta") return source::EntangledDelta{prof("amplitude")};
    if (kind == "spdc") {
        Profile pump = prof("pump");
        return source::Spdc{std::move(pump), f.number("pm_width")};
    }
    if (kind == "correlated") return source::Correlated{prof("amplitude")};
    throw ValidationError(f.path("kind"), "unknown source kind '" + kind + "'");
}

SourceDoc parse_source_body(Fields& f)
{
    const std::string kind = f.string("kind");
    auto prof = [&](const std::string& key) { return parse_profile(f.at(key), f.path(key)); };
    if (kind == "single_pure") return source::SinglePure{prof("amplitude")};
    if (kind == "single_mixed") {
        Profile a = prof("amplitude");
        return source::SingleMixed{std::move(a), f.number("coherence_length")};
    }
    if (kind == "mixture") {
        const json& arr = f.array("components");
        source::Mixture m;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = item(f.path("components"), i);
            Fields c(arr[i], p);
            const double w = c.number("weight");
            Fields inner(c.at("source"), c.path("source"));
            source::Component comp = parse_component(inner, inner.string("kind"));
            inner.finish();
            c.finish();
            m.components.push_back({w, std::move(comp)});
        }
        return m;
    }
    return std::visit([](auto&& c) -> SourceDoc { return c; }, parse_component(f, kind));
}

void component_fields(json& out, const source::Component& c)
{
    std::visit(overloaded{
                   [&](const source::Factorizable& s) {
                       out["kind"] = "factorizable";
                       out["amplitude1"] = profile_json(s.amplitude1);
                       out["amplitude2"] = profile_json(s.amplitude2);
                   },
                   [&](const source::EntangledDelta& s) {
                       out["kind"] = "entangled_delta";
                       out["amplitude"] = profile_json(s.amplitude);
                   },
                   [&](const source::Spdc& s) {
                       out["kind"] = "spdc";
                       out["pump"] = profile_json(s.pump);
                       out["pm_width"] = s.pm_width;
                   },
                   [&](const source::Correlated& s) {
                       out["kind"] = "correlated";
                       out["amplitude"] = profile_json(s.amplitude);
                   },
               },
               c);
}

json source_json(const LabeledSource& ls)
{
    json out{{"label", ls.label}};
    std::visit(overloaded{
                   [&](const source::SinglePure& s) {
                       out["kind"] = "single_pure";
                       out["amplitude"] = profile_json(s.amplitude);
                   },
                   [&](const source::SingleMixed& s) {
                       out["kind"] = "single_mixed";
                       out["amplitude"] = profile_json(s.amplitude);
                       out["coherence_length"] = s.coherence_length;
                   },
                   [&](const source::Mixture& m) {
                       out["kind"] = "mixture";
                       json comps = json::array();
                       for (const auto& c : m.components) {
                           json inner = json::object();
                           component_fields(inner, c.source);
                           comps.push_back(json{{"weight", c.weight}, {"source", inner}});
                       }
                       out["components"] = comps;
                   },
                   [&](const auto& c) { component_fields(out, source::Component{c}); },
               },
               ls.source);
    return out;
}

// -- measurements ------------------------------------------------------------

MeasureKind parse_measure_kind(const std::string& s, const std::string& path)
{
    for (MeasureKind k : {MeasureKind::Joint, MeasureKind::Singles1, MeasureKind::Singles2, MeasureKind::Marginal1,
                          MeasureKind::Marginal2, MeasureKind::Schmidt, MeasureKind::Sample, MeasureKind::Metrics}) {
        if (kind_name(k) == s) return k;
    }
    throw ValidationError(path, "unknown measurement kind '" + s + "'");
}

bool needs_arm1(MeasureKind k)
{
    return k == MeasureKind::Joint || k == MeasureKind::Singles1 || k == MeasureKind::Marginal1 ||
           k == MeasureKind::Marginal2 || k == MeasureKind::Sample;
}
bool needs_arm2(MeasureKind k)
{
    return k == MeasureKind::Joint || k == MeasureKind::Singles2 || k == MeasureKind::Marginal1 ||
           k == MeasureKind::Marginal2 || k == MeasureKind::Sample;
}

Measurement parse_measurement(const json& j, const std::string& path)
{
    Fields f(j, path);
    Measurement m;
    m.kind = parse_measure_kind(f.string("kind"), f.path("kind"));
    m.name = f.string_or("name", std::string(kind_name(m.kind)));
    if (needs_arm1(m.kind)) m.arm1 = f.string_or("arm1", "arm1");
    if (needs_arm2(m.kind)) m.arm2 = f.string_or("arm2", "arm2");
    if (f.has("sources")) {
        const json& arr = f.array("sources");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (!arr[i].is_string()) throw ValidationError(item(f.path("sources"), i), "expected a source label");
            m.sources.push_back(arr[i].get<std::string>());
        }
    }
    if (m.kind == MeasureKind::Sample) {
        m.samples = f.unsigned_integer("n");
        m.seed = f.unsigned_integer("seed");
    }
    if (m.kind == MeasureKind::Metrics) {
        m.of = f.string("of");
        const json& r = f.array("region");
        if (r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer())
            throw ValidationError(f.path("region"), "expected [begin, end] indices");
        m.region = {r[0].get<Index>(), r[1].get<Index>()};
    }
    f.finish();
    return m;
}

json measurement_json(const Measurement& m)
{
    json out{{"kind", kind_name(m.kind)}, {"name", m.name}};
    if (needs_arm1(m.kind)) out["arm1"] = m.arm1;
    if (needs_arm2(m.kind)) out["arm2"] = m.arm2;
    if (!m.sources.empty()) out["sources"] = m.sources;
    if (m.kind == MeasureKind::Sample) {
        out["n"] = m.samples;
        out["seed"] = m.seed;
    }
    if (m.kind == MeasureKind::Metrics) {
        out["of"] = m.of;
        out["region"] = json::array({m.region.begin, m.region.end});
    }
    return out;
}

Scatterer parse_point(const json& j, const std::string& path)
{
    Fields f(j, path);
    Scatterer s{f.number("x"), {}};
    const json& st = f.at("strength");
    if (st.is_number()) {
        s.strength = Complex(st.get<double>(), 0.0);
    } else if (st.is_array() && st.size() == 2 && st[0].is_number() && st[1].is_number()) {
        s.strength = Complex(st[0].get<double>(), st[1].get<double>());
    } else {
        throw ValidationError(f.path("strength"), "expected a number or [re, im]");
    }
    f.finish();
    return s;
}

} // namespace

Scenario parse_scenario(std::string_view text)
{
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ValidationError("document", std::string("malformed JSON: ") + e.what());
    }

    Fields f(root, "");
    Scenario s;
    s.schema_version = static_cast<int>(f.integer("schema_version"));
    if (s.schema_version != kSchemaVersion)
        throw ValidationError("schema_version", "unsupported schema version " + std::to_string(s.schema_version));
    s.name = f.string("name");
    s.description = f.string_or("description", "");

    {
        Fields g(f.at("grid"), "grid");
        const std::int64_t n = g.integer("n");
        const double dx = g.number("dx");
        const double center = g.number_or("center", 0.0);
        g.finish();
        if (n < 2) throw ValidationError("grid.n", "grid needs at least 2 points");
        if (!(dx > 0.0)) throw ValidationError("grid.dx", "grid spacing must be positive");
        try {
            s.grid = Grid(static_cast<Index>(n), dx, center);
        } catch (const ValidationError& e) {
            throw ValidationError("grid." + e.field(), e.message());
        }
    }
    s.wavelength = f.number("wavelength");

    if (f.has("source") == f.has("sources")) throw ValidationError("sources", "give exactly one of 'source' or 'sources'");
    auto read_source = [&](const json& j, const std::string& path) {
        Fields sf(j, path);
        LabeledSource ls;
        const bool labeled = sf.has("label");
        if (labeled) ls.label = sf.string("label");
        ls.source = parse_source_body(sf);
        if (!labeled) ls.label = std::string(kind_name(ls.source));
        sf.finish();
        return ls;
    };
    if (f.has("source")) {
        s.sources.push_back(read_source(f.at("source"), "source"));
    } else {
        const json& arr = f.array("sources");
        for (std::size_t i = 0; i < arr.size(); ++i) s.sources.push_back(read_source(arr[i], item("sources", i)));
    }

    if (f.has("arms")) {
        const json& arms = f.at("arms");
        if (!arms.is_object()) throw ValidationError("arms", "expected an object of named element lists");
        for (auto it = arms.begin(); it != arms.end(); ++it)
            s.arms[it.key()] = parse_elements(it.value(), "arms." + it.key());
    }
    for (const char* shorthand : {"arm1", "arm2"}) {
        if (!f.has(shorthand)) continue;
        if (s.arms.count(shorthand)) throw ValidationError(shorthand, "arm defined twice");
        s.arms[shorthand] = parse_elements(f.at(shorthand), shorthand);
    }

    if (f.has("scatterers")) {
        const json& arr = f.array("scatterers");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string path = item("scatterers", i);
            Fields sf(arr[i], path);
            Scattering sc;
            sc.arm = sf.string("arm");
            sc.dark_field = sf.boolean_or("dark_field", false);
            const json& planes = sf.array("planes");
            for (std::size_t j = 0; j < planes.size(); ++j) {
                const std::string pp = item(sf.path("planes"), j);
                Fields pf(planes[j], pp);
                ScatterPlane plane;
                if (pf.has("before")) plane.before = parse_elements(pf.at("before"), pf.path("before"));
                if (pf.has("after")) plane.after = parse_elements(pf.at("after"), pf.path("after"));
                const json& pts = pf.array("points");
                for (std::size_t k = 0; k < pts.size(); ++k) plane.points.push_back(parse_point(pts[k], item(pf.path("points"), k)));
                pf.finish();
                sc.planes.push_back(std::move(plane));
            }
            sf.finish();
            s.scatterers.push_back(std::move(sc));
        }
    }

    const json& ms = f.array("measurements");
    for (std::size_t i = 0; i < ms.size(); ++i) s.measurements.push_back(parse_measurement(ms[i], item("measurements", i)));

    if (f.has("outputs")) {
        Fields of(f.at("outputs"), "outputs");
        s.outputs.directory = of.string_or("directory", s.outputs.directory);
        if (of.has("formats")) {
            s.outputs.formats.clear();
            const json& arr = of.array("formats");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                if (!arr[i].is_string()) throw ValidationError(item("outputs.formats", i), "expected a string");
                s.outputs.formats.push_back(arr[i].get<std::string>());
            }
        }
        of.finish();
    }
    f.finish();

    try {
        validate_scenario(s);
    } catch (const ValidationError& e) {
        // report shorthand arms under the key the document used
        for (const char* shorthand : {"arm1", "arm2"}) {
            const std::string prefix = std::string("arms.") + shorthand;
            const std::string& field = e.field();
            if (f.has(shorthand) && field.rfind(prefix, 0) == 0 &&
                (field.size() == prefix.size() || field[prefix.size()] == '[' || field[prefix.size()] == '.'))
                throw ValidationError(field.substr(5), e.message());
        }
        throw;
    }
    return s;
}

std::string serialize_scenario(const Scenario& s)
{
    json out;
    out["schema_version"] = s.schema_version;
    out["name"] = s.name;
    if (!s.description.empty()) out["description"] = s.description;
    out["grid"] = json{{"n", s.grid.size()}, {"dx", s.grid.dx()}, {"center", s.grid.center()}};
    out["wavelength"] = s.wavelength;
    json sources = json::array();
    for (const auto& ls : s.sources) sources.push_back(source_json(ls));
    out["sources"] = sources;
    json arms = json::object();
    for (const auto& [name, es] : s.arms) arms[name] = elements_json(es);
    out["arms"] = arms;
    if (!s.scatterers.empty()) {
        json arr = json::array();
        for (const auto& sc : s.scatterers) {
            json planes = json::array();
            for (const auto& p : sc.planes) {
                json pts = json::array();
                for (const auto& pt : p.points)
                    pts.push_back(json{{"x", pt.position}, {"strength", json::array({pt.strength.real(), pt.strength.imag()})}});
                planes.push_back(json{{"before", elements_json(p.before)}, {"after", elements_json(p.after)}, {"points", pts}});
            }
            arr.push_back(json{{"arm", sc.arm}, {"dark_field", sc.dark_field}, {"planes", planes}});
        }
        out["scatterers"] = arr;
    }
    json ms = json::array();
    for (const auto& m : s.measurements) ms.push_back(measurement_json(m));
    out["measurements"] = ms;
    out["outputs"] = json{{"directory", s.outputs.directory}, {"formats", s.outputs.formats}};
    return out.dump(2) + "\n";
}

} // namespace entimg::scenario
