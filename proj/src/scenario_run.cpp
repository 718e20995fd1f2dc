#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include <json.hpp>

#include "entimg/errors.hpp"
#include "entimg/scenario.hpp"

namespace entimg::scenario {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// A source document turned into the state object the measure module consumes.
struct BuiltSource {
    std::string label;
    std::optional<SinglePhotonPure> single_pure;
    std::optional<SinglePhotonMixed> single_mixed;
    std::optional<BiphotonPure> pure;
    std::optional<SinglePhotonPure> delta_amplitude; // set for entangled_delta: enables the closed-form marginal
    std::optional<CorrelatedPairSource> correlated;
    std::optional<BiphotonMixture> mixture;
};

RVector intensity_of(const Profile& p, const Grid& g) { return evaluate(p, g).cwiseAbs2(); }

void append_component(std::vector<MixtureComponent>& out, double weight, const source::Component& c, const Grid& g)
{
    std::visit(overloaded{
                   [&](const source::Factorizable& f) {
                       out.push_back({weight, factorizable(SinglePhotonPure(g, evaluate(f.amplitude1, g)),
                                                           SinglePhotonPure(g, evaluate(f.amplitude2, g)))});
                   },
                   [&](const source::EntangledDelta& e) {
                       out.push_back({weight, entangled_delta(SinglePhotonPure(g, evaluate(e.amplitude, g)))});
                   },
                   [&](const source::Spdc& s) {
                       out.push_back({weight, spdc_amplitude({evaluate(s.pump, g), s.pm_width}, g)});
                   },
                   [&](const source::Correlated& c2) {
                       const auto local = localized_pair_mixture(correlated_from_intensity(intensity_of(c2.amplitude, g), g));
                       for (const auto& part : local.components()) out.push_back({weight * part.weight, part.state});
                   },
               },
               c);
}

BuiltSource build_source(const LabeledSource& ls, const Grid& g)
{
    BuiltSource b;
    b.label = ls.label;
    std::visit(overloaded{
                   [&](const source::SinglePure& s) { b.single_pure.emplace(g, evaluate(s.amplitude, g)); },
                   [&](const source::SingleMixed& s) {
                       const CVector a = evaluate(s.amplitude, g);
                       CMatrix gamma = a * a.adjoint();
                       for (Index j = 0; j < g.size(); ++j) {
                           for (Index i = 0; i < g.size(); ++i) {
                               if (s.coherence_length == 0.0) {
                                   if (i != j) gamma(i, j) = 0.0;
                               } else {
                                   const double u = (g.point(i) - g.point(j)) / s.coherence_length;
                                   gamma(i, j) *= std::exp(-0.5 * u * u);
                               }
                           }
                       }
                       b.single_mixed.emplace(g, std::move(gamma));
                   },
                   [&](const source::Factorizable& f) {
                       b.pure.emplace(factorizable(SinglePhotonPure(g, evaluate(f.amplitude1, g)),
                                                   SinglePhotonPure(g, evaluate(f.amplitude2, g))));
                   },
                   [&](const source::EntangledDelta& e) {
                       b.delta_amplitude.emplace(g, evaluate(e.amplitude, g));
                       b.pure.emplace(entangled_delta(*b.delta_amplitude));
                   },
                   [&](const source::Spdc& s) { b.pure.emplace(spdc_amplitude({evaluate(s.pump, g), s.pm_width}, g)); },
                   [&](const source::Correlated& c) { b.correlated.emplace(correlated_from_intensity(intensity_of(c.amplitude, g), g)); },
                   [&](const source::Mixture& m) {
                       std::vector<MixtureComponent> parts;
                       double total = 0.0;
                       for (const auto& wc : m.components) total += wc.weight;
                       for (const auto& wc : m.components) append_component(parts, wc.weight / total, wc.source, g);
                       b.mixture.emplace(std::move(parts));
                   },
               },
               ls.source);
    return b;
}

bool applies_to(const Measurement& m, const std::string& label)
{
    return m.sources.empty() || std::find(m.sources.begin(), m.sources.end(), label) != m.sources.end();
}

class Evaluator {
public:
    Evaluator(const Scenario& s, const RunOptions& opt) : s_(s), opt_(opt)
    {
        for (const auto& m : s.measurements) {
            if (m.kind == MeasureKind::Metrics || m.kind == MeasureKind::Schmidt) continue;
            for (const auto& arm : {m.arm1, m.arm2}) {
                if (s.arms.count(arm) && !kernels_.count(arm)) kernels_.emplace(arm, build_arm(s, arm));
            }
        }
        for (const auto& ls : s.sources) sources_.push_back(build_source(ls, s.grid));
    }

    const std::vector<BuiltSource>& sources() const { return sources_; }

    MeasurementValue measure(const BuiltSource& b, const Measurement& m) const
    {
        switch (m.kind) {
        case MeasureKind::Joint: return joint(b, m);
        case MeasureKind::Singles1: return singles(b, kernel(m.arm1), Arm::One);
        case MeasureKind::Singles2: return singles(b, kernel(m.arm2), Arm::Two);
        case MeasureKind::Marginal1: return marginal(b, m, Arm::One);
        case MeasureKind::Marginal2: return marginal(b, m, Arm::Two);
        case MeasureKind::Schmidt: return schmidt_spectrum(*b.pure);
        case MeasureKind::Sample: return sample(b, m);
        case MeasureKind::Metrics: break;
        }
        throw std::logic_error("metrics are evaluated after densities");
    }

private:
    const Kernel& kernel(const std::string& arm) const { return kernels_.at(arm); }

    JointDensity joint(const BuiltSource& b, const Measurement& m) const
    {
        const Kernel& k1 = kernel(m.arm1);
        const Kernel& k2 = kernel(m.arm2);
        if (b.pure) return biphoton_joint(*b.pure, k1, k2);
        if (b.correlated) return correlated_joint(*b.correlated, k1, k2);
        return mixture_joint(*b.mixture, k1, k2);
    }

    Density singles(const BuiltSource& b, const Kernel& k, Arm arm) const
    {
        if (b.single_pure) return single_coherent(*b.single_pure, k);
        if (b.single_mixed) return single_partially_coherent(*b.single_mixed, k);
        if (b.pure) return biphoton_singles(*b.pure, k, arm);
        if (b.correlated) return correlated_singles(*b.correlated, k);
        return mixture_singles(*b.mixture, k, arm);
    }

    Density marginal(const BuiltSource& b, const Measurement& m, Arm arm) const
    {
        const Kernel& k1 = kernel(m.arm1);
        const Kernel& k2 = kernel(m.arm2);
        const Kernel& obs = arm == Arm::One ? k1 : k2;
        const Kernel& other = arm == Arm::One ? k2 : k1;
        if (b.delta_amplitude) return entangled_marginal_closed(*b.delta_amplitude, obs, other);
        if (b.pure) return marginal_from_joint(biphoton_joint(*b.pure, k1, k2), arm);
        if (b.correlated) return correlated_marginal(*b.correlated, obs, other);
        return mixture_marginal(*b.mixture, k1, k2, arm);
    }

    SampleResult sample(const BuiltSource& b, const Measurement& m) const
    {
        const JointDensity p = joint(b, m);
        const std::uint64_t seed = opt_.seed.value_or(m.seed);
        CoincidenceCounts counts = sample_joint(p, m.samples, seed, opt_.jobs);
        EmpiricalDensities emp = empirical_densities(counts);
        const double tv1 = total_variation(emp.marginal1, marginal_from_joint(p, Arm::One));
        const double tv2 = total_variation(emp.marginal2, marginal_from_joint(p, Arm::Two));
        const ChiSquare chi = pearson_chi_square(counts, p);
        const double limit = chi_square_quantile(chi.dof, 0.999);
        return SampleResult{std::move(counts), std::move(emp), tv1, tv2, chi, limit};
    }

    const Scenario& s_;
    const RunOptions& opt_;
    std::map<std::string, Kernel> kernels_;
    std::vector<BuiltSource> sources_;
};

std::string context(const std::string& source, const std::string& measurement)
{
    return "measurement '" + measurement + "' for source '" + source + "': ";
}

void add_scalars(RunResult& r, const Scenario& s)
{
    auto key = [](const MeasurementResult& mr, const char* metric) {
        return mr.source + "." + mr.measurement + "." + metric;
    };
    for (const auto& mr : r.results) {
        std::visit(overloaded{
                       [&](const SchmidtSpectrum& sp) {
                           r.scalars[key(mr, "entropy")] = sp.entropy;
                           r.scalars[key(mr, "participation")] = sp.participation;
                       },
                       [&](const SampleResult& sr) {
                           r.scalars[key(mr, "tv_marginal_1")] = sr.tv_marginal_1;
                           r.scalars[key(mr, "tv_marginal_2")] = sr.tv_marginal_2;
                           r.scalars[key(mr, "chi2")] = sr.chi_square.statistic;
                           r.scalars[key(mr, "chi2_dof")] = sr.chi_square.dof;
                           r.scalars[key(mr, "chi2_p999")] = sr.chi_square_p999;
                       },
                       [&](const ImageMetrics& im) {
                           r.scalars[key(mr, "visibility")] = im.visibility;
                           r.scalars[key(mr, "fwhm")] = im.fwhm;
                           r.scalars[key(mr, "peak_position")] = im.peak_position;
                       },
                       [](const auto&) {},
                   },
                   mr.value);
    }

    // Bucket-gated marginal against the singles rate through the same system.
    for (const auto& mm : s.measurements) {
        if (mm.kind != MeasureKind::Marginal1 && mm.kind != MeasureKind::Marginal2) continue;
        const bool first = mm.kind == MeasureKind::Marginal1;
        for (const auto& sm : s.measurements) {
            const bool match = first ? (sm.kind == MeasureKind::Singles1 && sm.arm1 == mm.arm1)
                                     : (sm.kind == MeasureKind::Singles2 && sm.arm2 == mm.arm2);
            if (!match) continue;
            for (const auto& ls : s.sources) {
                const auto* a = r.find(ls.label, mm.name);
                const auto* b = r.find(ls.label, sm.name);
                if (!a || !b) continue;
                const RVector& pm = std::get<Density>(a->value).values();
                const RVector& ps = std::get<Density>(b->value).values();
                const double diff = (pm - ps).cwiseAbs().maxCoeff();
                r.scalars[ls.label + "." + mm.name + ".max_abs_diff"] = diff;
                r.scalars[ls.label + "." + mm.name + ".max_rel_diff"] = diff / ps.cwiseAbs().maxCoeff();
            }
            break;
        }
    }
}

} // namespace

const MeasurementResult* RunResult::find(std::string_view source, std::string_view measurement) const
{
    for (const auto& r : results) {
        if (r.source == source && r.measurement == measurement) return &r;
    }
    return nullptr;
}

RunResult evaluate_scenario(const Scenario& s, const RunOptions& opt)
{
    validate_scenario(s);
    const Evaluator ev(s, opt);

    struct Task {
        const BuiltSource* source;
        const Measurement* measurement;
    };
    std::vector<Task> tasks;
    std::vector<Task> metrics;
    for (const auto& m : s.measurements) {
        for (const auto& b : ev.sources()) {
            if (!applies_to(m, b.label)) continue;
            (m.kind == MeasureKind::Metrics ? metrics : tasks).push_back({&b, &m});
        }
    }

    std::vector<std::optional<MeasurementValue>> values(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    auto run = [&](std::size_t i) {
        try {
            values[i].emplace(ev.measure(*tasks[i].source, *tasks[i].measurement));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const int workers = std::max(1, std::min<int>(opt.jobs, static_cast<int>(tasks.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) run(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < tasks.size(); i = next++) run(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    RunResult r;
    r.scenario = s.name;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& label = tasks[i].source->label;
        const auto& name = tasks[i].measurement->name;
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const PhysicsError& e) {
                throw PhysicsError(context(label, name) + e.what());
            } catch (const ValidationError& e) {
                throw ValidationError(e.field(), context(label, name) + e.message());
            }
        }
        r.results.push_back({label, name, tasks[i].measurement->kind, std::move(*values[i])});
    }

    for (const auto& t : metrics) {
        const auto* target = r.find(t.source->label, t.measurement->of);
        const Density& d = std::get<Density>(target->value);
        try {
            r.results.push_back(
                {t.source->label, t.measurement->name, MeasureKind::Metrics, image_metrics(d, t.measurement->region)});
        } catch (const PhysicsError& e) {
            throw PhysicsError(context(t.source->label, t.measurement->name) + e.what());
        }
    }

    add_scalars(r, s);
    return r;
}

RunSummary run_scenario(const Scenario& s, const RunOptions& opt)
{
    const auto start = std::chrono::steady_clock::now();
    const RunResult r = evaluate_scenario(s, opt);
    const std::filesystem::path dir = opt.out_dir.value_or(std::filesystem::path(s.outputs.directory));
    const auto& formats = opt.formats ? *opt.formats : s.outputs.formats;
    RunSummary summary;
    summary.files = write_outputs(r, dir, formats);
    summary.scalars = r.scalars;
    summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return summary;
}

std::string summary_json(const RunResult& r, const std::vector<std::string>& files)
{
    nlohmann::ordered_json out;
    out["schema_version"] = kSchemaVersion;
    out["scenario"] = r.scenario;
    out["files"] = files;
    nlohmann::ordered_json scalars = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.scalars) scalars[k] = v;
    out["scalars"] = scalars;
    return out.dump(2) + "\n";
}

} // namespace entimg::scenario
