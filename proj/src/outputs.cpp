#include <array>
#include <charconv>
#include <fstream>

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

void put(std::string& out, double v)
{
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), end);
}

void put(std::string& out, std::uint64_t v)
{
    std::array<char, 24> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), end);
}

std::string csv_1d(const Density& d)
{
    std::string out = "x,p\n";
    for (Index i = 0; i < d.grid().size(); ++i) {
        put(out, d.grid().point(i));
        out += ',';
        put(out, d.values()(i));
        out += '\n';
    }
    return out;
}

template <class Matrix>
std::string csv_2d(const Grid& g1, const Grid& g2, const Matrix& m, const char* header)
{
    std::string out = header;
    for (Index i = 0; i < g1.size(); ++i) {
        for (Index j = 0; j < g2.size(); ++j) {
            put(out, g1.point(i));
            out += ',';
            put(out, g2.point(j));
            out += ',';
            put(out, m(i, j));
            out += '\n';
        }
    }
    return out;
}

std::string pgm(const RMatrix& m)
{
    std::string out = "P2\n" + std::to_string(m.cols()) + " " + std::to_string(m.rows()) + "\n65535\n";
    const double peak = m.maxCoeff();
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            const double level = peak > 0.0 ? std::round(65535.0 * m(i, j) / peak) : 0.0;
            if (j) out += ' ';
            put(out, static_cast<std::uint64_t>(std::clamp(level, 0.0, 65535.0)));
        }
        out += '\n';
    }
    return out;
}

std::string schmidt_csv(const SchmidtSpectrum& s)
{
    std::string out = "index,singular_value\n";
    for (Index i = 0; i < s.singular_values.size(); ++i) {
        put(out, static_cast<std::uint64_t>(i));
        out += ',';
        put(out, s.singular_values(i));
        out += '\n';
    }
    return out;
}

class Writer {
public:
    Writer(std::filesystem::path dir, const std::vector<std::string>& formats) : dir_(std::move(dir))
    {
        for (const auto& f : formats) {
            if (f == "csv") csv_ = true;
            else if (f == "pgm") pgm_ = true;
            else if (f == "json") json_ = true;
            else throw ValidationError("formats", "unknown output format '" + f + "'");
        }
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw std::runtime_error("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    bool csv() const { return csv_; }
    bool pgm() const { return pgm_; }
    bool json() const { return json_; }

    void write(const std::string& name, const std::string& content)
    {
        const auto path = dir_ / name;
        std::ofstream f(path, std::ios::binary);
        f << content;
        if (!f) throw std::runtime_error("cannot write " + path.string());
        files_.push_back(name);
    }

    std::vector<std::string> files() const { return files_; }

private:
    std::filesystem::path dir_;
    bool csv_ = false;
    bool pgm_ = false;
    bool json_ = false;
    std::vector<std::string> files_;
};

} // namespace

std::vector<std::string> write_outputs(const RunResult& r, const std::filesystem::path& dir,
                                       const std::vector<std::string>& formats)
{
    Writer w(dir, formats);
    for (const auto& mr : r.results) {
        const std::string stem = mr.source + "_" + mr.measurement;
        std::visit(overloaded{
                       [&](const Density& d) {
                           if (w.csv()) w.write(stem + ".csv", csv_1d(d));
                       },
                       [&](const JointDensity& p) {
                           if (w.csv()) w.write(stem + ".csv", csv_2d(p.grid1(), p.grid2(), p.values(), "x1,x2,p\n"));
                           if (w.pgm()) w.write(stem + ".pgm", pgm(p.values()));
                       },
                       [&](const SchmidtSpectrum& s) {
                           if (w.csv()) w.write(stem + ".csv", schmidt_csv(s));
                       },
                       [&](const SampleResult& s) {
                           if (w.csv()) {
                               w.write(stem + "_counts.csv",
                                       csv_2d(s.counts.grid1, s.counts.grid2, s.counts.counts, "x1,x2,count\n"));
                               w.write(stem + "_marginal_1.csv", csv_1d(s.empirical.marginal1));
                               w.write(stem + "_marginal_2.csv", csv_1d(s.empirical.marginal2));
                           }
                           if (w.pgm()) w.write(stem + "_counts.pgm", pgm(s.counts.counts.cast<double>()));
                       },
                       [](const ImageMetrics&) {},
                   },
                   mr.value);
    }
    std::vector<std::string> files = w.files();
    if (w.json()) {
        files.push_back("summary.json");
        w.write("summary.json", summary_json(r, files));
    }
    return files;
}

} // namespace entimg::scenario
