#include "nmepi/io.h"

#include "nmepi/errors.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace nmepi {

std::string format_double(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    if (x == 0.0) {
        return "0";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string format_time(double t)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", t);
    return format_double(std::strtod(buf, nullptr));
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

void write_path_csv(std::ostream& os, const CompartmentPath& path)
{
    os << "t,S,E,I,R,A,L\n";
    for (std::size_t k = 0; k < path.grid.size(); ++k) {
        os << format_time(path.grid.time(k)) << ',' << path.S[k] << ',' << path.E[k] << ',' << path.I[k] << ','
           << path.R[k] << ',' << path.A[k] << ',' << path.L[k] << '\n';
    }
}

void write_events_csv(std::ostream& os, const EventLog& log)
{
    os << "t,agent,transition\n";
    for (const Event& e : log.events) {
        os << format_double(e.t) << ',' << e.agent << ',' << to_string(e.transition) << '\n';
    }
}

void write_fluid_csv(std::ostream& os, const FluidSolution& fluid)
{
    os << "t,Sbar,Ebar,Ibar,Rbar,Abar,Lbar\n";
    for (std::size_t k = 0; k < fluid.grid.size(); ++k) {
        os << format_time(fluid.grid.time(k)) << ',' << format_double(fluid.S[k]) << ','
           << format_double(fluid.E[k]) << ',' << format_double(fluid.I[k]) << ',' << format_double(fluid.R[k])
           << ',' << format_double(fluid.A[k]) << ',' << format_double(fluid.L[k]) << '\n';
    }
}

void write_kernel_csv(std::ostream& os, const KernelTable& table)
{
    os << "t,Phi,Psi,Phi0,Psi0\n";
    for (std::size_t k = 0; k < table.grid.size(); ++k) {
        os << format_time(table.grid.time(k)) << ',' << format_double(table.phi[k]) << ','
           << format_double(table.psi[k]) << ',' << format_double(table.phi0[k]) << ','
           << format_double(table.psi0[k]) << '\n';
    }
}

void write_fclt_csv(std::ostream& os, const std::vector<FcltPath>& paths, bool with_drivers)
{
    os << "path,t,Shat,Ehat,Ihat,Rhat";
    std::vector<Driver> drivers;
    if (with_drivers && !paths.empty()) {
        for (const auto& [d, v] : paths.front().drivers) {
            drivers.push_back(d);
            os << ',' << to_string(d);
        }
    }
    os << '\n';
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const FcltPath& fp = paths[p];
        for (std::size_t k = 0; k < fp.grid.size(); ++k) {
            os << p << ',' << format_time(fp.grid.time(k)) << ',' << format_double(fp.S[k]) << ','
               << format_double(fp.E[k]) << ',' << format_double(fp.I[k]) << ',' << format_double(fp.R[k]);
            for (Driver d : drivers) {
                os << ',' << format_double(fp.drivers.at(d)[k]);
            }
            os << '\n';
        }
    }
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m, const std::vector<std::string>& labels)
{
    if (static_cast<Eigen::Index>(labels.size()) != m.rows() || m.rows() != m.cols()) {
        throw ValidationError("matrix dump needs a square matrix and one label per row");
    }
    os << "label";
    for (const auto& l : labels) {
        os << ',' << csv_field(l);
    }
    os << '\n';
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
        os << csv_field(labels[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < m.cols(); ++b) {
            os << ',' << format_double(m(a, b));
        }
        os << '\n';
    }
}

nlohmann::json path_metadata(const CompartmentPath& path, const nlohmann::json& spec, double wall_seconds)
{
    nlohmann::json j;
    j["spec"] = spec;
    j["n"] = path.n;
    j["seed"] = path.seed;
    j["wall_time_s"] = wall_seconds;
    nlohmann::json rounding = nlohmann::json::array();
    for (const auto& r : path.rounding) {
        rounding.push_back({{"compartment", to_string(r.compartment)}, {"fraction", r.fraction}, {"count", r.count}});
    }
    j["initial_rounding"] = rounding;
    return j;
}

nlohmann::json fluid_metadata(const FluidSolution& fluid, const std::vector<std::string>& warnings)
{
    nlohmann::json j;
    j["kind"] = to_string(fluid.kind);
    j["horizon"] = fluid.grid.horizon();
    j["dt"] = fluid.grid.dt();
    j["diagnostics"] = {{"max_iterations", fluid.diagnostics.max_iterations},
                        {"max_residual", fluid.diagnostics.max_residual},
                        {"halvings", fluid.diagnostics.halvings}};
    j["warnings"] = warnings;
    if (fluid.spec) {
        j["spec"] = fluid.spec->to_json();
    }
    return j;
}

void write_text_file(const std::filesystem::path& file, const std::string& text)
{
    if (file.has_parent_path()) {
        std::filesystem::create_directories(file.parent_path());
    }
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ValidationError("cannot open " + file.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw ValidationError("failed writing " + file.string());
    }
}

void write_json_file(const std::filesystem::path& file, const nlohmann::json& j)
{
    write_text_file(file, j.dump(2) + "\n");
}

std::string fnv1a_hex(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace nmepi
