#include "qls/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include <json.hpp>

namespace qls {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error(path.string() + ": " + what);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    return out;
}

double parse_real(std::string_view token, const std::filesystem::path& path) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        fail(path, "bad number '" + std::string(token) + "'");
    return value;
}

}  // namespace

std::string format_real(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

void save_pauli_sum(const PauliSum& sum, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "# width " << sum.n << "\n";
    for (const auto& [coeff, word] : sum.terms)
        out << format_real(coeff.real()) << ' ' << format_real(coeff.imag()) << ' '
            << word.str() << "\n";
    if (!out) fail(path, "write failed");
}

PauliSum load_pauli_sum(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open");
    PauliSum sum;
    bool width_known = false;
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream row(line);
        std::string first;
        if (!(row >> first)) continue;  // blank line
        if (first[0] == '#') {
            std::string tag;
            uint32_t n = 0;
            std::istringstream comment(line);
            comment >> tag >> tag;
            if (tag == "width" && (comment >> n)) {
                if (width_known && n != sum.n)
                    fail(path, "conflicting width comments");
                sum.n = n;
                width_known = true;
            }
            continue;
        }
        std::string im_text, letters, extra;
        if (!(row >> im_text >> letters) || (row >> extra))
            fail(path, "line " + std::to_string(line_no) +
                           ": expected '<re> <im> <LETTERS>'");
        double re = parse_real(first, path);
        double im = parse_real(im_text, path);
        PauliString word;
        try {
            word = PauliString::parse(letters);
        } catch (const std::exception& e) {
            fail(path, "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!width_known) {
            sum.n = word.n;
            width_known = true;
        } else if (word.n != sum.n) {
            fail(path, "line " + std::to_string(line_no) + ": width mismatch");
        }
        sum.add_term(cplx(re, im), word);
    }
    if (!width_known) fail(path, "no width comment and no terms");
    return sum;
}

void save_dense_matrix(const Dense& m, const std::filesystem::path& path) {
    if (m.rows() != m.cols()) throw std::invalid_argument("matrix must be square");
    std::ofstream out = open_out(path);
    out << m.rows() << "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out << ' ';
            out << format_real(m(r, c).real()) << ' ' << format_real(m(r, c).imag());
        }
        out << "\n";
    }
    if (!out) fail(path, "write failed");
}

Dense load_dense_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open");
    std::string token;
    if (!(in >> token)) fail(path, "empty file");
    double dim_value = parse_real(token, path);
    auto dim = Eigen::Index(dim_value);
    if (dim <= 0 || double(dim) != dim_value) fail(path, "bad dimension line");
    Dense m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) {
            if (!(in >> token)) fail(path, "truncated matrix data");
            double re = parse_real(token, path);
            if (!(in >> token)) fail(path, "truncated matrix data");
            m(r, c) = cplx(re, parse_real(token, path));
        }
    if (in >> token) fail(path, "trailing data after matrix");
    return m;
}

void write_trace_csv(const std::vector<TraceRow>& trace,
                     const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "iteration,cost,eps_shadow,budget,cumulative_circuits,trace_distance\n";
    for (const TraceRow& row : trace)
        out << row.iteration << ',' << format_real(row.cost) << ','
            << format_real(row.eps_shadow) << ',' << row.shadow_budget << ','
            << row.circuits_cumulative << ',' << format_real(row.trace_distance)
            << "\n";
    if (!out) fail(path, "write failed");
}

void write_solution_csv(const StateVector& state, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "index,re,im\n";
    for (uint64_t i = 0; i < state.dim(); ++i)
        out << i << ',' << format_real(state.amps[i].real()) << ','
            << format_real(state.amps[i].imag()) << "\n";
    if (!out) fail(path, "write failed");
}

void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "run,evaluations,converged,final_td,final_fid\n";
    for (const SummaryRow& row : rows)
        out << row.run << ',' << row.evaluations << ',' << (row.converged ? 1 : 0)
            << ',' << format_real(row.final_td) << ',' << format_real(row.final_fid)
            << "\n";
    if (!out) fail(path, "write failed");
}

void write_result_json(const SolveResult& result, const LinearProblem& problem,
                       const std::string& optimizer_name,
                       const std::filesystem::path& path) {
    nlohmann::json j;
    j["problem"] = problem.label;
    j["qubits"] = problem.n;
    j["kappa"] = problem.kappa;
    j["optimizer"] = optimizer_name;
    j["params_opt"] = result.params_opt;
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    j["cost_evaluations"] = result.cost_evaluations;
    j["gradient_evaluations"] = result.gradient_evaluations;
    j["trace_distance"] = result.trace_distance_final;
    j["fidelity"] = result.fidelity_final;
    if (!result.cost_trace.empty()) {
        j["final_cost"] = result.cost_trace.back().cost;
        j["circuits_total"] = result.cost_trace.back().circuits_cumulative;
    }
    for (const auto& [key, value] : problem.metadata) j["metadata"][key] = value;
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
    if (!out) fail(path, "write failed");
}

}  // namespace qls
