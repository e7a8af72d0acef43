#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qls/pauli.hpp"
#include "qls/problems.hpp"
#include "qls/solver.hpp"
#include "qls/statevector.hpp"

namespace qls {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

/// Writes a sum as one term per line, `<re> <im> <LETTERS>`, preceded by a
/// `# width <n>` comment so empty sums survive the round trip.
void save_pauli_sum(const PauliSum& sum, const std::filesystem::path& path);

/// Reads the `save_pauli_sum` format.  `#`-prefixed lines and blank lines
/// are skipped; the register width comes from the width comment when
/// present, otherwise from the first term's letter count.  Throws
/// std::runtime_error on malformed input.
PauliSum load_pauli_sum(const std::filesystem::path& path);

/// Dense matrix as plain text: first line `dim`, then row-major `re im`
/// pairs separated by whitespace.
void save_dense_matrix(const Dense& m, const std::filesystem::path& path);
Dense load_dense_matrix(const std::filesystem::path& path);

/// Per-iteration optimization record,
/// `iteration,cost,eps_shadow,budget,cumulative_circuits,trace_distance`.
void write_trace_csv(const std::vector<TraceRow>& trace,
                     const std::filesystem::path& path);

/// Solution amplitudes, `index,re,im`.
void write_solution_csv(const StateVector& state, const std::filesystem::path& path);

struct SummaryRow {
    uint32_t run = 0;
    uint64_t evaluations = 0;
    bool converged = false;
    double final_td = 1.0;
    double final_fid = 0.0;
};

/// Repetition-study roll-up, `run,evaluations,converged,final_td,final_fid`.
void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::filesystem::path& path);

/// Full machine-readable run record: optimal parameters, final metrics,
/// evaluation counts, and the problem identity.
void write_result_json(const SolveResult& result, const LinearProblem& problem,
                       const std::string& optimizer_name,
                       const std::filesystem::path& path);

}  // namespace qls
