#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qls {

using cplx = std::complex<double>;
using Dense = Eigen::MatrixXcd;

/// Default magnitude below which coefficients are treated as zero.
inline constexpr double kCoeffTol = 1e-12;

/// An n-qubit Pauli word, bit-packed as one X bit and one Z bit per qubit.
///
/// Letter encoding per qubit: (x,z) = (0,0) I, (1,0) X, (1,1) Y, (0,1) Z,
/// i.e. the stored operator is i^(x&z) X^x Z^z, which makes every word
/// Hermitian.  Qubit 0 is the leftmost letter in text form and the most
/// significant bit of a computational-basis state index; masks are stored in
/// state-index bit order (qubit q lives at bit n-1-q) so simulator kernels
/// can use them directly.
struct PauliString {
    uint32_t n = 0;
    uint64_t x = 0;
    uint64_t z = 0;

    static constexpr uint32_t kMaxQubits = 32;

    static PauliString identity(uint32_t n);
    /// Single non-identity letter ('X','Y','Z') at `qubit`, identity elsewhere.
    static PauliString single(uint32_t n, uint32_t qubit, char letter);
    /// Parses a word of letters I/X/Y/Z, qubit 0 leftmost.
    static PauliString parse(std::string_view text);

    uint64_t qubit_bit(uint32_t q) const { return uint64_t(1) << (n - 1 - q); }
    char letter(uint32_t q) const;
    void set_letter(uint32_t q, char letter);

    /// Number of non-identity letters.
    uint32_t locality() const;
    bool is_identity() const { return x == 0 && z == 0; }
    bool commutes_with(const PauliString& o) const;

    /// Support mask (state-index bit order) of the non-identity letters.
    uint64_t support() const { return x | z; }

    std::string str() const;

    bool operator==(const PauliString& o) const = default;
    /// Lexicographic order on the letter sequence with I < X < Y < Z.
    bool operator<(const PauliString& o) const;
};

/// Result of multiplying two Pauli words: phase in {1, i, -1, -i} times a word.
struct PauliProduct {
    cplx phase;
    PauliString string;
};

/// Exact product a*b with the phase split off the (Hermitian) word.
PauliProduct multiply(const PauliString& a, const PauliString& b);

/// Dense 2^n x 2^n matrix of the word (n <= 12).
Dense to_dense(const PauliString& p);

/// A complex-weighted sum of Pauli words on a fixed register width.
struct PauliSum {
    uint32_t n = 0;
    std::vector<std::pair<cplx, PauliString>> terms;

    PauliSum() = default;
    explicit PauliSum(uint32_t n) : n(n) {}
    PauliSum(uint32_t n, std::vector<std::pair<cplx, PauliString>> t)
        : n(n), terms(std::move(t)) {}

    static PauliSum identity(uint32_t n, cplx coeff = 1.0);

    void add_term(cplx coeff, const PauliString& p);
    std::size_t size() const { return terms.size(); }

    /// Merges duplicate words, drops |coeff| < tol, sorts lexicographically.
    void simplify(double tol = kCoeffTol);

    PauliSum& operator+=(const PauliSum& o);
    PauliSum& operator*=(cplx scale);
    /// Adjoint: conjugates coefficients (the words themselves are Hermitian).
    PauliSum dagger() const;

    /// Sum of |coeff| over all terms.
    double coeff_norm1() const;

    std::string str() const;
};

PauliSum operator*(const PauliSum& a, const PauliSum& b);

/// Dense matrix of the sum (n <= 12).
Dense to_dense(const PauliSum& s);

/// Hilbert-Schmidt projection of a dense matrix onto the Pauli basis:
/// coeff(P) = Tr(P * m) / 2^n over all 4^n words, keeping |coeff| >= tol.
/// Requires a square matrix of power-of-two dimension <= 4096 (n <= 12).
/// Exact for any matrix: to_dense(decompose_dense(m)) reproduces m.
PauliSum decompose_dense(const Dense& m, double tol = kCoeffTol);

/// Serial reference for the OpenMP decomposition kernel (identical output).
PauliSum decompose_dense_serial(const Dense& m, double tol = kCoeffTol);

}  // namespace qls
