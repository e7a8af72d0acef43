#include "qls/pauli.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <stdexcept>
#include <unordered_map>

namespace qls {

namespace {

constexpr cplx kPhaseTable[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};  // i^k

void check_width(uint32_t n) {
    if (n == 0 || n > PauliString::kMaxQubits)
        throw std::invalid_argument("PauliString: register width must be in [1, 32]");
}

void check_same_width(const PauliString& a, const PauliString& b) {
    if (a.n != b.n) throw std::invalid_argument("PauliString: register width mismatch");
}

}  // namespace

PauliString PauliString::identity(uint32_t n) {
    check_width(n);
    return PauliString{n, 0, 0};
}

PauliString PauliString::single(uint32_t n, uint32_t qubit, char letter) {
    PauliString p = identity(n);
    if (qubit >= n) throw std::invalid_argument("PauliString: qubit index out of range");
    p.set_letter(qubit, letter);
    return p;
}

PauliString PauliString::parse(std::string_view text) {
    PauliString p = identity(uint32_t(text.size()));
    for (uint32_t q = 0; q < p.n; ++q) p.set_letter(q, text[q]);
    return p;
}

char PauliString::letter(uint32_t q) const {
    uint64_t bit = qubit_bit(q);
    bool xb = x & bit, zb = z & bit;
    if (xb && zb) return 'Y';
    if (xb) return 'X';
    if (zb) return 'Z';
    return 'I';
}

void PauliString::set_letter(uint32_t q, char letter) {
    uint64_t bit = qubit_bit(q);
    x &= ~bit;
    z &= ~bit;
    switch (letter) {
        case 'I': break;
        case 'X': x |= bit; break;
        case 'Y': x |= bit; z |= bit; break;
        case 'Z': z |= bit; break;
        default: throw std::invalid_argument("PauliString: letter must be one of I, X, Y, Z");
    }
}

uint32_t PauliString::locality() const { return uint32_t(std::popcount(x | z)); }

bool PauliString::commutes_with(const PauliString& o) const {
    check_same_width(*this, o);
    uint32_t anti = std::popcount(x & o.z) + std::popcount(z & o.x);
    return (anti & 1u) == 0;
}

std::string PauliString::str() const {
    std::string s(n, 'I');
    for (uint32_t q = 0; q < n; ++q) s[q] = letter(q);
    return s;
}

bool PauliString::operator<(const PauliString& o) const {
    if (n != o.n) return n < o.n;
    static constexpr int rank[] = {0, 1, 3, 2};  // (x + 2z) -> I,X,Y,Z order index
    for (uint32_t q = 0; q < n; ++q) {
        uint64_t bit = qubit_bit(q);
        int a = int(bool(x & bit)) + 2 * int(bool(z & bit));
        int b = int(bool(o.x & bit)) + 2 * int(bool(o.z & bit));
        if (rank[a] != rank[b]) return rank[a] < rank[b];
    }
    return false;
}

PauliProduct multiply(const PauliString& a, const PauliString& b) {
    check_same_width(a, b);
    PauliString r{a.n, a.x ^ b.x, a.z ^ b.z};
    // With words stored as i^(x&z) X^x Z^z, the product picks up i^k with
    // k = pc(xa&za) + pc(xb&zb) + 2*pc(za&xb) - pc(xr&zr)  (mod 4).
    uint32_t k = std::popcount(a.x & a.z) + std::popcount(b.x & b.z) +
                 2 * std::popcount(a.z & b.x) + 3 * std::popcount(r.x & r.z);
    return PauliProduct{kPhaseTable[k & 3u], r};
}

Dense to_dense(const PauliString& p) {
    if (p.n > 12) throw std::invalid_argument("to_dense: register too wide (n <= 12)");
    const uint64_t dim = uint64_t(1) << p.n;
    Dense m = Dense::Zero(Eigen::Index(dim), Eigen::Index(dim));
    const cplx lead = kPhaseTable[std::popcount(p.x & p.z) & 3u];
    for (uint64_t col = 0; col < dim; ++col) {
        // (X^x Z^z)|col> = (-1)^pc(z & col) |col ^ x>
        cplx v = lead * ((std::popcount(p.z & col) & 1u) ? -1.0 : 1.0);
        m(Eigen::Index(col ^ p.x), Eigen::Index(col)) = v;
    }
    return m;
}

PauliSum PauliSum::identity(uint32_t n, cplx coeff) {
    PauliSum s(n);
    s.add_term(coeff, PauliString::identity(n));
    return s;
}

void PauliSum::add_term(cplx coeff, const PauliString& p) {
    if (n == 0) n = p.n;
    if (p.n != n) throw std::invalid_argument("PauliSum: register width mismatch");
    terms.emplace_back(coeff, p);
}

namespace {

struct MaskKey {
    uint64_t x, z;
    bool operator==(const MaskKey&) const = default;
};

struct MaskKeyHash {
    std::size_t operator()(const MaskKey& k) const {
        uint64_t s = k.x ^ 0x9e3779b97f4a7c15ull;
        splitmix_step(s);
        s ^= k.z;
        splitmix_step(s);
        return std::size_t(s);
    }
    static void splitmix_step(uint64_t& s) {
        s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ull;
        s = (s ^ (s >> 27)) * 0x94d049bb133111ebull;
        s ^= s >> 31;
    }
};

}  // namespace

void PauliSum::simplify(double tol) {
    std::unordered_map<MaskKey, cplx, MaskKeyHash> acc;
    acc.reserve(terms.size() * 2);
    for (const auto& [c, p] : terms) acc[MaskKey{p.x, p.z}] += c;
    std::vector<std::pair<cplx, PauliString>> out;
    out.reserve(acc.size());
    for (const auto& [k, c] : acc)
        if (std::abs(c) >= tol) out.emplace_back(c, PauliString{n, k.x, k.z});
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    terms = std::move(out);
}

PauliSum& PauliSum::operator+=(const PauliSum& o) {
    if (n == 0) n = o.n;
    if (o.n != n) throw std::invalid_argument("PauliSum: register width mismatch");
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    return *this;
}

PauliSum& PauliSum::operator*=(cplx scale) {
    for (auto& [c, p] : terms) c *= scale;
    return *this;
}

PauliSum PauliSum::dagger() const {
    PauliSum s(n);
    s.terms.reserve(terms.size());
    for (const auto& [c, p] : terms) s.terms.emplace_back(std::conj(c), p);
    return s;
}

double PauliSum::coeff_norm1() const {
    double a = 0.0;
    for (const auto& [c, p] : terms) a += std::abs(c);
    return a;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string PauliSum::str() const {
    std::string s;
    for (const auto& [c, p] : terms) {
        if (!s.empty()) s += " + ";
        s += "(" + format_double(c.real()) + ", " + format_double(c.imag()) + ") " + p.str();
    }
    return s;
}

PauliSum operator*(const PauliSum& a, const PauliSum& b) {
    if (a.n != b.n) throw std::invalid_argument("PauliSum: register width mismatch");
    PauliSum r(a.n);
    r.terms.reserve(a.terms.size() * b.terms.size());
    for (const auto& [ca, pa] : a.terms)
        for (const auto& [cb, pb] : b.terms) {
            PauliProduct prod = multiply(pa, pb);
            r.terms.emplace_back(ca * cb * prod.phase, prod.string);
        }
    r.simplify();
    return r;
}

Dense to_dense(const PauliSum& s) {
    if (s.n > 12) throw std::invalid_argument("to_dense: register too wide (n <= 12)");
    const uint64_t dim = uint64_t(1) << s.n;
    Dense m = Dense::Zero(Eigen::Index(dim), Eigen::Index(dim));
    for (const auto& [c, p] : s.terms) {
        const cplx lead = c * kPhaseTable[std::popcount(p.x & p.z) & 3u];
        for (uint64_t col = 0; col < dim; ++col) {
            cplx v = lead * ((std::popcount(p.z & col) & 1u) ? -1.0 : 1.0);
            m(Eigen::Index(col ^ p.x), Eigen::Index(col)) += v;
        }
    }
    return m;
}

namespace {

uint32_t width_for_dense(const Dense& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("decompose_dense: matrix not square");
    uint64_t dim = uint64_t(m.rows());
    if (dim == 0 || (dim & (dim - 1)) != 0)
        throw std::invalid_argument("decompose_dense: dimension must be a power of two");
    uint32_t n = uint32_t(std::countr_zero(dim));
    if (n == 0 || n > 12)
        throw std::invalid_argument("decompose_dense: dimension must be in [2, 4096]");
    return n;
}

// Tr(P * m) for P = i^(x&z) X^x Z^z: sum over columns d of
// i^(x&z) (-1)^pc(z&d) m(d, d^x).
cplx pauli_trace(const Dense& m, uint64_t dim, uint64_t x, uint64_t z) {
    cplx acc = 0.0;
    for (uint64_t d = 0; d < dim; ++d) {
        cplx v = m(Eigen::Index(d), Eigen::Index(d ^ x));
        acc += (std::popcount(z & d) & 1u) ? -v : v;
    }
    return acc * kPhaseTable[std::popcount(x & z) & 3u];
}

PauliSum decompose_dense_impl(const Dense& m, double tol, bool parallel) {
    const uint32_t n = width_for_dense(m);
    const uint64_t dim = uint64_t(1) << n;
    const double scale = 1.0 / double(dim);
    PauliSum out(n);
    if (parallel) {
        std::vector<std::vector<std::pair<cplx, PauliString>>> found(dim);
#pragma omp parallel for schedule(dynamic, 4)
        for (int64_t xi = 0; xi < int64_t(dim); ++xi) {
            const uint64_t x = uint64_t(xi);
            auto& local = found[x];
            for (uint64_t z = 0; z < dim; ++z) {
                cplx c = pauli_trace(m, dim, x, z) * scale;
                if (std::abs(c) >= tol) local.emplace_back(c, PauliString{n, x, z});
            }
        }
        for (auto& local : found)
            out.terms.insert(out.terms.end(), local.begin(), local.end());
    } else {
        for (uint64_t x = 0; x < dim; ++x)
            for (uint64_t z = 0; z < dim; ++z) {
                cplx c = pauli_trace(m, dim, x, z) * scale;
                if (std::abs(c) >= tol) out.terms.emplace_back(c, PauliString{n, x, z});
            }
    }
    std::sort(out.terms.begin(), out.terms.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    return out;
}

}  // namespace

PauliSum decompose_dense(const Dense& m, double tol) {
    return decompose_dense_impl(m, tol, true);
}

PauliSum decompose_dense_serial(const Dense& m, double tol) {
    return decompose_dense_impl(m, tol, false);
}

}  // namespace qls
