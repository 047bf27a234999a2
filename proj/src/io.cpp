#include <deflamg/io.hpp>
#include <deflamg/errors.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace deflamg {

namespace {

std::ifstream open_input(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "'");
    return f;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool blank(const std::string &line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

// Trailing garbage after the expected fields is an error.
bool only_space_left(std::istringstream &is) {
    is >> std::ws;
    return is.eof();
}

} // namespace

SparseMatrix read_matrix_market(const std::string &path) {
    std::ifstream f = open_input(path);

    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(f, line))
        throw ParseError(path + ": empty file", 1);
    ++lineno;

    std::istringstream hdr(line);
    std::string banner, object, format, field, symmetry;
    hdr >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket")
        throw ParseError(path + ": missing %%MatrixMarket banner", lineno);

    object = lower(object); format = lower(format);
    field  = lower(field);  symmetry = lower(symmetry);

    if (object != "matrix" || format != "coordinate")
        throw ParseError(path + ": only 'matrix coordinate' files are supported", lineno);
    if (field != "real" && field != "integer" && field != "pattern" && field != "double")
        throw ParseError(path + ": unsupported field '" + field + "'", lineno);
    if (symmetry != "general" && symmetry != "symmetric")
        throw ParseError(path + ": unsupported symmetry '" + symmetry + "'", lineno);

    const bool pattern   = field == "pattern";
    const bool symmetric = symmetry == "symmetric";

    // Size line, after comments.
    index_t nrows = -1, ncols = -1, nnz = -1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%' || blank(line)) continue;
        std::istringstream is(line);
        if (!(is >> nrows >> ncols >> nnz) || !only_space_left(is) ||
                nrows < 0 || ncols < 0 || nnz < 0)
            throw ParseError(path + ": malformed size line", lineno);
        break;
    }
    if (nrows < 0)
        throw ParseError(path + ": missing size line", lineno);

    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));

    index_t read = 0;
    while (read < nnz && std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%' || blank(line)) continue;

        std::istringstream is(line);
        index_t i, j;
        double  v = 1.0;
        if (!(is >> i >> j) || (!pattern && !(is >> v)) || !only_space_left(is))
            throw ParseError(path + ": malformed entry", lineno);
        if (i < 1 || i > nrows || j < 1 || j > ncols)
            throw ParseError(path + ": index out of range", lineno);

        t.push_back({i - 1, j - 1, v});
        if (symmetric && i != j) t.push_back({j - 1, i - 1, v});
        ++read;
    }
    if (read < nnz)
        throw ParseError(path + ": expected " + std::to_string(nnz) + " entries, found " +
                std::to_string(read), lineno);

    return from_triplets(nrows, ncols, std::move(t));
}

void write_matrix_market(const std::string &path, const SparseMatrix &A) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "' for writing");

    f << "%%MatrixMarket matrix coordinate real general\n";
    f << A.nrows << " " << A.ncols << " " << A.nnz() << "\n";
    f << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (index_t i = 0; i < A.nrows; ++i)
        for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            f << i + 1 << " " << A.col_idx[k] + 1 << " " << A.values[k] << "\n";
}

std::vector<double> read_vector(const std::string &path) {
    std::ifstream f = open_input(path);

    std::vector<double> x;
    std::string line;
    std::size_t lineno = 0;
    bool mm_array = false, size_seen = false;
    index_t expected = -1;

    while (std::getline(f, line)) {
        ++lineno;
        if (lineno == 1 && line.rfind("%%MatrixMarket", 0) == 0) {
            std::istringstream hdr(line);
            std::string banner, object, format;
            hdr >> banner >> object >> format;
            if (lower(format) != "array")
                throw ParseError(path + ": only MatrixMarket array files can hold vectors", lineno);
            mm_array = true;
            continue;
        }
        if (blank(line) || line[0] == '%' || line[0] == '#') continue;

        std::istringstream is(line);
        if (mm_array && !size_seen) {
            index_t r, c;
            if (!(is >> r >> c) || !only_space_left(is) || c != 1 || r < 0)
                throw ParseError(path + ": array size line must be 'n 1'", lineno);
            expected  = r;
            size_seen = true;
            continue;
        }

        double v;
        if (!(is >> v) || !only_space_left(is))
            throw ParseError(path + ": expected one number per line", lineno);
        x.push_back(v);
    }

    if (mm_array && expected >= 0 && static_cast<index_t>(x.size()) != expected)
        throw ParseError(path + ": expected " + std::to_string(expected) + " values, found " +
                std::to_string(x.size()), lineno);
    return x;
}

void write_vector(const std::string &path, const std::vector<double> &x) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "' for writing");
    f << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (double v : x) f << v << "\n";
}

std::vector<char> read_mask(const std::string &path) {
    std::ifstream f = open_input(path);

    std::vector<char> mask;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (blank(line) || line[0] == '%' || line[0] == '#') continue;
        std::istringstream is(line);
        int v;
        if (!(is >> v) || !only_space_left(is) || (v != 0 && v != 1))
            throw ParseError(path + ": mask entries must be 0 or 1", lineno);
        mask.push_back(static_cast<char>(v));
    }
    return mask;
}

} // namespace deflamg
