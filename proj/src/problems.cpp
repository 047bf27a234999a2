#include <deflamg/problems.hpp>
#include <deflamg/errors.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace deflamg {

double GridSpec::h(int axis) const {
    const index_t n = axis == 0 ? nx : axis == 1 ? ny : nz;
    return 1.0 / static_cast<double>(n + 1);
}

std::vector<index_t> split_axis(index_t n, int parts) {
    if (parts < 1 || parts > n)
        throw PartitionError("cannot split an axis of " + std::to_string(n) +
                " points into " + std::to_string(parts) + " boxes");
    std::vector<index_t> s(parts, n / parts);
    for (index_t i = 0; i < n % parts; ++i) ++s[i];
    return s;
}

namespace {

struct BoxLayout {
    std::vector<index_t> order;   // grid point -> position
    std::vector<index_t> sizes;   // points per box
};

BoxLayout layout(const GridSpec &g, const BoxCounts &boxes) {
    if (g.nx < 1 || g.ny < 1 || g.nz < 1)
        throw DimensionError("grid needs at least one point per axis");

    const auto sx = split_axis(g.nx, boxes[0]);
    const auto sy = split_axis(g.ny, boxes[1]);
    const auto sz = split_axis(g.nz, boxes[2]);

    BoxLayout L;
    L.order.resize(g.points());

    index_t pos = 0, z0 = 0;
    for (index_t bz : sz) {
        index_t y0 = 0;
        for (index_t by : sy) {
            index_t x0 = 0;
            for (index_t bx : sx) {
                const index_t start = pos;
                for (index_t k = z0; k < z0 + bz; ++k)
                    for (index_t j = y0; j < y0 + by; ++j)
                        for (index_t i = x0; i < x0 + bx; ++i)
                            L.order[i + g.nx * (j + g.ny * k)] = pos++;
                L.sizes.push_back(pos - start);
                x0 += bx;
            }
            y0 += by;
        }
        z0 += bz;
    }
    return L;
}

} // namespace

std::vector<index_t> box_ordering(const GridSpec &g, const BoxCounts &boxes) {
    return layout(g, boxes).order;
}

ProblemInstance gen_poisson3d(const GridSpec &g, const BoxCounts &boxes) {
    BoxLayout L = layout(g, boxes);
    const index_t n = g.points();
    const double hx = g.h(0), hy = g.h(1), hz = g.h(2);

    ProblemInstance prob;
    prob.partition = Partition::from_sizes(L.sizes);
    prob.coords.dim = 3;
    prob.coords.xyz.resize(3 * n);
    prob.b.assign(n, hx * hx);

    std::vector<Triplet> t;
    t.reserve(7 * n);
    for (index_t k = 0; k < g.nz; ++k)
        for (index_t j = 0; j < g.ny; ++j)
            for (index_t i = 0; i < g.nx; ++i) {
                const index_t p   = i + g.nx * (j + g.ny * k);
                const index_t row = L.order[p];

                prob.coords.xyz[3 * row + 0] = (i + 1) * hx;
                prob.coords.xyz[3 * row + 1] = (j + 1) * hy;
                prob.coords.xyz[3 * row + 2] = (k + 1) * hz;

                t.push_back({row, row, 6.0});
                if (i > 0)        t.push_back({row, L.order[p - 1], -1.0});
                if (i + 1 < g.nx) t.push_back({row, L.order[p + 1], -1.0});
                if (j > 0)        t.push_back({row, L.order[p - g.nx], -1.0});
                if (j + 1 < g.ny) t.push_back({row, L.order[p + g.nx], -1.0});
                if (k > 0)        t.push_back({row, L.order[p - g.nx * g.ny], -1.0});
                if (k + 1 < g.nz) t.push_back({row, L.order[p + g.nx * g.ny], -1.0});
            }

    prob.A = from_triplets(n, n, std::move(t));
    return prob;
}

ProblemInstance gen_saddle_point(const GridSpec &g, const BoxCounts &boxes) {
    if (g.nx < 2 || g.ny < 2 || g.nz < 2)
        throw DimensionError("saddle-point generator needs at least 2 points per axis");

    constexpr int    nb   = 4;      // u, v, w, p
    constexpr double eps  = 1e-2;
    constexpr double mass = 1.0;    // h^2 / dt with dt = h^2

    BoxLayout L = layout(g, boxes);
    const index_t nn = g.points();
    const index_t n  = nb * nn;
    const double  h  = g.h(0);

    ProblemInstance prob;
    for (auto &s : L.sizes) s *= nb;
    prob.partition = Partition::from_sizes(L.sizes);
    prob.coords.dim = 3;
    prob.coords.xyz.resize(3 * n);
    prob.mask.assign(n, 0);

    const index_t stride[3] = {1, g.nx, g.nx * g.ny};
    std::vector<Triplet> t;
    t.reserve(13 * n);

    for (index_t k = 0; k < g.nz; ++k)
        for (index_t j = 0; j < g.ny; ++j)
            for (index_t i = 0; i < g.nx; ++i) {
                const index_t q    = i + g.nx * (j + g.ny * k);
                const index_t node = L.order[q];
                const index_t ijk[3] = {i, j, k};
                const index_t ext[3] = {g.nx, g.ny, g.nz};

                for (int c = 0; c < nb; ++c) {
                    const index_t row = nb * node + c;
                    prob.coords.xyz[3 * row + 0] = (i + 1) * g.h(0);
                    prob.coords.xyz[3 * row + 1] = (j + 1) * g.h(1);
                    prob.coords.xyz[3 * row + 2] = (k + 1) * g.h(2);
                }
                prob.mask[nb * node + 3] = 1;

                for (int c = 0; c < 3; ++c) {
                    const index_t row = nb * node + c;
                    t.push_back({row, row, 6.0 + mass});
                    for (int a = 0; a < 3; ++a) {
                        if (ijk[a] > 0)
                            t.push_back({row, nb * L.order[q - stride[a]] + c, -1.0});
                        if (ijk[a] + 1 < ext[a])
                            t.push_back({row, nb * L.order[q + stride[a]] + c, -1.0});
                    }

                    // Gradient along axis c and its transpose.
                    if (ijk[c] > 0) {
                        const index_t col = nb * L.order[q - stride[c]] + 3;
                        t.push_back({row, col, -0.5 * h});
                        t.push_back({col, row, -0.5 * h});
                    }
                    if (ijk[c] + 1 < ext[c]) {
                        const index_t col = nb * L.order[q + stride[c]] + 3;
                        t.push_back({row, col, 0.5 * h});
                        t.push_back({col, row, 0.5 * h});
                    }
                }

                const index_t prow = nb * node + 3;
                t.push_back({prow, prow, -eps * h * h});
            }

    prob.A = from_triplets(n, n, std::move(t));

    std::vector<double> xs(n);
    const double pi = std::numbers::pi;
    for (index_t r = 0; r < n; ++r) {
        const double x = prob.coords.xyz[3 * r], y = prob.coords.xyz[3 * r + 1], z = prob.coords.xyz[3 * r + 2];
        const int c = static_cast<int>(r % nb);
        xs[r] = c < 3 ? (c + 1) * std::sin(pi * x) * std::sin(pi * y) * std::sin(pi * z)
                      : x + y + z - 1.5;
    }
    prob.b = matvec(1.0, prob.A, xs, 0.0, std::vector<double>(n));
    prob.exact = std::move(xs);
    return prob;
}

} // namespace deflamg
