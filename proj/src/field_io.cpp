#include "mhc/field_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <vector>

#include "mhc/csv.hpp"
#include "mhc/error.hpp"

namespace mhc {

namespace {

constexpr char kMagic[4] = {'M', 'H', 'C', 'F'};

template <class T>
void put(std::ostream& out, const T& v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void put_vec(std::ostream& out, const std::vector<T>& v)
{
    put<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
T get(std::istream& in)
{
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) fail(ErrorKind::io, "solution cache is truncated");
    return v;
}

template <class T>
std::vector<T> get_vec(std::istream& in, std::uint64_t expected)
{
    const auto size = get<std::uint64_t>(in);
    if (size != expected) fail(ErrorKind::io, "solution cache has inconsistent slice sizes");
    std::vector<T> v(size);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(size * sizeof(T)));
    if (!in) fail(ErrorKind::io, "solution cache is truncated");
    return v;
}

}  // namespace

void write_solution_csv(std::ostream& out, const Solution& sol)
{
    const auto& g = sol.value.grid;
    const std::size_t n = g.n_agents();
    out << "t[time]";
    for (std::size_t i = 0; i < n; ++i) out << ",w_" << i + 1 << "[utility]";
    for (std::size_t i = 0; i < n; ++i) out << ",z_" << i + 1 << "[state]";
    out << ",F[payoff]";
    for (std::size_t i = 0; i < n; ++i) out << ",y_" << i + 1 << "[utility_per_output]";
    for (std::size_t i = 0; i < n; ++i) out << ",c_" << i + 1 << "[payoff_rate]";
    for (std::size_t i = 0; i < n; ++i) out << ",a_" << i + 1 << "[action]";
    out << ",multiple[flag],H[payoff_rate]\n";
    std::vector<double> x(g.dims());
    const std::string nan = format_double(std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = sol.value.first_computed; k <= g.t_steps(); ++k) {
        const std::string t = format_double(g.time(k));
        for (std::size_t node = 0; node < g.node_count(); ++node) {
            g.coordinates(node, x);
            out << t;
            for (double v : x) out << ',' << format_double(v);
            out << ',' << format_double(sol.value.slices[k][node]);
            if (k < g.t_steps()) {
                const auto& p = sol.policy.slices[k];
                for (const auto* v : {&p.y, &p.c, &p.a})
                    for (std::size_t i = 0; i < n; ++i) out << ',' << format_double((*v)[node * n + i]);
                out << ',' << static_cast<int>(p.multiple[node]) << ',' << format_double(p.value[node]);
            } else {
                for (std::size_t j = 0; j < 3 * n; ++j) out << ',' << nan;
                out << ",0," << nan;
            }
            out << '\n';
        }
    }
}

void save_solution(const std::string& path, const Solution& sol)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::io, "cannot write solution cache " + tmp);
        const auto& g = sol.value.grid;
        out.write(kMagic, 4);
        put<std::uint32_t>(out, kCacheVersion);
        put<std::uint64_t>(out, g.n_agents());
        for (const auto& ax : g.axes()) {
            put<double>(out, ax.lo);
            put<double>(out, ax.hi);
            put<std::uint64_t>(out, ax.points);
        }
        put<std::uint64_t>(out, g.t_steps());
        put<double>(out, g.horizon());
        put<std::uint64_t>(out, sol.value.first_computed);
        for (const auto& s : sol.value.slices) put_vec(out, s);
        for (const auto& p : sol.policy.slices) {
            put_vec(out, p.y);
            put_vec(out, p.c);
            put_vec(out, p.a);
            put_vec(out, p.value);
            put_vec(out, p.multiple);
        }
        if (!out) fail(ErrorKind::io, "failed writing solution cache " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) fail(ErrorKind::io, "cannot move solution cache to " + path);
}

Solution load_solution(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open solution cache " + path);
    char magic[4]{};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) fail(ErrorKind::io, path + " is not a solution cache");
    const auto version = get<std::uint32_t>(in);
    if (version != kCacheVersion)
        fail(ErrorKind::io, "solution cache version " + std::to_string(version) + " is not supported (expected " +
                                std::to_string(kCacheVersion) + ")");
    const auto n = get<std::uint64_t>(in);
    if (n == 0 || 2 * n > Grid::kMaxStateDims) fail(ErrorKind::io, "solution cache has an invalid dimension");
    std::vector<Axis> w(n), z(n);
    for (auto* group : {&w, &z})
        for (auto& ax : *group) {
            ax.lo = get<double>(in);
            ax.hi = get<double>(in);
            ax.points = get<std::uint64_t>(in);
        }
    const auto steps = get<std::uint64_t>(in);
    const double horizon = get<double>(in);
    Solution sol;
    sol.value.grid = Grid(std::move(w), std::move(z), steps, horizon);
    sol.policy.grid = sol.value.grid;
    sol.value.first_computed = get<std::uint64_t>(in);
    if (sol.value.first_computed > steps) fail(ErrorKind::io, "solution cache has an invalid progress marker");
    const std::size_t nodes = sol.value.grid.node_count();
    for (std::size_t k = 0; k <= steps; ++k) sol.value.slices.push_back(get_vec<double>(in, nodes));
    for (std::size_t k = 0; k < steps; ++k) {
        PolicySlice p;
        p.y = get_vec<double>(in, nodes * n);
        p.c = get_vec<double>(in, nodes * n);
        p.a = get_vec<double>(in, nodes * n);
        p.value = get_vec<double>(in, nodes);
        p.multiple = get_vec<std::uint8_t>(in, nodes);
        sol.policy.slices.push_back(std::move(p));
    }
    return sol;
}

}  // namespace mhc
