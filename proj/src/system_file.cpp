#include "isoyamabe/system_file.hpp"

#include "isoyamabe/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace isoyamabe {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

double to_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) {
        throw SystemFileError(where + ": expected a real number, got '" + s + "'");
    }
    return v;
}

int to_int(const std::string& s, const std::string& where) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw SystemFileError(where + ": expected an integer, got '" + s + "'");
    }
    return v;
}

struct Entry {
    std::string value;
    int line = 0;
};

}  // namespace

IsoparametricSystem parse_system_file(std::string_view text, const std::string& origin) {
    static const char* const kKeys[] = {"name", "dim", "interval", "b", "a", "s", "volfactor", "kf", "focal_codim"};
    std::map<std::string, Entry> entries;
    std::istringstream in{std::string(text)};
    int lineno = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        std::string line = raw.substr(0, raw.find('#'));
        if (trim(line).empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw SystemFileError(where + ": expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
            throw SystemFileError(where + ": unknown key '" + key + "'");
        }
        if (entries.count(key)) throw SystemFileError(where + ": repeated key '" + key + "'");
        entries[key] = {value, lineno};
    }

    auto need = [&](const char* key) -> const Entry& {
        auto it = entries.find(key);
        if (it == entries.end()) throw SystemFileError(origin + ": missing key '" + std::string(key) + "'");
        return it->second;
    };
    auto where = [&](const Entry& e) { return origin + ":" + std::to_string(e.line); };
    auto profile = [&](const char* key) {
        const Entry& e = need(key);
        try {
            return expr::parse(e.value);
        } catch (const SyntaxError& err) {
            throw SystemFileError(where(e) + ": in '" + key + "': " + err.what());
        }
    };

    IsoparametricSystem sys;
    sys.name = entries.count("name") ? entries["name"].value : origin;
    const Entry& dim = need("dim");
    sys.dims = DimensionConstants::of(to_int(dim.value, where(dim)));

    const Entry& iv = need("interval");
    const auto ends = split_ws(iv.value);
    if (ends.size() != 2) throw SystemFileError(where(iv) + ": interval needs two reals");
    sys.t_min = to_double(ends[0], where(iv));
    sys.t_max = to_double(ends[1], where(iv));
    if (!(sys.t_min < sys.t_max)) throw SystemFileError(where(iv) + ": interval must satisfy t_min < t_max");

    sys.b = profile("b");
    sys.a = profile("a");
    sys.s = profile("s");
    sys.fibervol = profile("volfactor");

    const Entry& kf = need("kf");
    sys.kf = to_int(kf.value, where(kf));
    const Entry& fc = need("focal_codim");
    const auto codims = split_ws(fc.value);
    if (codims.size() != 2) throw SystemFileError(where(fc) + ": focal_codim needs two integers");
    sys.focal_codim_minus = to_int(codims[0], where(fc));
    sys.focal_codim_plus = to_int(codims[1], where(fc));
    if (sys.focal_codim_minus < 1 || sys.focal_codim_plus < 1) {
        throw SystemFileError(where(fc) + ": focal codimensions must be >= 1");
    }
    return sys;
}

IsoparametricSystem load_system_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SystemFileError("cannot open system file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_system_file(ss.str(), path);
}

std::string write_system_file(const IsoparametricSystem& sys) {
    for (const ProfileFn* p : {&sys.b, &sys.a, &sys.s, &sys.fibervol}) {
        if (!p->is_printable()) throw SystemFileError("system '" + sys.name + "' has sampled profiles");
    }
    std::ostringstream os;
    os.precision(17);
    os << "name = " << sys.name << "\n"
       << "dim = " << sys.dims.n << "\n"
       << "interval = " << sys.t_min << " " << sys.t_max << "\n"
       << "b = " << expr::print(sys.b) << "\n"
       << "a = " << expr::print(sys.a) << "\n"
       << "s = " << expr::print(sys.s) << "\n"
       << "volfactor = " << expr::print(sys.fibervol) << "\n"
       << "kf = " << sys.kf << "\n"
       << "focal_codim = " << sys.focal_codim_minus << " " << sys.focal_codim_plus << "\n";
    return os.str();
}

namespace {

bool starts_with(const std::string& s, std::string_view p) { return s.rfind(p, 0) == 0; }

std::vector<int> dash_ints(const std::string& tail, const std::string& spec) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= tail.size()) {
        const std::size_t dash = tail.find('-', pos);
        const std::string part = tail.substr(pos, dash == std::string::npos ? std::string::npos : dash - pos);
        out.push_back(to_int(part, "system '" + spec + "'"));
        if (dash == std::string::npos) break;
        pos = dash + 1;
    }
    return out;
}

}  // namespace

IsoparametricSystem resolve_system(const std::string& spec) {
    if (starts_with(spec, "sphere-x1-")) {
        const auto v = dash_ints(spec.substr(10), spec);
        if (v.size() != 1) throw SystemFileError("malformed catalog name '" + spec + "'");
        return build_sphere_linear(v[0]);
    }
    if (starts_with(spec, "sphere-quad-")) {
        const auto v = dash_ints(spec.substr(12), spec);
        if (v.size() != 2) throw SystemFileError("malformed catalog name '" + spec + "'");
        return build_sphere_quadratic(v[0], v[1]);
    }
    if (starts_with(spec, "product:")) {
        const std::string body = spec.substr(8);
        const std::size_t plus = body.rfind('+');
        if (plus == std::string::npos) throw SystemFileError("product syntax is product:<base>+s<v>,v<v>,d<n>");
        const IsoparametricSystem base = resolve_system(body.substr(0, plus));
        double s_N = 0.0, vol_N = 1.0;
        int dim_N = 0;
        std::string seen;
        std::istringstream parts(body.substr(plus + 1));
        for (std::string item; std::getline(parts, item, ',');) {
            if (item.size() < 2) throw SystemFileError("empty product parameter in '" + spec + "'");
            const std::string val = item.substr(1);
            if (seen.find(item[0]) != std::string::npos) {
                throw SystemFileError("repeated product parameter '" + item + "' in '" + spec + "'");
            }
            seen += item[0];
            switch (item[0]) {
                case 's': s_N = to_double(val, spec); break;
                case 'v': vol_N = to_double(val, spec); break;
                case 'd': dim_N = to_int(val, spec); break;
                default: throw SystemFileError("unknown product parameter '" + item + "' in '" + spec + "'");
            }
        }
        if (seen.size() != 3) throw SystemFileError("product needs all of s, v and d in '" + spec + "'");
        return build_product(base, s_N, vol_N, dim_N);
    }
    if (starts_with(spec, "round-product:")) {
        const std::string body = spec.substr(14);
        const std::size_t c2 = body.rfind(',');
        const std::size_t c1 = c2 == std::string::npos || c2 == 0 ? std::string::npos : body.rfind(',', c2 - 1);
        if (c1 == std::string::npos) throw SystemFileError("round-product syntax is round-product:<base>,m<m>,tau<t>");
        const std::string mpart = body.substr(c1 + 1, c2 - c1 - 1);
        const std::string tpart = body.substr(c2 + 1);
        if (!starts_with(mpart, "m") || !starts_with(tpart, "tau")) {
            throw SystemFileError("round-product syntax is round-product:<base>,m<m>,tau<t>");
        }
        return build_round_product(resolve_system(body.substr(0, c1)), to_int(mpart.substr(1), spec),
                                   to_double(tpart.substr(3), spec));
    }
    if (std::filesystem::exists(spec)) return load_system_file(spec);
    throw SystemFileError("unknown system '" + spec + "' (not a catalog name or an existing file)");
}

std::vector<std::string> catalog_names() {
    return {"sphere-x1-2",
            "sphere-x1-3",
            "sphere-x1-4",
            "sphere-x1-5",
            "sphere-quad-1-1",
            "sphere-quad-2-1",
            "sphere-quad-2-2",
            "sphere-quad-3-2",
            "product:sphere-x1-2+s2,v12.566370614359172,d2",
            "round-product:sphere-x1-2,m2,tau0.25",
            "round-product:sphere-x1-4,m2,tau0.5"};
}

}  // namespace isoyamabe
