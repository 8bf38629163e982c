#include "hgr/datagen.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "hgr/correlation.hpp"
#include "hgr/rng.hpp"

namespace hgr {

Relation relation_from_string(const std::string& name) {
    if (name == "linear") return Relation::Linear;
    if (name == "quadratic") return Relation::Quadratic;
    if (name == "cubic") return Relation::Cubic;
    if (name == "circular") return Relation::Circular;
    if (name == "sin_of_square") return Relation::SinOfSquare;
    throw InvalidSpecError("unknown relation '" + name + "'");
}

std::string to_string(Relation r) {
    switch (r) {
        case Relation::Linear: return "linear";
        case Relation::Quadratic: return "quadratic";
        case Relation::Cubic: return "cubic";
        case Relation::Circular: return "circular";
        case Relation::SinOfSquare: return "sin_of_square";
    }
    return "unknown";
}

SyntheticSpec SyntheticSpec::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream stream(text);
    std::string part;
    while (std::getline(stream, part, ':')) parts.push_back(part);
    if (parts.empty()) throw InvalidSpecError("empty synthetic spec");

    SyntheticSpec spec;
    spec.relation = relation_from_string(parts[0]);
    bool have_n = false;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos)
            throw InvalidSpecError("expected key=value in synthetic spec, got '" + parts[i] + "'");
        const std::string key = parts[i].substr(0, eq);
        const std::string value = parts[i].substr(eq + 1);
        try {
            if (key == "n") {
                spec.n = std::stoi(value);
                have_n = true;
            } else if (key == "sigma") {
                spec.noise_sigma = std::stod(value);
            } else if (key == "seed") {
                spec.seed = std::stoull(value);
            } else {
                throw InvalidSpecError("unknown synthetic spec key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw InvalidSpecError("bad value for '" + key + "' in synthetic spec");
        } catch (const std::out_of_range&) {
            throw InvalidSpecError("out-of-range value for '" + key + "' in synthetic spec");
        }
    }
    if (!have_n) throw InvalidSpecError("synthetic spec needs n=<size>");
    if (spec.n < 8) throw InvalidSpecError("synthetic spec needs n >= 8");
    if (spec.noise_sigma < 0.0) throw InvalidSpecError("noise sigma must be >= 0");
    return spec;
}

std::string SyntheticSpec::to_string() const {
    std::ostringstream out;
    out << hgr::to_string(relation) << ":n=" << n << ":sigma=" << noise_sigma << ":seed=" << seed;
    return out.str();
}

std::pair<SampleVector, SampleVector> generate(const SyntheticSpec& spec) {
    if (spec.n < 8) throw InvalidSpecError("synthetic spec needs n >= 8");
    if (spec.noise_sigma < 0.0) throw InvalidSpecError("noise sigma must be >= 0");

    Rng rng(spec.seed);
    Eigen::VectorXd a(spec.n), b(spec.n);

    if (spec.relation == Relation::Circular) {
        for (int i = 0; i < spec.n; ++i) {
            const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
            a(i) = std::cos(theta);
            b(i) = std::sin(theta);
        }
        for (int i = 0; i < spec.n; ++i) {
            a(i) += spec.noise_sigma * rng.normal();
            b(i) += spec.noise_sigma * rng.normal();
        }
        return {SampleVector(std::move(a), "a"), SampleVector(std::move(b), "b")};
    }

    const double lo = spec.relation == Relation::SinOfSquare ? 0.0 : -1.0;
    for (int i = 0; i < spec.n; ++i) a(i) = rng.uniform(lo, 1.0);
    for (int i = 0; i < spec.n; ++i) {
        const double x = a(i);
        double y = 0.0;
        switch (spec.relation) {
            case Relation::Linear: y = x; break;
            case Relation::Quadratic: y = x * x; break;
            case Relation::Cubic: y = x * x * x; break;
            case Relation::SinOfSquare: y = std::sin(4.0 * std::numbers::pi * x * x); break;
            case Relation::Circular: break;  // handled above
        }
        b(i) = y + spec.noise_sigma * rng.normal();
    }
    return {SampleVector(std::move(a), "a"), SampleVector(std::move(b), "b")};
}

double oracle_correlation(const SyntheticSpec& spec, const SampleVector& a, const SampleVector& b) {
    require_same_length(a, b);
    Eigen::VectorXd fa, gb;
    switch (spec.relation) {
        case Relation::Linear:
            fa = a.values();
            gb = b.values();
            break;
        case Relation::Quadratic:
            fa = a.values().array().square();
            gb = b.values();
            break;
        case Relation::Cubic:
            fa = a.values().array().cube();
            gb = b.values();
            break;
        case Relation::Circular:
            fa = a.values().array().square();
            gb = -b.values().array().square();
            break;
        case Relation::SinOfSquare:
            fa = (4.0 * std::numbers::pi * a.values().array().square()).sin();
            gb = b.values();
            break;
        default:
            throw NoOracleError("no optimal transformation registered for relation '" +
                                to_string(spec.relation) + "'");
    }
    return pearson(SampleVector(std::move(fa), "f(a)"), SampleVector(std::move(gb), "g(b)"));
}

std::string to_csv(const SampleVector& a, const SampleVector& b) {
    require_same_length(a, b);
    std::string out = "a,b\n";
    char buf[64];
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        auto [pa, ea] = std::to_chars(buf, buf + sizeof(buf), a.values()(i));
        out.append(buf, pa);
        out.push_back(',');
        auto [pb, eb] = std::to_chars(buf, buf + sizeof(buf), b.values()(i));
        out.append(buf, pb);
        out.push_back('\n');
    }
    return out;
}

}  // namespace hgr
