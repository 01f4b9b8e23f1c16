#include "extcalc/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace extcalc {

using nlohmann::json;

namespace {

std::vector<int> parse_index_list(const std::string& s, int dim, const std::string& key) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        int v;
        try {
            v = std::stoi(tok);
        } catch (const std::exception&) {
            throw ValidationError("component key '" + key + "': bad index '" + tok + "'");
        }
        if (v < 1 || v > dim)
            throw ValidationError("component key '" + key + "': index " + std::to_string(v) +
                                  " outside 1.." + std::to_string(dim));
        out.push_back(v - 1);
    }
    return out;
}

Expr parse_expr_or_rethrow(const std::string& src, const std::string& where) {
    try {
        return parse(src);
    } catch (const Error& e) {
        throw ValidationError(where + ": " + e.what());
    }
}

// expression map -> field; unspecified entries are zero
ExtField field_from_components(const BundleSpec& spec, Valence v, const json& comps,
                               const std::string& where) {
    if (!comps.is_object()) throw ValidationError(where + ": components must be an object");
    std::map<std::size_t, Expr> m;
    for (const auto& [key, value] : comps.items()) {
        if (!value.is_string()) throw ValidationError(where + ": component must be a string");
        const std::size_t flat = parse_component_key(key, spec.n, v);
        m[flat] = parse_expr_or_rethrow(value.get<std::string>(), where + " [" + key + "]");
    }
    try {
        return make_expr_field(spec, v, m);
    } catch (const Error& e) {
        throw ValidationError(where + ": " + e.what());
    }
}

void fill_nested(TensorD& t, const json& node, std::vector<int>& idx, int pos,
                 const std::string& where) {
    if (pos == t.valence().rank()) {
        if (!node.is_number()) throw ValidationError(where + ": expected a number");
        t[t.flatten(idx)] = node.get<double>();
        return;
    }
    if (!node.is_array() || node.size() != static_cast<std::size_t>(t.dim()))
        throw ValidationError(where + ": expected an array of length " + std::to_string(t.dim()));
    for (int i = 0; i < t.dim(); ++i) {
        idx[static_cast<std::size_t>(pos)] = i;
        fill_nested(t, node[static_cast<std::size_t>(i)], idx, pos + 1, where);
    }
}

// nested arrays or a sparse component map
TensorD tensor_literal(int dim, Valence v, const json& node, const std::string& where) {
    TensorD t(dim, v);
    if (v.rank() == 0) {
        if (node.is_number()) {
            t[0] = node.get<double>();
            return t;
        }
    }
    if (node.is_array()) {
        std::vector<int> idx(static_cast<std::size_t>(v.rank()));
        fill_nested(t, node, idx, 0, where);
        return t;
    }
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            if (!value.is_number()) throw ValidationError(where + ": expected a number");
            t[parse_component_key(key, dim, v)] = value.get<double>();
        }
        return t;
    }
    throw ValidationError(where + ": tensor literal must be nested arrays or a sparse map");
}

}  // namespace

std::size_t parse_component_key(const std::string& key, int dim, Valence v) {
    const std::size_t semi = key.find(';');
    std::vector<int> uppers, lowers;
    if (semi == std::string::npos) {
        // plain comma list: the first r indices are the uppers
        std::vector<int> all = parse_index_list(key, dim, key);
        if (static_cast<int>(all.size()) == v.rank()) {
            uppers.assign(all.begin(), all.begin() + v.r);
            lowers.assign(all.begin() + v.r, all.end());
        } else {
            uppers = std::move(all);
        }
    } else {
        uppers = parse_index_list(key.substr(0, semi), dim, key);
        lowers = parse_index_list(key.substr(semi + 1), dim, key);
    }
    if (static_cast<int>(uppers.size()) != v.r || static_cast<int>(lowers.size()) != v.s)
        throw ValidationError("component key '" + key + "' does not match valence " +
                              to_string(v));
    TensorD probe(dim, v);
    std::vector<int> idx = uppers;
    idx.insert(idx.end(), lowers.begin(), lowers.end());
    return probe.flatten(idx);
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const Chart* Manifest::find_chart(const std::string& name) const {
    for (const Chart& c : charts)
        if (c.name == name) return &c;
    return nullptr;
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), ss.str());
}

Manifest parse_manifest(const std::string& text, const std::string& digest_src) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    if (!root.is_object()) throw ParseError("manifest: top level must be an object");

    Manifest m;
    m.digest = fnv1a_hex(digest_src);

    if (!root.contains("dimension") || !root["dimension"].is_number_integer())
        throw ValidationError("manifest: missing integer 'dimension'");
    m.spec.n = root["dimension"].get<int>();
    if (m.spec.n < 1) throw ValidationError("manifest: dimension must be >= 1");

    if (root.contains("bundle")) {
        const json& b = root["bundle"];
        if (!b.is_object() || !b.contains("types") || !b["types"].is_array())
            throw ValidationError("manifest: bundle.types must be an array of [r,s] pairs");
        for (const json& t : b["types"]) {
            if (!t.is_array() || t.size() != 2)
                throw ValidationError("manifest: bundle type must be [r,s]");
            const Valence v{t[0].get<int>(), t[1].get<int>()};
            if (v.r < 0 || v.s < 0) throw ValidationError("manifest: bundle type must be nonnegative");
            m.spec.types.push_back(v);
        }
    }

    if (!root.contains("charts") || !root["charts"].is_array() || root["charts"].empty())
        throw ValidationError("manifest: at least one chart is required");
    for (const json& c : root["charts"]) {
        Chart chart;
        chart.name = c.at("name").get<std::string>();
        chart.dim = c.at("dim").get<int>();
        if (chart.dim != m.spec.n)
            throw ValidationError("chart '" + chart.name + "': dim disagrees with the manifest");
        for (const json& p : c.at("sample_points")) {
            std::vector<double> pt = p.get<std::vector<double>>();
            if (pt.size() != static_cast<std::size_t>(m.spec.n))
                throw ValidationError("chart '" + chart.name + "': sample point has wrong length");
            chart.sample_points.push_back(std::move(pt));
        }
        if (m.find_chart(chart.name)) throw ValidationError("duplicate chart '" + chart.name + "'");
        m.charts.push_back(std::move(chart));
    }

    if (root.contains("transitions")) {
        for (const json& t : root["transitions"]) {
            const std::string from = t.at("from").get<std::string>();
            const std::string to = t.at("to").get<std::string>();
            if (!m.find_chart(from) || !m.find_chart(to))
                throw ValidationError("transition " + from + "->" + to + ": unknown chart");
            std::vector<Expr> fwd, bwd;
            for (const json& e : t.at("forward"))
                fwd.push_back(parse_expr_or_rethrow(e.get<std::string>(),
                                                    "transition " + from + "->" + to + " forward"));
            for (const json& e : t.at("backward"))
                bwd.push_back(parse_expr_or_rethrow(e.get<std::string>(),
                                                    "transition " + from + "->" + to + " backward"));
            try {
                m.transitions.emplace_back(from, to, m.spec.n, std::move(fwd), std::move(bwd));
            } catch (const Error& e) {
                throw ValidationError("transition " + from + "->" + to + ": " + e.what());
            }
            // the declared inverse must hold on the sample points
            const Chart* fc = m.find_chart(from);
            const Transition& tr = m.transitions.back();
            for (const std::vector<double>& p : fc->sample_points) {
                const std::vector<double> img = tr.forward(std::span<const double>(p));
                const std::vector<double> back = tr.backward(std::span<const double>(img));
                for (std::size_t i = 0; i < p.size(); ++i)
                    if (std::abs(back[i] - p[i]) > 1e-9)
                        throw ValidationError("transition " + from + "->" + to +
                                              ": backward(forward(x)) deviates at a sample point");
            }
        }
    }

    if (root.contains("connection")) {
        const json& conn = root["connection"];
        if (!conn.is_object()) throw ValidationError("manifest: connection must map charts");
        for (const auto& [chartname, comps] : conn.items()) {
            if (!m.find_chart(chartname))
                throw ValidationError("connection: unknown chart '" + chartname + "'");
            m.connection.emplace(
                chartname,
                make_connection(field_from_components(m.spec, Valence{1, 2}, comps,
                                                      "connection[" + chartname + "]")));
        }
    }

    if (root.contains("fields")) {
        for (const auto& [name, body] : root["fields"].items()) {
            ManifestField f;
            const json& val = body.at("valence");
            f.valence = Valence{val.at(0).get<int>(), val.at(1).get<int>()};
            if (f.valence.r < 0 || f.valence.s < 0)
                throw ValidationError("field '" + name + "': bad valence");
            if (body.contains("constant")) {
                // a tensor literal shared by every chart it is declared for
                const TensorD value = tensor_literal(m.spec.n, f.valence, body["constant"],
                                                     "field '" + name + "' constant");
                std::vector<std::string> chartnames;
                if (body.contains("charts"))
                    chartnames = body["charts"].get<std::vector<std::string>>();
                else
                    chartnames.push_back(m.charts.front().name);
                for (const std::string& chartname : chartnames) {
                    if (!m.find_chart(chartname))
                        throw ValidationError("field '" + name + "': unknown chart '" + chartname +
                                              "'");
                    f.by_chart.emplace(chartname, make_constant_field(m.spec, value));
                }
                m.fields.emplace(name, std::move(f));
                continue;
            }
            const json& comps = body.at("components");
            if (!comps.is_object())
                throw ValidationError("field '" + name + "': components must map charts");
            for (const auto& [chartname, cmap] : comps.items()) {
                if (!m.find_chart(chartname))
                    throw ValidationError("field '" + name + "': unknown chart '" + chartname + "'");
                f.by_chart.emplace(chartname,
                                   field_from_components(m.spec, f.valence, cmap,
                                                         "field '" + name + "' [" + chartname + "]"));
            }
            if (f.by_chart.empty())
                throw ValidationError("field '" + name + "': no chart components");
            m.fields.emplace(name, std::move(f));
        }
    }

    if (root.contains("sections")) {
        for (const auto& [name, body] : root["sections"].items()) {
            ManifestSection s;
            s.chart = body.contains("chart") ? body.at("chart").get<std::string>()
                                             : m.charts.front().name;
            if (!m.find_chart(s.chart))
                throw ValidationError("section '" + name + "': unknown chart '" + s.chart + "'");
            const json& fl = body.at("fields");
            if (!fl.is_array() || fl.size() != m.spec.types.size())
                throw ValidationError("section '" + name + "': expected " +
                                      std::to_string(m.spec.types.size()) + " slot fields");
            std::vector<ExtField> fields;
            for (std::size_t P = 0; P < fl.size(); ++P) {
                ExtField f = field_from_components(
                    m.spec, m.spec.types[P], fl[P],
                    "section '" + name + "' slot " + std::to_string(P + 1));
                // a section field may not reference fiber variables
                for (const auto& [key, value] : fl[P].items()) {
                    const Expr e = parse(value.get<std::string>());
                    for (const std::string& var : e.variables())
                        if (var.size() > 1 && var[0] == 'T')
                            throw ValidationError("section '" + name +
                                                  "': components must depend on x only");
                }
                fields.push_back(std::move(f));
            }
            s.section = make_section(m.spec, std::move(fields));
            m.sections.emplace(name, std::move(s));
        }
    }

    if (root.contains("derivations")) {
        for (const auto& [name, body] : root["derivations"].items()) {
            ManifestDerivation d;
            d.chart = body.contains("chart") ? body.at("chart").get<std::string>()
                                             : m.charts.front().name;
            if (!m.find_chart(d.chart))
                throw ValidationError("derivation '" + name + "': unknown chart '" + d.chart + "'");
            ExtField Z = field_from_components(m.spec, Valence{1, 0}, body.at("Z"),
                                               "derivation '" + name + "' Z");
            ExtField G = field_from_components(m.spec, Valence{1, 1}, body.at("G"),
                                               "derivation '" + name + "' G");
            std::vector<ExtField> ZP;
            const json& zp = body.at("ZP");
            if (!zp.is_array() || zp.size() != m.spec.types.size())
                throw ValidationError("derivation '" + name + "': expected " +
                                      std::to_string(m.spec.types.size()) + " ZP entries");
            for (std::size_t P = 0; P < zp.size(); ++P)
                ZP.push_back(field_from_components(
                    m.spec, m.spec.types[P], zp[P],
                    "derivation '" + name + "' ZP[" + std::to_string(P + 1) + "]"));
            d.components = make_derivation(m.spec, std::move(Z), std::move(ZP), std::move(G));
            m.derivations.emplace(name, std::move(d));
        }
    }

    if (root.contains("chainrule")) {
        for (const json& body : root["chainrule"]) {
            ChainRuleJob job;
            job.field = body.at("field").get<std::string>();
            job.section = body.at("section").get<std::string>();
            job.direction = body.at("direction").get<std::string>();
            job.chart = body.contains("chart") ? body.at("chart").get<std::string>()
                                               : m.charts.front().name;
            if (!m.fields.count(job.field))
                throw ValidationError("chainrule: unknown field '" + job.field + "'");
            if (!m.sections.count(job.section))
                throw ValidationError("chainrule: unknown section '" + job.section + "'");
            if (!m.fields.count(job.direction))
                throw ValidationError("chainrule: unknown direction field '" + job.direction + "'");
            if (m.fields.at(job.direction).valence != Valence{1, 0})
                throw ValidationError("chainrule: direction '" + job.direction +
                                      "' must have valence (1,0)");
            if (!m.connection.count(job.chart))
                throw ValidationError("chainrule: no connection in chart '" + job.chart + "'");
            if (!m.fields.at(job.field).by_chart.count(job.chart))
                throw ValidationError("chainrule: field '" + job.field + "' not defined in chart '" +
                                      job.chart + "'");
            for (const json& p : body.at("probes")) {
                std::vector<double> pt = p.get<std::vector<double>>();
                if (pt.size() != static_cast<std::size_t>(m.spec.n))
                    throw ValidationError("chainrule: probe has wrong length");
                job.probes.push_back(std::move(pt));
            }
            m.chainrule.push_back(std::move(job));
        }
    }

    if (root.contains("suite")) {
        const json& s = root["suite"];
        if (s.contains("seed")) m.seed = s["seed"].get<std::uint64_t>();
        if (s.contains("probes")) m.probes = s["probes"].get<int>();
        if (s.contains("tolerances"))
            for (const auto& [k, v] : s["tolerances"].items())
                m.tolerance_overrides[k] = v.get<double>();
    }

    return m;
}

}  // namespace extcalc
