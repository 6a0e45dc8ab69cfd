#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mdbell/chsh.hpp"
#include "mdbell/estimator.hpp"
#include "mdbell/lp.hpp"
#include "mdbell/mdep.hpp"
#include "mdbell/model.hpp"

namespace mdbell {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Invalid configuration or unparsable input. Maps to exit code 2 in the tool.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Command { Simulate, Chsh, Mdep, MutualInfo, Optimize, Table, Sweep };
enum class OutputFormat { Json, Csv };

inline std::string to_string(Command c) {
    switch (c) {
        case Command::Simulate: return "simulate";
        case Command::Chsh: return "chsh";
        case Command::Mdep: return "mdep";
        case Command::MutualInfo: return "mutualinfo";
        case Command::Optimize: return "optimize";
        case Command::Table: return "table";
        case Command::Sweep: return "sweep";
    }
    return "?";
}

struct SweepRange {
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
};

/// Everything a run needs. Defaults favor reproducibility: seed 0 unless the
/// caller explicitly opted into entropy.
struct RunConfig {
    Command command = Command::Simulate;
    ModelKind model = ModelKind::SingletOnesided;
    double toy_p = 0.0;
    int toy_a = +1;
    int toy_b = +1;
    std::string settings_text;  // empty means the command default ("optimal")
    std::uint64_t shots = 1000000;
    std::uint64_t seed = 0;
    bool entropy = false;
    unsigned workers = 1;
    OutputFormat format = OutputFormat::Json;
    std::string output_path;  // empty means stdout
    std::optional<double> target_b;
    std::optional<CorrelatorQuad> target_quad;
    std::optional<SweepRange> p_range;
    std::optional<SweepRange> b_range;
};

struct NamedSetting {
    std::string name;
    UnitVec3 direction;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

inline double parse_number(const std::string& token) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &consumed);
    } catch (const std::exception&) {
        throw UsageError("parse_settings: '" + token + "' is not a number");
    }
    if (consumed != token.size()) {
        throw UsageError("parse_settings: '" + token + "' is not a number");
    }
    return value;
}

}  // namespace detail

/// Parses a settings specification: either the keyword `optimal` or
/// comma-separated `name=x,y,z` entries, e.g. "X=1,0,0,X'=0,1,0,Y=0,0,1".
/// Vectors are normalized; malformed tokens raise a UsageError naming them.
inline std::vector<NamedSetting> parse_settings(const std::string& spec) {
    const std::string text = detail::trim(spec);
    if (text == "optimal") {
        const ChshSettings s = quantum_optimal_settings();
        return {{"X", s.x}, {"X'", s.xp}, {"Y", s.y}, {"Y'", s.yp}};
    }

    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::size_t end = comma == std::string::npos ? text.size() : comma;
        tokens.push_back(detail::trim(text.substr(pos, end - pos)));
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }

    std::vector<NamedSetting> out;
    std::size_t i = 0;
    while (i < tokens.size()) {
        const std::string& head = tokens[i];
        const std::size_t eq = head.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw UsageError("parse_settings: expected name=x,y,z at '" + head + "'");
        }
        if (i + 2 >= tokens.size()) {
            throw UsageError("parse_settings: entry '" + head.substr(0, eq) +
                             "' needs three components");
        }
        const std::string name = detail::trim(head.substr(0, eq));
        const double x = detail::parse_number(detail::trim(head.substr(eq + 1)));
        const double y = detail::parse_number(tokens[i + 1]);
        const double z = detail::parse_number(tokens[i + 2]);
        for (const NamedSetting& existing : out) {
            if (existing.name == name) {
                throw UsageError("parse_settings: duplicate setting '" + name + "'");
            }
        }
        try {
            out.push_back(NamedSetting{name, unit(x, y, z)});
        } catch (const std::invalid_argument&) {
            throw UsageError("parse_settings: setting '" + name + "' is the zero vector");
        }
        i += 3;
    }
    if (out.empty()) {
        throw UsageError("parse_settings: no settings given");
    }
    return out;
}

namespace detail {

using json = nlohmann::ordered_json;

/// Serializes with floats at 17 significant digits so payloads round-trip
/// losslessly and byte-identically across runs.
inline std::string format_double(double v) {
    if (!std::isfinite(v)) {
        throw std::logic_error("report: non-finite value in payload");
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline bool is_scalar_array(const json& j) {
    for (const auto& e : j) {
        if (e.is_structured()) {
            return false;
        }
    }
    return true;
}

inline void dump_json(const json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    const std::string pad_in(static_cast<std::size_t>(indent) + 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            std::size_t k = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++k) {
                out += pad_in;
                out += json(it.key()).dump();
                out += ": ";
                dump_json(it.value(), out, indent + 2);
                out += k + 1 < j.size() ? ",\n" : "\n";
            }
            out += pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            if (is_scalar_array(j)) {
                out += "[";
                for (std::size_t k = 0; k < j.size(); ++k) {
                    dump_json(j[k], out, indent);
                    if (k + 1 < j.size()) {
                        out += ", ";
                    }
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t k = 0; k < j.size(); ++k) {
                out += pad_in;
                dump_json(j[k], out, indent + 2);
                out += k + 1 < j.size() ? ",\n" : "\n";
            }
            out += pad + "]";
            return;
        }
        case json::value_t::number_float:
            out += format_double(j.get<double>());
            return;
        default:
            out += j.dump();
            return;
    }
}

inline void flatten_csv(const json& j, const std::string& path, std::string& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            flatten_csv(it.value(), path.empty() ? it.key() : path + "." + it.key(), out);
        }
    } else if (j.is_array()) {
        for (std::size_t k = 0; k < j.size(); ++k) {
            flatten_csv(j[k], path + "[" + std::to_string(k) + "]", out);
        }
    } else {
        out += path;
        out += ",";
        if (j.is_number_float()) {
            out += format_double(j.get<double>());
        } else if (j.is_string()) {
            out += j.get<std::string>();
        } else {
            out += j.dump();
        }
        out += "\n";
    }
}

}  // namespace detail

/// A machine-readable run report. JSON preserves the full structure; CSV gives
/// either the sweep table or a flat key,value listing.
struct Report {
    nlohmann::ordered_json doc;

    std::string to_json_text() const {
        std::string out;
        detail::dump_json(doc, out, 0);
        out += "\n";
        return out;
    }

    std::string to_csv_text() const {
        std::string out;
        if (doc.contains("results") && doc["results"].contains("rows")) {
            const auto& rows = doc["results"]["rows"];
            if (!rows.empty()) {
                std::string header;
                for (auto it = rows[0].begin(); it != rows[0].end(); ++it) {
                    if (!header.empty()) {
                        header += ",";
                    }
                    header += it.key();
                }
                out += header + "\n";
                for (const auto& row : rows) {
                    std::string line;
                    for (auto it = row.begin(); it != row.end(); ++it) {
                        if (!line.empty()) {
                            line += ",";
                        }
                        line += it.value().is_number_float()
                                    ? detail::format_double(it.value().get<double>())
                                    : it.value().dump();
                    }
                    out += line + "\n";
                }
            }
            return out;
        }
        out += "key,value\n";
        detail::flatten_csv(doc, "", out);
        return out;
    }
};

namespace detail {

inline ModelDescriptor make_model(const RunConfig& config) {
    switch (config.model) {
        case ModelKind::SingletOnesided:
            return ModelDescriptor::singlet_onesided();
        case ModelKind::ToyTable: {
            if (!(config.toy_p >= 0.0 && config.toy_p <= 1.0)) {
                throw UsageError("toy-table: --p must lie in [0, 1]");
            }
            if ((config.toy_a != 1 && config.toy_a != -1) ||
                (config.toy_b != 1 && config.toy_b != -1)) {
                throw UsageError("toy-table: --a and --b must be +1 or -1");
            }
            return ModelDescriptor::toy_table(
                ToyModelParams{config.toy_p, Outcome(config.toy_a), Outcome(config.toy_b)});
        }
        case ModelKind::UniformBaseline:
            return ModelDescriptor::uniform_baseline();
    }
    throw UsageError("unknown model kind");
}

inline json vector_json(const UnitVec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json config_echo(const RunConfig& config) {
    json j;
    j["model"] = to_string(config.model);
    if (config.model == ModelKind::ToyTable) {
        j["p"] = config.toy_p;
        j["a"] = config.toy_a;
        j["b"] = config.toy_b;
    }
    if (!config.settings_text.empty()) {
        j["settings"] = config.settings_text;
    }
    j["shots"] = config.shots;
    j["seed"] = config.seed;
    j["entropy"] = config.entropy;
    j["workers"] = config.workers;
    j["output_format"] = config.format == OutputFormat::Json ? "json" : "csv";
    if (config.target_b) {
        j["target_b"] = *config.target_b;
    }
    if (config.target_quad) {
        j["target_quad"] = json::array({config.target_quad->c_xy, config.target_quad->c_xyp,
                                        config.target_quad->c_xpy, config.target_quad->c_xpyp});
    }
    auto range_json = [](const SweepRange& r) {
        json out;
        out["start"] = r.start;
        out["stop"] = r.stop;
        out["step"] = r.step;
        return out;
    };
    if (config.p_range) {
        j["p_range"] = range_json(*config.p_range);
    }
    if (config.b_range) {
        j["b_range"] = range_json(*config.b_range);
    }
    return j;
}

inline json estimate_json(const CorrelatorEstimate& est) {
    json j;
    j["mean"] = est.mean;
    j["std_error"] = est.std_error;
    j["shots"] = est.shots;
    return j;
}

inline json joint_json(const JointDistribution& joint) {
    json j;
    j["p_pp"] = joint.p(+1, +1);
    j["p_pm"] = joint.p(+1, -1);
    j["p_mp"] = joint.p(-1, +1);
    j["p_mm"] = joint.p(-1, -1);
    j["counts"] = json::array({joint.counts[0][0], joint.counts[0][1], joint.counts[1][0],
                               joint.counts[1][1]});
    j["shots"] = joint.shots;
    return j;
}

inline json mdep_json(const MDepReport& report) {
    json j;
    j["m"] = report.m;
    j["f"] = report.f;
    // Percent conventions: dependence is 100*M/2, independence is 100*F.
    j["percent_measurement_dependence"] = 100.0 * report.m / 2.0;
    j["percent_measurement_independence"] = 100.0 * report.f;
    j["method"] = report.method == MdepMethod::Exact ? "exact" : "quadrature";
    if (report.beta_star) {
        j["beta_star"] = *report.beta_star;
    }
    if (report.context_pair) {
        j["context_pair"] =
            json::array({to_string(report.context_pair->first), to_string(report.context_pair->second)});
    }
    return j;
}

inline json chsh_report_json(const ChshReport& report) {
    json j;
    j["value_per_variant"] = json(report.value_per_variant);
    j["max_value"] = report.max_value;
    j["argmax_variant"] = report.argmax_variant;
    j["bound"] = report.bound;
    j["tolerance"] = report.tolerance;
    j["satisfied"] = report.satisfied;
    return j;
}

inline json marginal_rows_json(const std::vector<MarginalRow>& rows,
                               const std::vector<std::string>& local_names,
                               const std::vector<std::string>& remote_names) {
    json out = json::array();
    for (const MarginalRow& row : rows) {
        json r;
        r["setting"] = local_names[row.local_index];
        json values = json::array();
        for (std::size_t k = 0; k < row.p_plus.size(); ++k) {
            json v;
            v["remote"] = remote_names[k];
            v["p_plus"] = row.p_plus[k];
            v["std_error"] = row.std_error[k];
            values.push_back(std::move(v));
        }
        r["values"] = std::move(values);
        r["variation"] = row.variation;
        r["variation_std_error"] = row.variation_std_error;
        out.push_back(std::move(r));
    }
    return out;
}

/// Settings resolved for one run: either four named directions or the toy
/// context labels.
struct ResolvedSettings {
    std::vector<std::string> alice_names;
    std::vector<Setting> alice;
    std::vector<std::string> bob_names;
    std::vector<Setting> bob;
    json echo;
};

inline ResolvedSettings resolve_settings(const RunConfig& config, bool require_all_four) {
    ResolvedSettings r;
    if (config.model == ModelKind::ToyTable) {
        if (!config.settings_text.empty()) {
            throw UsageError("toy-table contexts are abstract labels; --settings does not apply");
        }
        r.alice_names = {"X", "X'"};
        r.alice = {SettingLabel::X, SettingLabel::Xprime};
        r.bob_names = {"Y", "Y'"};
        r.bob = {SettingLabel::Y, SettingLabel::Yprime};
        r.echo["contexts"] = json::array({"X", "X'", "Y", "Y'"});
        return r;
    }

    const std::string text = config.settings_text.empty() ? "optimal" : config.settings_text;
    const std::vector<NamedSetting> parsed = parse_settings(text);
    for (const NamedSetting& s : parsed) {
        if (s.name == "X" || s.name == "X'") {
            r.alice_names.push_back(s.name);
            r.alice.push_back(s.direction);
        } else if (s.name == "Y" || s.name == "Y'") {
            r.bob_names.push_back(s.name);
            r.bob.push_back(s.direction);
        } else {
            throw UsageError("settings: unknown name '" + s.name + "' (expected X, X', Y, Y')");
        }
        r.echo[s.name] = vector_json(s.direction);
    }
    if (r.alice.empty() || r.bob.empty()) {
        throw UsageError("settings: need at least one Alice (X, X') and one Bob (Y, Y') entry");
    }
    if (require_all_four && (r.alice.size() != 2 || r.bob.size() != 2)) {
        throw UsageError("settings: this command needs all four of X, X', Y, Y'");
    }
    return r;
}

inline json run_simulate(const RunConfig& config) {
    const ModelDescriptor model = make_model(config);
    const ResolvedSettings settings = resolve_settings(config, /*require_all_four=*/false);
    const RandomStream stream(config.seed, 0);

    json pairs = json::array();
    const std::size_t nb = settings.bob.size();
    for (std::size_t i = 0; i < settings.alice.size(); ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            const RandomStream pair_stream =
                stream.substream(derive_context(stream.context_id(), i * nb + j));
            const JointDistribution joint = estimate_joint(
                model, settings.alice[i], settings.bob[j], config.shots, pair_stream,
                config.workers);
            json p;
            p["alice"] = settings.alice_names[i];
            p["bob"] = settings.bob_names[j];
            if (const auto analytic =
                    analytic_correlator(model, settings.alice[i], settings.bob[j])) {
                p["analytic_correlator"] = *analytic;
            }
            p["correlator"] = estimate_json(correlator_from_joint(joint));
            p["joint"] = joint_json(joint);
            pairs.push_back(std::move(p));
        }
    }

    const MarginalScanReport scan = marginal_scan(model, settings.alice, settings.bob,
                                                  config.shots, stream, config.workers);
    json results;
    results["settings"] = settings.echo;
    results["pairs"] = std::move(pairs);
    json marginals;
    marginals["alice"] = marginal_rows_json(scan.alice, settings.alice_names, settings.bob_names);
    marginals["bob"] = marginal_rows_json(scan.bob, settings.bob_names, settings.alice_names);
    marginals["shots_per_pair"] = scan.shots_per_pair;
    results["marginals"] = std::move(marginals);
    return results;
}

inline json run_chsh(const RunConfig& config) {
    const ModelDescriptor model = make_model(config);
    const ResolvedSettings settings = resolve_settings(config, /*require_all_four=*/true);
    const RandomStream stream(config.seed, 0);

    // Pair order: (X,Y), (X,Y'), (X',Y), (X',Y'). Alice/bob lists hold X, X' and
    // Y, Y' in declaration order.
    auto find_index = [](const std::vector<std::string>& names, const std::string& want) {
        for (std::size_t k = 0; k < names.size(); ++k) {
            if (names[k] == want) {
                return k;
            }
        }
        throw UsageError("settings: missing entry '" + want + "'");
    };
    const std::size_t ax = find_index(settings.alice_names, "X");
    const std::size_t axp = find_index(settings.alice_names, "X'");
    const std::size_t by = find_index(settings.bob_names, "Y");
    const std::size_t byp = find_index(settings.bob_names, "Y'");

    const std::pair<std::size_t, std::size_t> order[4] = {
        {ax, by}, {ax, byp}, {axp, by}, {axp, byp}};
    CorrelatorEstimate est[4];
    double analytic[4] = {0, 0, 0, 0};
    for (std::size_t k = 0; k < 4; ++k) {
        const Setting& a = settings.alice[order[k].first];
        const Setting& b = settings.bob[order[k].second];
        const RandomStream pair_stream =
            stream.substream(derive_context(stream.context_id(), k));
        est[k] = estimate_correlator(model, a, b, config.shots, pair_stream, config.workers);
        analytic[k] = analytic_correlator(model, a, b).value();
    }

    const MDepReport mdep = m_supremum(model);

    const CorrelatorQuad mc_quad{est[0].mean, est[1].mean, est[2].mean, est[3].mean};
    const CorrelatorQuad an_quad{analytic[0], analytic[1], analytic[2], analytic[3]};
    double mc_sigma_sq = 0.0;
    for (const CorrelatorEstimate& e : est) {
        mc_sigma_sq += e.std_error * e.std_error;
    }
    const double mc_tol = 5.0 * std::sqrt(mc_sigma_sq);
    // Analytic tolerance 1e-9 absorbs rounding at the models that sit exactly on
    // the bound (B = 2 + M at equality).
    const ChshReport mc_report = chsh_report(mc_quad, mdep.m, mc_tol);
    const ChshReport an_report = chsh_report(an_quad, mdep.m, 1e-9);

    json results;
    results["settings"] = settings.echo;
    json mc;
    mc["c_xy"] = estimate_json(est[0]);
    mc["c_xyp"] = estimate_json(est[1]);
    mc["c_xpy"] = estimate_json(est[2]);
    mc["c_xpyp"] = estimate_json(est[3]);
    mc["chsh"] = chsh_report_json(mc_report);
    results["monte_carlo"] = std::move(mc);
    json an;
    an["quad"] = json::array({an_quad.c_xy, an_quad.c_xyp, an_quad.c_xpy, an_quad.c_xpyp});
    an["chsh"] = chsh_report_json(an_report);
    results["analytic"] = std::move(an);
    results["measurement_dependence"] = mdep_json(mdep);
    return results;
}

inline json run_mdep(const RunConfig& config) {
    const ModelDescriptor model = make_model(config);
    return mdep_json(m_supremum(model));
}

inline json run_mutualinfo(const RunConfig&) {
    json results;
    results["bits"] = mutual_information_onesided();
    return results;
}

inline json lp_solution_json(const LpSolution& solution) {
    json j;
    j["status"] = solution.status == LpStatus::Optimal ? "optimal" : "infeasible";
    if (solution.status != LpStatus::Optimal) {
        return j;
    }
    j["m_star"] = solution.m_star;
    j["f_star"] = free_will(std::fmin(2.0, solution.m_star));
    j["percent_measurement_dependence"] = 100.0 * solution.m_star / 2.0;
    j["percent_measurement_independence"] = 100.0 * free_will(std::fmin(2.0, solution.m_star));
    j["rho_x"] = json(solution.rho_x);
    j["rho_xp"] = json(solution.rho_xp);
    j["achieved_quad"] = json::array({solution.achieved.c_xy, solution.achieved.c_xyp,
                                      solution.achieved.c_xpy, solution.achieved.c_xpyp});
    j["achieved_chsh_variant0"] = chsh_value(solution.achieved, 0);
    j["duality_gap"] = solution.duality_gap;
    j["iterations"] = solution.iterations;
    return j;
}

inline json run_optimize(const RunConfig& config) {
    if (config.target_b.has_value() == config.target_quad.has_value()) {
        throw UsageError("optimize: give exactly one of --target-b or --quad");
    }
    json results;
    if (config.target_b) {
        if (!(*config.target_b >= 2.0 && *config.target_b <= 4.0)) {
            throw UsageError("optimize: --target-b must lie in [2, 4]");
        }
        results["target"] = json{{"type", "chsh"}, {"b", *config.target_b}};
        results["solution"] = lp_solution_json(min_m_for_chsh(*config.target_b));
    } else {
        const CorrelatorQuad& q = *config.target_quad;
        for (const double c : {q.c_xy, q.c_xyp, q.c_xpy, q.c_xpyp}) {
            if (!(std::fabs(c) <= 1.0)) {
                throw UsageError("optimize: --quad entries must lie in [-1, 1]");
            }
        }
        results["target"] =
            json{{"type", "correlators"},
                 {"quad", json::array({q.c_xy, q.c_xyp, q.c_xpy, q.c_xpyp})}};
        results["solution"] = lp_solution_json(min_m_for_correlators(q));
    }
    return results;
}

inline json run_table(const RunConfig& config) {
    RunConfig toy_config = config;
    toy_config.model = ModelKind::ToyTable;
    const ModelDescriptor model = make_model(toy_config);
    const ToyModelParams& t = model.toy_params();

    json results;
    results["p"] = t.p;
    results["a"] = t.a.value;
    results["b"] = t.b.value;

    json rows = json::array();
    json row1;
    row1["lambda"] = 1;
    row1["outcomes"] = json{{"X", -t.a.value}, {"X'", -t.a.value}, {"Y", -t.a.value},
                            {"Y'", t.a.value}};
    row1["rho_given_x"] = 0.0;
    row1["rho_given_xp"] = t.p;
    rows.push_back(std::move(row1));
    json row2;
    row2["lambda"] = 2;
    row2["outcomes"] =
        json{{"X", t.b.value}, {"X'", t.b.value}, {"Y", t.b.value}, {"Y'", t.b.value}};
    row2["rho_given_x"] = 1.0;
    row2["rho_given_xp"] = 1.0 - t.p;
    rows.push_back(std::move(row2));
    results["table"] = std::move(rows);

    const Setting ctx_x = SettingLabel::X;
    const Setting ctx_xp = SettingLabel::Xprime;
    const Setting ctx_y = SettingLabel::Y;
    const Setting ctx_yp = SettingLabel::Yprime;
    const CorrelatorQuad quad{analytic_correlator(model, ctx_x, ctx_y).value(),
                              analytic_correlator(model, ctx_x, ctx_yp).value(),
                              analytic_correlator(model, ctx_xp, ctx_y).value(),
                              analytic_correlator(model, ctx_xp, ctx_yp).value()};
    const MDepReport mdep = m_supremum(model);

    results["quad"] = json::array({quad.c_xy, quad.c_xyp, quad.c_xpy, quad.c_xpyp});
    results["chsh_b"] = chsh_value(quad, 0);
    results["chsh"] = chsh_report_json(chsh_report(quad, mdep.m, 0.0));
    results["measurement_dependence"] = mdep_json(mdep);
    // P(b = +1 | X) = [b = +1]; P(b = +1 | X') shifts by p when the lambda_1
    // outcome -a differs from b.
    results["bob_marginal_variation"] = t.a.value == t.b.value ? t.p : 0.0;
    return results;
}

inline std::vector<double> sweep_grid(const SweepRange& range) {
    if (!(range.step > 0.0)) {
        throw UsageError("sweep: step must be > 0");
    }
    if (!(range.start <= range.stop)) {
        throw UsageError("sweep: start must be <= stop");
    }
    std::vector<double> grid;
    const double span = range.stop - range.start;
    const auto count = static_cast<std::size_t>(std::floor(span / range.step + 1e-9));
    for (std::size_t k = 0; k <= count; ++k) {
        grid.push_back(range.start + static_cast<double>(k) * range.step);
    }
    return grid;
}

inline json run_sweep(const RunConfig& config) {
    if (config.p_range.has_value() == config.b_range.has_value()) {
        throw UsageError("sweep: give exactly one of --p-range or --b-range");
    }
    json rows = json::array();
    if (config.p_range) {
        for (const double p : sweep_grid(*config.p_range)) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw UsageError("sweep: p values must lie in [0, 1]");
            }
            const CorrelatorQuad quad{1.0, 1.0, 1.0, 1.0 - 2.0 * p};
            const double b = chsh_value(quad, 0);
            const double m = 2.0 * p;
            const LpSolution lp = min_m_for_chsh(b);
            json row;
            row["p"] = p;
            row["chsh_B"] = b;
            row["M"] = m;
            row["F"] = free_will(m);
            row["m_star"] = lp.m_star;
            rows.push_back(std::move(row));
        }
    } else {
        for (const double b : sweep_grid(*config.b_range)) {
            if (!(b >= 2.0 && b <= 4.0)) {
                throw UsageError("sweep: B values must lie in [2, 4]");
            }
            const LpSolution lp = min_m_for_chsh(b);
            json row;
            row["B"] = b;
            row["chsh_B"] = b;
            row["M"] = lp.m_star;
            row["F"] = free_will(std::fmin(2.0, lp.m_star));
            row["m_star"] = lp.m_star;
            rows.push_back(std::move(row));
        }
    }
    json results;
    results["rows"] = std::move(rows);
    return results;
}

}  // namespace detail

/// Dispatches a configuration to the implementing module and wraps the result
/// in the report envelope. Identical configurations (including seed) produce
/// identical payloads; wall_time_ms is the only non-reproducible field.
inline Report run(const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    if (config.shots == 0) {
        throw UsageError("--shots must be >= 1");
    }
    if (config.workers == 0) {
        throw UsageError("--workers must be >= 1");
    }

    detail::json results;
    switch (config.command) {
        case Command::Simulate: results = detail::run_simulate(config); break;
        case Command::Chsh: results = detail::run_chsh(config); break;
        case Command::Mdep: results = detail::run_mdep(config); break;
        case Command::MutualInfo: results = detail::run_mutualinfo(config); break;
        case Command::Optimize: results = detail::run_optimize(config); break;
        case Command::Table: results = detail::run_table(config); break;
        case Command::Sweep: results = detail::run_sweep(config); break;
    }

    const auto t1 = std::chrono::steady_clock::now();
    Report report;
    report.doc["command"] = to_string(config.command);
    report.doc["artifact_version"] = kArtifactVersion;
    report.doc["config"] = detail::config_echo(config);
    report.doc["results"] = std::move(results);
    report.doc["wall_time_ms"] =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    return report;
}

/// Sweep entry point (equivalent to run() with a sweep command).
inline Report sweep(const RunConfig& config) {
    RunConfig c = config;
    c.command = Command::Sweep;
    return run(c);
}

}  // namespace mdbell
