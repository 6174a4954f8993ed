#include "cmx/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cmx {

Json to_json(const Dmc& w) {
    Json rows = Json::array();
    for (Eigen::Index x = 0; x < w.x_size(); ++x) {
        Json row = Json::array();
        for (Eigen::Index y = 0; y < w.y_size(); ++y) row.push_back(w.prob(y, x));
        rows.push_back(row);
    }
    return Json{{"x_size", w.x_size()}, {"y_size", w.y_size()}, {"rows", rows}};
}

Dmc dmc_from_json(const Json& j) {
    const auto rows = j.at("rows");
    const Eigen::Index nx = j.at("x_size").get<Eigen::Index>();
    const Eigen::Index ny = j.at("y_size").get<Eigen::Index>();
    Mat w(nx, ny);
    for (Eigen::Index x = 0; x < nx; ++x)
        for (Eigen::Index y = 0; y < ny; ++y) w(x, y) = rows.at(x).at(y).get<double>();
    return Dmc(std::move(w));
}

Json to_json(const Pmf& p) {
    Json probs = Json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i) probs.push_back(p[i]);
    return Json{{"probs", probs}};
}

Pmf pmf_from_json(const Json& j) {
    const auto& arr = j.is_array() ? j : j.at("probs");
    Vec v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr.at(i).get<double>();
    return Pmf(std::move(v));
}

Json to_json(const ChannelFamily& family) {
    Json entries = Json::array();
    for (const auto& e : family.grid()) {
        Json entry{{"label", e.label}};
        if (e.theta.has_value()) entry["theta"] = *e.theta;
        entry["channel"] = to_json(e.channel);
        entries.push_back(entry);
    }
    return Json{{"grid", entries}};
}

namespace {
Json mat_to_json(const Mat& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}
} // namespace

Json to_json(const XiResult& r, const ChannelFamily& family) {
    Json w;
    w["theta_index"] = r.witness.theta_index;
    w["theta_prime_index"] = r.witness.theta_prime_index;
    if (r.witness.theta_index >= 0) {
        const auto& e = family.grid()[r.witness.theta_index];
        if (e.theta.has_value()) w["theta"] = *e.theta;
    }
    if (r.witness.theta_prime_index >= 0) {
        const auto& e = family.grid()[r.witness.theta_prime_index];
        if (e.theta.has_value()) w["theta_prime"] = *e.theta;
    }
    w["rho"] = r.witness.rho;
    w["s_or_lambda"] = r.witness.s_or_lambda;
    w["branch"] = r.witness.branch;
    if (r.witness.p_y.has_value()) {
        Json py = Json::array();
        for (Eigen::Index i = 0; i < r.witness.p_y->size(); ++i) py.push_back((*r.witness.p_y)(i));
        w["p_y"] = py;
    }
    if (r.witness.cond_x.has_value()) w["cond_x_given_y"] = mat_to_json(*r.witness.cond_x);
    if (r.witness.cond_xp.has_value()) w["cond_xp_given_y"] = mat_to_json(*r.witness.cond_xp);

    Json skipped = Json::array();
    for (int i : r.diagnostics.skipped_theta_indices) {
        Json s{{"index", i}};
        const auto& e = family.grid()[i];
        if (e.theta.has_value()) s["theta"] = *e.theta;
        skipped.push_back(s);
    }
    Json diag;
    diag["mode"] = r.diagnostics.mode;
    diag["skipped_theta"] = skipped;
    diag["er_star"] = r.diagnostics.er_star_values;
    diag["grids"] = Json{{"p_y_points", r.diagnostics.grids.p_y_points},
                         {"conditional_points", r.diagnostics.grids.conditional_points},
                         {"rho_points", r.diagnostics.grids.rho_points},
                         {"s_points", r.diagnostics.grids.s_points},
                         {"refinement_rounds", r.diagnostics.grids.refinement_rounds}};
    return Json{{"xi", r.xi}, {"witness", w}, {"diagnostics", diag}};
}

Json to_json(const SimReport& r) {
    Json j;
    j["errors"] = r.errors;
    j["trials"] = r.trials;
    j["p_hat"] = r.p_hat;
    j["ci95"] = Json{{"lo", r.ci95.lo}, {"hi", r.ci95.hi}};
    if (r.info_bits > 0) {
        j["bit_errors"] = r.bit_errors;
        j["info_bits"] = r.info_bits;
    }
    return j;
}

Json to_json(const RatioTable& t) {
    Json rows = Json::array();
    for (const auto& r : t.rows) {
        rows.push_back(Json{{"theta", r.theta},
                            {"trials", r.trials},
                            {"errors", r.errors},
                            {"p_hat", r.p_hat},
                            {"ci_lo", r.ci95.lo},
                            {"ci_hi", r.ci95.hi},
                            {"er_star", r.er_star},
                            {"ratio", r.ratio},
                            {"upper_bound_only", r.upper_bound_only}});
    }
    return Json{{"xi", t.xi}, {"block_length", t.block_length}, {"max_ratio", t.max_ratio}, {"rows", rows}};
}

Json to_json(const Codebook& cb) {
    Json words = Json::array();
    for (const auto& wv : cb.words) {
        Json word = Json::array();
        for (Symbol s : wv) word.push_back(static_cast<int>(s));
        words.push_back(word);
    }
    return Json{{"M", cb.message_count()}, {"N", cb.block_length()}, {"words", words}};
}

Json to_json(const LinearCodeSpec& spec) {
    Json g = Json::array();
    for (const auto& row : spec.g) {
        Json r = Json::array();
        for (Symbol s : row) r.push_back(static_cast<int>(s));
        g.push_back(r);
    }
    Json v0 = Json::array();
    for (Symbol s : spec.v0) v0.push_back(static_cast<int>(s));
    return Json{{"K", spec.k()}, {"N", spec.n()}, {"systematic", spec.systematic}, {"g", g}, {"v0", v0}};
}

Json to_json(const ConvCodeSpec& spec) {
    Json gens = Json::array();
    for (const auto& per_time : spec.generators) {
        Json jt = Json::array();
        for (const auto& gmat : per_time) {
            Json jm = Json::array();
            for (const auto& row : gmat) {
                Json jr = Json::array();
                for (Symbol s : row) jr.push_back(static_cast<int>(s));
                jm.push_back(jr);
            }
            jt.push_back(jm);
        }
        gens.push_back(jt);
    }
    Json v0 = Json::array();
    for (const auto& v : spec.v0) {
        Json jr = Json::array();
        for (Symbol s : v) jr.push_back(static_cast<int>(s));
        v0.push_back(jr);
    }
    return Json{{"b", spec.b}, {"n", spec.n}, {"K", spec.K}, {"L", spec.L}, {"generators", gens}, {"v0", v0}};
}

std::string ratio_table_csv(const RatioTable& t) {
    std::ostringstream os;
    os << "theta,N,trials,errors,p_hat,ci_lo,ci_hi,ratio\n";
    for (const auto& r : t.rows) {
        os << r.theta << ',' << t.block_length << ',' << r.trials << ',' << r.errors << ',' << r.p_hat << ','
           << r.ci95.lo << ',' << r.ci95.hi << ',' << r.ratio << '\n';
    }
    return os.str();
}

std::string xi_result_csv(const XiResult& r, const ChannelFamily& family) {
    std::ostringstream os;
    os << "xi,mode,theta,theta_prime,rho,s_or_lambda,branch,skipped\n";
    double th = -1.0, tp = -1.0;
    if (r.witness.theta_index >= 0 && family.grid()[r.witness.theta_index].theta)
        th = *family.grid()[r.witness.theta_index].theta;
    if (r.witness.theta_prime_index >= 0 && family.grid()[r.witness.theta_prime_index].theta)
        tp = *family.grid()[r.witness.theta_prime_index].theta;
    os << r.xi << ',' << r.diagnostics.mode << ',' << th << ',' << tp << ',' << r.witness.rho << ','
       << r.witness.s_or_lambda << ',' << r.witness.branch << ',' << r.diagnostics.skipped_theta_indices.size()
       << '\n';
    return os.str();
}

std::string sim_report_csv(const SimReport& r) {
    std::ostringstream os;
    os << "trials,errors,p_hat,ci_lo,ci_hi,bit_errors,info_bits\n";
    os << r.trials << ',' << r.errors << ',' << r.p_hat << ',' << r.ci95.lo << ',' << r.ci95.hi << ','
       << r.bit_errors << ',' << r.info_bits << '\n';
    return os.str();
}

void write_result_file(const std::string& path, const std::string& schema, const Json& config,
                       const Json& payload) {
    Json doc;
    doc["schema"] = schema;
    doc["version"] = kArtifactVersion;
    doc["config"] = config;
    doc["result"] = payload;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << doc.dump(2) << '\n';
}

} // namespace cmx
