#include "cmx/serialize.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitEmptyFamily = 3;
constexpr int kExitCapacity = 4;

using cmx::Json;

struct FamilyArgs {
    std::string channel = "bsc";
    double theta_lo = 0.001;
    double theta_hi = 0.499;
    double theta_step = 0.0125;
};

void add_family_flags(CLI::App* app, FamilyArgs& fa) {
    app->add_option("--channel", fa.channel, "Channel family: 'bsc' or 'file:<path>' with an explicit grid")
        ->capture_default_str();
    app->add_option("--theta-lo", fa.theta_lo, "BSC grid lower crossover probability")->capture_default_str();
    app->add_option("--theta-hi", fa.theta_hi, "BSC grid upper crossover probability")->capture_default_str();
    app->add_option("--theta-step", fa.theta_step, "BSC grid step")->capture_default_str();
}

cmx::ChannelFamily build_family(const FamilyArgs& fa) {
    if (fa.channel == "bsc") return cmx::ChannelFamily::bsc_interval(fa.theta_lo, fa.theta_hi, fa.theta_step);
    if (fa.channel.rfind("file:", 0) == 0) {
        const std::string path = fa.channel.substr(5);
        std::ifstream in(path);
        if (!in) throw CLI::ValidationError("--channel", "cannot open " + path);
        Json doc = Json::parse(in);
        std::vector<cmx::ChannelFamily::Entry> entries;
        for (const auto& e : doc.at("grid")) {
            cmx::ChannelFamily::Entry entry{cmx::dmc_from_json(e.at("channel")),
                                            e.value("label", "ch" + std::to_string(entries.size())),
                                            std::nullopt};
            if (e.contains("theta")) entry.theta = e.at("theta").get<double>();
            entries.push_back(std::move(entry));
        }
        return cmx::ChannelFamily::explicit_grid(std::move(entries));
    }
    throw CLI::ValidationError("--channel", "unknown channel spec '" + fa.channel + "'");
}

cmx::DeltaStarSpec parse_delta(const std::string& s) {
    if (s == "uniform") return cmx::DeltaStarSpec::uniform_alphabet();
    if (s == "linear") return cmx::DeltaStarSpec::linear_binary();
    if (s.rfind("iid:", 0) == 0) {
        std::ifstream in(s.substr(4));
        if (!in) throw CLI::ValidationError("--delta", "cannot open pmf file");
        return cmx::DeltaStarSpec::iid_ref(cmx::pmf_from_json(Json::parse(in)));
    }
    if (s.rfind("nbhd:", 0) == 0) {
        const auto rest = s.substr(5);
        const auto colon = rest.rfind(':');
        if (colon == std::string::npos) throw CLI::ValidationError("--delta", "expected nbhd:<file>:<radius>");
        std::ifstream in(rest.substr(0, colon));
        if (!in) throw CLI::ValidationError("--delta", "cannot open pmf file");
        const double radius = std::stod(rest.substr(colon + 1));
        return cmx::DeltaStarSpec::type_neighborhood(cmx::pmf_from_json(Json::parse(in)), radius);
    }
    throw CLI::ValidationError("--delta", "unknown delta spec '" + s + "'");
}

void emit(const std::string& out_path, const std::string& format, const std::string& schema,
          const Json& config, const Json& payload, const std::string& csv) {
    if (out_path.empty()) {
        Json doc{{"schema", schema}, {"version", cmx::kArtifactVersion}, {"config", config}, {"result", payload}};
        std::cout << doc.dump(2) << '\n';
        return;
    }
    if (format == "csv") {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open output file: " + out_path);
        f << csv;
    } else {
        cmx::write_result_file(out_path, schema, config, payload);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Competitive-minimax universal decoding toolkit"};
    app.require_subcommand(1);

    // ---- xi ----
    auto* xi_cmd = app.add_subcommand("xi", "Solve the competitive-minimax fraction over a channel family");
    FamilyArgs xi_family;
    add_family_flags(xi_cmd, xi_family);
    double xi_rate = 0.0, xi_rate_bits = 0.0;
    auto* rate_opt = xi_cmd->add_option("--rate", xi_rate, "Code rate in nats/symbol");
    auto* rate_bits_opt = xi_cmd->add_option("--rate-bits", xi_rate_bits, "Code rate in bits/symbol");
    std::string xi_delta = "uniform", xi_mode = "lb", xi_out, xi_format = "json";
    xi_cmd->add_option("--delta", xi_delta, "Coding-distribution spec: uniform|linear|iid:<file>|nbhd:<file>:<radius>")
        ->capture_default_str();
    xi_cmd->add_option("--mode", xi_mode, "Solver mode: lb|exact|bsc-closed")->capture_default_str();
    xi_cmd->add_option("--out", xi_out, "Output file path (stdout when omitted)");
    xi_cmd->add_option("--format", xi_format, "Output format: json|csv")->capture_default_str();
    cmx::GridSpec xi_grids;
    double xi_floor = 1e-6;
    int xi_threads = 0;
    xi_cmd->add_option("--py-points", xi_grids.p_y_points, "Output-distribution grid points per dof")->capture_default_str();
    xi_cmd->add_option("--cond-points", xi_grids.conditional_points, "Conditional grid points per dof")->capture_default_str();
    xi_cmd->add_option("--rho-points", xi_grids.rho_points, "rho grid points")->capture_default_str();
    xi_cmd->add_option("--s-points", xi_grids.s_points, "s (or lambda) grid points")->capture_default_str();
    xi_cmd->add_option("--refine", xi_grids.refinement_rounds, "Local refinement rounds")->capture_default_str();
    xi_cmd->add_option("--denom-floor", xi_floor, "E_r^* floor below which a theta is excluded")->capture_default_str();
    xi_cmd->add_option("--threads", xi_threads, "Worker threads (0 = hardware)")->capture_default_str();

    // ---- exponent ----
    auto* exp_cmd = app.add_subcommand("exponent", "Closed-form exponent quantities for the BSC");
    double exp_theta = 0.1, exp_rate = 0.0, exp_rho = 1.0;
    std::string exp_quantity = "er-star", exp_out, exp_format = "json";
    exp_cmd->add_option("--theta", exp_theta, "Crossover probability")->required();
    exp_cmd->add_option("--rate", exp_rate, "Code rate in nats/symbol")->capture_default_str();
    exp_cmd->add_option("--rho", exp_rho, "rho for --quantity e0")->capture_default_str();
    exp_cmd->add_option("--quantity", exp_quantity, "er-star|e0|cutoff|capacity")->capture_default_str();
    exp_cmd->add_option("--out", exp_out, "Output file path (stdout when omitted)");
    exp_cmd->add_option("--format", exp_format, "Output format: json|csv")->capture_default_str();

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo error-rate estimation");
    sim_cmd->require_subcommand(1);

    auto* sim_conv = sim_cmd->add_subcommand("conv", "Time-varying convolutional ensemble, bit errors");
    int cv_b = 1, cv_n = 2, cv_K = 3, cv_L = 64;
    double cv_theta = 0.02;
    std::string cv_decoder = "two-trellis", cv_out, cv_format = "json";
    long cv_trials = 1000;
    std::uint64_t cv_seed = 0;
    int cv_threads = 0;
    sim_conv->add_option("--b", cv_b, "Info bits per branch")->capture_default_str();
    sim_conv->add_option("--n", cv_n, "Code bits per branch")->capture_default_str();
    sim_conv->add_option("--K", cv_K, "Constraint-length factor")->capture_default_str();
    sim_conv->add_option("--L", cv_L, "Information branches")->capture_default_str();
    sim_conv->add_option("--theta", cv_theta, "True crossover probability")->capture_default_str();
    sim_conv->add_option("--decoder", cv_decoder, "two-trellis|ml-viterbi")->capture_default_str();
    sim_conv->add_option("--trials", cv_trials, "Monte Carlo trials")->capture_default_str();
    sim_conv->add_option("--seed", cv_seed, "Master seed")->required();
    sim_conv->add_option("--threads", cv_threads, "Worker threads (0 = hardware)")->capture_default_str();
    sim_conv->add_option("--out", cv_out, "Output file path (stdout when omitted)");
    sim_conv->add_option("--format", cv_format, "Output format: json|csv")->capture_default_str();

    auto* sim_block = sim_cmd->add_subcommand("block", "Block-code ensembles");
    std::string bl_ensemble = "iid", bl_decoder = "ml", bl_out, bl_format = "json";
    std::size_t bl_M = 16, bl_K = 4, bl_N = 64;
    double bl_theta = 0.05, bl_xi = 1.0;
    long bl_trials = 1000;
    std::uint64_t bl_seed = 0;
    int bl_threads = 0;
    bool bl_fixed_code = false;
    FamilyArgs bl_family; // minimax decoder family
    bl_family.theta_lo = 0.05;
    bl_family.theta_hi = 0.30;
    sim_block->add_option("--ensemble", bl_ensemble, "iid|linear|systematic")->capture_default_str();
    sim_block->add_option("--M", bl_M, "Messages (iid ensemble)")->capture_default_str();
    sim_block->add_option("--K", bl_K, "Information bits (linear ensembles)")->capture_default_str();
    sim_block->add_option("--N", bl_N, "Block length")->capture_default_str();
    sim_block->add_option("--theta", bl_theta, "True crossover probability")->capture_default_str();
    sim_block->add_option("--decoder", bl_decoder, "ml|rho|minimax|mmi")->capture_default_str();
    sim_block->add_option("--xi", bl_xi, "xi for the minimax decoder")->capture_default_str();
    add_family_flags(sim_block, bl_family);
    sim_block->add_option("--trials", bl_trials, "Monte Carlo trials")->capture_default_str();
    sim_block->add_option("--seed", bl_seed, "Master seed")->required();
    sim_block->add_flag("--fixed-code", bl_fixed_code, "Draw one code for all trials instead of one per trial");
    sim_block->add_option("--threads", bl_threads, "Worker threads (0 = hardware)")->capture_default_str();
    sim_block->add_option("--out", bl_out, "Output file path (stdout when omitted)");
    sim_block->add_option("--format", bl_format, "Output format: json|csv")->capture_default_str();

    auto* sim_ratio = sim_cmd->add_subcommand("ratio", "Empirical competitive ratios over a BSC grid");
    FamilyArgs rt_family;
    rt_family.theta_lo = 0.05;
    rt_family.theta_hi = 0.30;
    add_family_flags(sim_ratio, rt_family);
    std::string rt_decoder = "rho", rt_out, rt_format = "json";
    std::size_t rt_M = 16, rt_N = 64;
    double rt_xi = 1.0;
    long rt_trials = 10000;
    std::uint64_t rt_seed = 0;
    int rt_threads = 0;
    sim_ratio->add_option("--M", rt_M, "Messages")->capture_default_str();
    sim_ratio->add_option("--N", rt_N, "Block length")->capture_default_str();
    sim_ratio->add_option("--decoder", rt_decoder, "ml|rho|minimax|mmi")->capture_default_str();
    sim_ratio->add_option("--xi", rt_xi, "xi in the denominator e^{-N xi E_r^*}")->capture_default_str();
    sim_ratio->add_option("--trials", rt_trials, "Trials per theta")->capture_default_str();
    sim_ratio->add_option("--seed", rt_seed, "Master seed")->required();
    sim_ratio->add_option("--threads", rt_threads, "Worker threads (0 = hardware)")->capture_default_str();
    sim_ratio->add_option("--out", rt_out, "Output file path (stdout when omitted)");
    sim_ratio->add_option("--format", rt_format, "Output format: json|csv")->capture_default_str();

    // ---- oracle ----
    auto* orc_cmd = app.add_subcommand("oracle", "Exhaustive-enumeration oracles");
    orc_cmd->require_subcommand(1);

    auto* orc_moment = orc_cmd->add_subcommand("moment", "Finite-block moment vs single-letter rate");
    int om_N = 12;
    double om_theta = 0.1, om_alpha = 1.0, om_xi = 0.0, om_rate = 0.1;
    std::string om_dist = "iid", om_y = "balanced", om_out, om_format = "json";
    orc_moment->add_option("--N", om_N, "Block length")->capture_default_str();
    orc_moment->add_option("--theta", om_theta, "BSC crossover probability")->capture_default_str();
    orc_moment->add_option("--alpha", om_alpha, "Moment exponent alpha")->capture_default_str();
    orc_moment->add_option("--xi", om_xi, "xi inside the metric")->capture_default_str();
    orc_moment->add_option("--rate", om_rate, "Rate at which E_r^* is taken (nats)")->capture_default_str();
    orc_moment->add_option("--dist", om_dist, "Coding distribution: iid|typeclass")->capture_default_str();
    orc_moment->add_option("--y", om_y, "Received word: balanced|zeros|ones:<k>")->capture_default_str();
    orc_moment->add_option("--out", om_out, "Output file path (stdout when omitted)");
    orc_moment->add_option("--format", om_format, "Output format: json|csv")->capture_default_str();

    auto* orc_exact = orc_cmd->add_subcommand("exact-error", "Exact per-message error probabilities");
    int oe_N = 6, oe_K = 2;
    double oe_theta = 0.1, oe_xi = 1.0;
    bool oe_systematic = false;
    std::uint64_t oe_seed = 1;
    std::string oe_decoder = "minimax", oe_out, oe_format = "json";
    FamilyArgs oe_family;
    oe_family.theta_lo = 0.05;
    oe_family.theta_hi = 0.30;
    orc_exact->add_option("--N", oe_N, "Block length (<= 14)")->capture_default_str();
    orc_exact->add_option("--K", oe_K, "Information bits")->capture_default_str();
    orc_exact->add_option("--theta", oe_theta, "BSC crossover probability")->capture_default_str();
    orc_exact->add_option("--xi", oe_xi, "xi for the minimax metric")->capture_default_str();
    orc_exact->add_flag("--systematic", oe_systematic, "Systematic ensemble");
    orc_exact->add_option("--seed", oe_seed, "Code draw seed")->capture_default_str();
    orc_exact->add_option("--decoder", oe_decoder, "minimax|rho|ml")->capture_default_str();
    add_family_flags(orc_exact, oe_family);
    orc_exact->add_option("--out", oe_out, "Output file path (stdout when omitted)");
    orc_exact->add_option("--format", oe_format, "Output format: json|csv")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (xi_cmd->parsed()) {
            if (!*rate_opt && !*rate_bits_opt) {
                std::cerr << "xi: --rate (nats) or --rate-bits is required\n" << xi_cmd->help() << '\n';
                return kExitUsage;
            }
            const double rate = *rate_opt ? xi_rate : xi_rate_bits * std::log(2.0);
            cmx::XiProblem p{build_family(xi_family), rate, parse_delta(xi_delta),
                             cmx::XiMode::LowerBound, xi_grids, xi_floor, xi_threads};
            if (xi_mode == "lb")
                p.mode = cmx::XiMode::LowerBound;
            else if (xi_mode == "exact")
                p.mode = cmx::XiMode::Exact;
            else if (xi_mode == "bsc-closed")
                p.mode = cmx::XiMode::BscClosedForm;
            else {
                std::cerr << "xi: unknown --mode '" << xi_mode << "'\n";
                return kExitUsage;
            }
            if (p.mode == cmx::XiMode::BscClosedForm && !p.family.all_bsc()) {
                std::cerr << "xi: --mode bsc-closed needs a BSC family\n";
                return kExitUsage;
            }
            if (p.mode == cmx::XiMode::Exact) {
                const auto& ch = p.family.grid()[0].channel;
                if (ch.x_size() > 4 || ch.y_size() > 4) {
                    std::cerr << "xi: --mode exact supports alphabets of size <= 4\n";
                    return kExitUsage;
                }
            }
            if (p.mode == cmx::XiMode::BscClosedForm) {
                p.grids.rho_points = std::max(p.grids.rho_points, 400);
                p.grids.s_points = std::max(p.grids.s_points, 400);
            }
            cmx::XiResult r;
            try {
                r = cmx::solve_xi(p);
            } catch (const std::runtime_error& e) {
                std::cerr << "xi: " << e.what() << '\n';
                return kExitEmptyFamily;
            }
            Json config{{"channel", xi_family.channel},
                        {"theta_lo", xi_family.theta_lo},
                        {"theta_hi", xi_family.theta_hi},
                        {"theta_step", xi_family.theta_step},
                        {"rate_nats", rate},
                        {"delta", xi_delta},
                        {"mode", xi_mode},
                        {"denom_floor", xi_floor},
                        {"grids",
                         Json{{"p_y_points", p.grids.p_y_points},
                              {"conditional_points", p.grids.conditional_points},
                              {"rho_points", p.grids.rho_points},
                              {"s_points", p.grids.s_points},
                              {"refinement_rounds", p.grids.refinement_rounds}}}};
            emit(xi_out, xi_format, "cmx.xi_result/1", config, cmx::to_json(r, p.family),
                 cmx::xi_result_csv(r, p.family));
            return kExitOk;
        }

        if (exp_cmd->parsed()) {
            Json payload;
            if (exp_quantity == "er-star") {
                const cmx::ErCurve c = cmx::bsc_Er_star(exp_theta, exp_rate);
                payload = Json{{"value", c.value}, {"rho_hat", c.rho_hat}};
            } else if (exp_quantity == "e0") {
                payload = Json{{"value", cmx::conv_E0(cmx::bsc(exp_theta), exp_rho)}, {"rho", exp_rho}};
            } else if (exp_quantity == "cutoff") {
                payload = Json{{"value", cmx::conv_cutoff_R0(cmx::bsc(exp_theta))}};
            } else if (exp_quantity == "capacity") {
                payload = Json{{"value", cmx::capacity(cmx::bsc(exp_theta))}};
            } else {
                std::cerr << "exponent: unknown --quantity '" << exp_quantity << "'\n";
                return kExitUsage;
            }
            Json config{{"theta", exp_theta}, {"rate_nats", exp_rate}, {"quantity", exp_quantity}};
            std::ostringstream csv;
            csv << "quantity,theta,rate,value\n"
                << exp_quantity << ',' << exp_theta << ',' << exp_rate << ',' << payload.at("value").get<double>()
                << '\n';
            emit(exp_out, exp_format, "cmx.exponent/1", config, payload, csv.str());
            return kExitOk;
        }

        if (sim_conv->parsed()) {
            cmx::SimConfig cfg;
            cfg.ensemble = cmx::ConvEnsemble{cv_b, cv_n, cv_K, cv_L};
            cfg.theta = cv_theta;
            cfg.trials = cv_trials;
            cfg.seed = cv_seed;
            cfg.threads = cv_threads;
            if (cv_decoder == "two-trellis")
                cfg.conv_decoder = cmx::SimConfig::ConvDecoder::TwoTrellis;
            else if (cv_decoder == "ml-viterbi")
                cfg.conv_decoder = cmx::SimConfig::ConvDecoder::MlViterbi;
            else {
                std::cerr << "simulate conv: unknown --decoder '" << cv_decoder << "'\n";
                return kExitUsage;
            }
            const cmx::SimReport rep = cmx::run_conv_sim(cfg);
            Json config{{"ensemble", "conv"}, {"b", cv_b}, {"n", cv_n}, {"K", cv_K}, {"L", cv_L},
                        {"theta", cv_theta}, {"decoder", cv_decoder}, {"trials", cv_trials}, {"seed", cv_seed}};
            emit(cv_out, cv_format, "cmx.sim_report/1", config, cmx::to_json(rep), cmx::sim_report_csv(rep));
            return kExitOk;
        }

        if (sim_block->parsed()) {
            cmx::SimConfig cfg;
            if (bl_ensemble == "iid") {
                cfg.ensemble = cmx::IidEnsemble{cmx::Pmf::uniform(2), bl_M, bl_N};
            } else if (bl_ensemble == "linear" || bl_ensemble == "systematic") {
                cfg.ensemble = cmx::LinearEnsemble{bl_K, bl_N, bl_ensemble == "systematic"};
            } else {
                std::cerr << "simulate block: unknown --ensemble '" << bl_ensemble << "'\n";
                return kExitUsage;
            }
            cfg.theta = bl_theta;
            cfg.trials = bl_trials;
            cfg.seed = bl_seed;
            cfg.threads = bl_threads;
            cfg.fresh_code_per_trial = !bl_fixed_code;
            const double code_rate = bl_ensemble == "iid"
                                         ? std::log(static_cast<double>(bl_M)) / static_cast<double>(bl_N)
                                         : static_cast<double>(bl_K) * std::log(2.0) / static_cast<double>(bl_N);
            if (bl_decoder == "ml")
                cfg.decoder = cmx::DecoderKind::ml(cmx::bsc(bl_theta));
            else if (bl_decoder == "rho")
                cfg.decoder = cmx::DecoderKind::rho();
            else if (bl_decoder == "mmi")
                cfg.decoder = cmx::DecoderKind::mmi();
            else if (bl_decoder == "minimax")
                cfg.decoder = cmx::DecoderKind::minimax(build_family(bl_family), bl_xi, code_rate);
            else {
                std::cerr << "simulate block: unknown --decoder '" << bl_decoder << "'\n";
                return kExitUsage;
            }
            const cmx::SimReport rep = cmx::run_block_sim(cfg);
            Json config{{"ensemble", bl_ensemble}, {"M", bl_M}, {"K", bl_K}, {"N", bl_N},
                        {"theta", bl_theta}, {"decoder", bl_decoder}, {"xi", bl_xi},
                        {"rate_nats", code_rate}, {"trials", bl_trials}, {"seed", bl_seed},
                        {"fresh_code_per_trial", cfg.fresh_code_per_trial}};
            emit(bl_out, bl_format, "cmx.sim_report/1", config, cmx::to_json(rep), cmx::sim_report_csv(rep));
            return kExitOk;
        }

        if (sim_ratio->parsed()) {
            cmx::SimConfig base;
            base.ensemble = cmx::IidEnsemble{cmx::Pmf::uniform(2), rt_M, rt_N};
            base.trials = rt_trials;
            base.seed = rt_seed;
            base.threads = rt_threads;
            const cmx::ChannelFamily family = build_family(rt_family);
            const double code_rate = std::log(static_cast<double>(rt_M)) / static_cast<double>(rt_N);
            if (rt_decoder == "rho")
                base.decoder = cmx::DecoderKind::rho();
            else if (rt_decoder == "ml")
                base.decoder = cmx::DecoderKind::ml(cmx::bsc(0.5)); // replaced per theta below
            else if (rt_decoder == "mmi")
                base.decoder = cmx::DecoderKind::mmi();
            else if (rt_decoder == "minimax")
                base.decoder = cmx::DecoderKind::minimax(family, rt_xi, code_rate);
            else {
                std::cerr << "simulate ratio: unknown --decoder '" << rt_decoder << "'\n";
                return kExitUsage;
            }
            cmx::RatioTable table;
            if (rt_decoder == "ml") {
                // matched ML per theta
                for (const auto& e : family.grid()) {
                    cmx::SimConfig cfg = base;
                    cfg.theta = *e.theta;
                    cfg.decoder = cmx::DecoderKind::ml(e.channel);
                    const cmx::RatioTable one =
                        cmx::competitive_ratio(cfg, cmx::ChannelFamily::singleton(e.channel, e.label), rt_xi, code_rate);
                    table.rows.push_back(one.rows[0]);
                    table.max_ratio = std::max(table.max_ratio, one.max_ratio);
                }
                table.xi = rt_xi;
                table.block_length = rt_N;
            } else {
                table = cmx::competitive_ratio(base, family, rt_xi, code_rate);
            }
            Json config{{"M", rt_M}, {"N", rt_N}, {"decoder", rt_decoder}, {"xi", rt_xi},
                        {"rate_nats", code_rate}, {"trials", rt_trials}, {"seed", rt_seed},
                        {"theta_lo", rt_family.theta_lo}, {"theta_hi", rt_family.theta_hi},
                        {"theta_step", rt_family.theta_step}};
            emit(rt_out, rt_format, "cmx.ratio_table/1", config, cmx::to_json(table), cmx::ratio_table_csv(table));
            return kExitOk;
        }

        if (orc_moment->parsed()) {
            if (om_N < 1 || om_N > 20) {
                std::cerr << "oracle moment: N exceeds the enumeration capacity (2^20 vectors)\n";
                return kExitCapacity;
            }
            std::vector<cmx::Symbol> y(static_cast<std::size_t>(om_N), 0);
            if (om_y == "balanced") {
                for (int i = 0; i < om_N / 2; ++i) y[static_cast<std::size_t>(i)] = 1;
            } else if (om_y == "zeros") {
                // all zero already
            } else if (om_y.rfind("ones:", 0) == 0) {
                const int k = std::stoi(om_y.substr(5));
                if (k < 0 || k > om_N) {
                    std::cerr << "oracle moment: ones count out of range\n";
                    return kExitUsage;
                }
                for (int i = 0; i < k; ++i) y[static_cast<std::size_t>(i)] = 1;
            } else {
                std::cerr << "oracle moment: unknown --y '" << om_y << "'\n";
                return kExitUsage;
            }
            cmx::MomentQ dist;
            dist.q = cmx::Pmf::uniform(2);
            cmx::DeltaStarSpec spec = cmx::DeltaStarSpec::uniform_alphabet();
            if (om_dist == "typeclass") {
                dist.kind = cmx::MomentQ::Kind::TypeClass;
                dist.ones = om_N / 2;
                spec = cmx::DeltaStarSpec::type_neighborhood(cmx::Pmf::uniform(2), 0.0);
            } else if (om_dist != "iid") {
                std::cerr << "oracle moment: unknown --dist '" << om_dist << "'\n";
                return kExitUsage;
            }
            const cmx::Dmc w = cmx::bsc(om_theta);
            long ones_y = 0;
            for (auto s : y) ones_y += s;
            cmx::Vec pyv(2);
            pyv << 1.0 - static_cast<double>(ones_y) / om_N, static_cast<double>(ones_y) / om_N;
            const cmx::Pmf p_y(pyv);
            const double brute = cmx::brute_force_moment(w, om_alpha, om_xi, om_rate, y, dist);
            const double rate_val = cmx::log_moment_rate(w, om_alpha, om_xi, om_rate, p_y, spec);
            Json payload{{"brute_force", brute}, {"single_letter_rate", rate_val}, {"gap", std::abs(brute - rate_val)}};
            Json config{{"N", om_N}, {"theta", om_theta}, {"alpha", om_alpha}, {"xi", om_xi},
                        {"rate_nats", om_rate}, {"dist", om_dist}, {"y", om_y}};
            std::ostringstream csv;
            csv << "N,theta,alpha,xi,brute_force,rate,gap\n"
                << om_N << ',' << om_theta << ',' << om_alpha << ',' << om_xi << ',' << brute << ',' << rate_val
                << ',' << std::abs(brute - rate_val) << '\n';
            emit(om_out, om_format, "cmx.moment_oracle/1", config, payload, csv.str());
            return kExitOk;
        }

        if (orc_exact->parsed()) {
            if (oe_N > 14) {
                std::cerr << "oracle exact-error: N exceeds the enumeration capacity (N <= 14)\n";
                return kExitCapacity;
            }
            cmx::RngStream rng(oe_seed);
            const cmx::LinearCodeSpec spec =
                cmx::sample_linear(static_cast<std::size_t>(oe_K), static_cast<std::size_t>(oe_N), oe_systematic, rng);
            const double code_rate = static_cast<double>(oe_K) * std::log(2.0) / oe_N;
            cmx::DecoderKind kind;
            if (oe_decoder == "minimax")
                kind = cmx::DecoderKind::minimax(build_family(oe_family), oe_xi, code_rate, cmx::TiePolicy::TieIsError);
            else if (oe_decoder == "rho")
                kind = cmx::DecoderKind::rho(cmx::TiePolicy::TieIsError);
            else if (oe_decoder == "ml")
                kind = cmx::DecoderKind::ml(cmx::bsc(oe_theta), cmx::TiePolicy::TieIsError);
            else {
                std::cerr << "oracle exact-error: unknown --decoder '" << oe_decoder << "'\n";
                return kExitUsage;
            }
            const std::vector<double> pe = cmx::exact_message_error(spec, oe_theta, kind);
            double mx = 0.0, mn = 1.0, avg = 0.0;
            for (double v : pe) {
                mx = std::max(mx, v);
                mn = std::min(mn, v);
                avg += v;
            }
            avg /= static_cast<double>(pe.size());
            Json payload{{"per_message", pe}, {"max", mx}, {"min", mn}, {"average", avg}, {"spread", mx - mn}};
            Json config{{"N", oe_N}, {"K", oe_K}, {"theta", oe_theta}, {"xi", oe_xi},
                        {"systematic", oe_systematic}, {"seed", oe_seed}, {"decoder", oe_decoder},
                        {"code", cmx::to_json(spec)}};
            std::ostringstream csv;
            csv << "message,error_probability\n";
            for (std::size_t m = 0; m < pe.size(); ++m) csv << m << ',' << pe[m] << '\n';
            emit(oe_out, oe_format, "cmx.exact_error/1", config, payload, csv.str());
            return kExitOk;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}
