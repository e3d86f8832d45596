// Command-line interface for the gsdr library: simulate / fit / cv /
// benchmark / predict with CSV input and output.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "gsdr/gsdr.hpp"

namespace {

using namespace gsdr;

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

void machine_error(int code, const std::string& kind, const std::string& message) {
    std::cerr << "{\"error\":{\"code\":" << code << ",\"kind\":\"" << kind << "\",\"message\":\""
              << json_escape(message) << "\"}}\n";
}

struct CommonOptions {
    std::string method = "gsksir1";
    int q = 2;
    double lambda = 1e-2;
    double h1 = 0.0, h2 = 0.0, h3 = 0.0, h4 = 0.0;  // 0 = automatic
    double sigma = 0.0;                              // 0 = median heuristic
    int max_iters = 30;
    double tol = 1e-4;
    std::uint64_t seed = 1;
    int slices = 10;
    double ksir_ridge = 1e-3;
    int workers = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--method", method, "estimator")
            ->check(CLI::IsMember({"gsksir1", "gsksir2", "gsksave", "ksir"}))
            ->capture_default_str();
        cmd->add_option("--q", q, "reduced dimension")->check(CLI::Range(1, 1000))
            ->capture_default_str();
        cmd->add_option("--lambda", lambda, "penalty weight")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        cmd->add_option("--h1", h1, "response bandwidth (default auto)");
        cmd->add_option("--h2", h2, "projected-feature bandwidth (default auto)");
        cmd->add_option("--h3", h3, "second response bandwidth (default auto)");
        cmd->add_option("--h4", h4, "second projected-feature bandwidth (default auto)");
        cmd->add_option("--sigma", sigma, "gaussian kernel scale (default median heuristic)");
        cmd->add_option("--max-iters", max_iters, "optimizer iteration cap")
            ->check(CLI::Range(1, 100000))
            ->capture_default_str();
        cmd->add_option("--tol", tol, "relative decrease tolerance")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--seed", seed, "random seed")->capture_default_str();
        cmd->add_option("--slices", slices, "KSIR initialization slices")
            ->check(CLI::Range(2, 1000))
            ->capture_default_str();
        cmd->add_option("--ksir-ridge", ksir_ridge, "KSIR eigenproblem ridge")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--workers", workers, "worker threads")
            ->check(CLI::Range(1, 256))
            ->capture_default_str();
    }

    FitConfig to_config() const {
        FitConfig cfg;
        cfg.method = fit_method_from_string(method);
        cfg.q = q;
        cfg.lambda = lambda;
        if (h1 > 0) cfg.h1 = BandwidthSpec::fixed(h1);
        if (h2 > 0) cfg.h2 = BandwidthSpec::fixed(h2);
        if (h3 > 0) cfg.h3 = BandwidthSpec::fixed(h3);
        if (h4 > 0) cfg.h4 = BandwidthSpec::fixed(h4);
        if (sigma > 0) cfg.kernel = KernelSpec{KernelFamily::gaussian, sigma, 2, 1.0};
        cfg.max_iters = max_iters;
        cfg.tol = tol;
        cfg.seed = seed;
        cfg.slices = slices;
        cfg.ksir_ridge = ksir_ridge;
        cfg.threads = workers;
        return cfg;
    }

    void print(std::ostream& os) const {
        os << "method=" << method << "\nq=" << q << "\nlambda=" << format_double(lambda)
           << "\nh1=" << format_double(h1) << "\nh2=" << format_double(h2)
           << "\nh3=" << format_double(h3) << "\nh4=" << format_double(h4)
           << "\nsigma=" << format_double(sigma) << "\nmax-iters=" << max_iters
           << "\ntol=" << format_double(tol) << "\nseed=" << seed << "\nslices=" << slices
           << "\nksir-ridge=" << format_double(ksir_ridge) << "\nworkers=" << workers << "\n";
    }
};

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, ',')) {
        if (cur.empty()) continue;
        grid.push_back(std::stod(cur));
    }
    if (grid.empty()) throw input_error("empty lambda grid '" + text + "'");
    return grid;
}

std::vector<FitMethod> parse_methods(const std::string& text) {
    std::vector<FitMethod> methods;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, ',')) {
        if (cur.empty()) continue;
        methods.push_back(fit_method_from_string(cur));
    }
    if (methods.empty()) throw input_error("empty method list '" + text + "'");
    return methods;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write file '" + path + "'");
    for (const auto& line : lines) out << line << "\n";
    if (!out) throw input_error("failed writing '" + path + "'");
}

int cmd_simulate(const std::string& case_name, int n, int p, std::uint64_t seed,
                 const std::string& output) {
    SimCase sc{sim_case_from_string(case_name), n, p, seed};
    SimData sim = generate(sc);

    Matrix data(n, p + 1);
    data.leftCols(p) = sim.data.X;
    data.col(p) = sim.data.y;
    std::vector<std::string> header = sim.data.predictor_names;
    header.push_back("y");
    write_matrix_csv(output + "_data.csv", header, data, 17);
    write_matrix_csv(output + "_utrue.csv", {"u1", "u2"}, sim.u_true.transpose(), 17);
    std::cout << "wrote " << output << "_data.csv and " << output << "_utrue.csv\n";
    return 0;
}

int cmd_fit(const std::string& input, const std::string& response, const CommonOptions& opt,
            const std::string& output) {
    DataSet ds = load_csv(input, response);
    FitResult res = fit(ds, opt.to_config());

    std::vector<std::string> c_header, u_header;
    for (int j = 1; j <= opt.q; ++j) {
        c_header.push_back("c" + std::to_string(j));
        u_header.push_back("u" + std::to_string(j));
    }
    write_matrix_csv(output + "_C.csv", c_header, res.C);
    write_matrix_csv(output + "_features.csv", u_header, res.features.transpose());

    std::vector<std::string> trace{"iter,objective"};
    for (std::size_t i = 0; i < res.objective_trace.size(); ++i)
        trace.push_back(std::to_string(i) + "," + format_double(res.objective_trace[i]));
    write_lines(output + "_trace.csv", trace);

    std::vector<std::string> summary;
    summary.push_back("method=" + opt.method);
    summary.push_back("q=" + std::to_string(opt.q));
    summary.push_back("n=" + std::to_string(ds.n()));
    summary.push_back("p=" + std::to_string(ds.p()));
    summary.push_back("lambda=" + format_double(res.lambda_used));
    summary.push_back("sigma=" + format_double(res.kernel_used.sigma));
    summary.push_back("h1=" + format_double(res.h1_used));
    summary.push_back("h2=" + format_double(res.h2_used));
    summary.push_back("h3=" + format_double(res.h3_used));
    summary.push_back("h4=" + format_double(res.h4_used));
    summary.push_back("iterations=" + std::to_string(res.iterations));
    summary.push_back(std::string("converged=") + (res.converged ? "true" : "false"));
    if (!res.objective_trace.empty()) {
        summary.push_back("objective_initial=" + format_double(res.objective_trace.front()));
        summary.push_back("objective_final=" + format_double(res.objective_trace.back()));
    }
    write_lines(output + "_summary.txt", summary);
    std::cout << "wrote " << output << "_{C,features,trace}.csv and " << output
              << "_summary.txt\n";
    return 0;
}

int cmd_cv(const std::string& input, const std::string& response, const CommonOptions& opt,
           const std::string& grid_text, int folds, const std::string& criterion,
           const std::string& output) {
    DataSet ds = load_csv(input, response);
    std::vector<double> grid = parse_grid(grid_text);
    CvCriterion crit = criterion == "prediction" ? CvCriterion::prediction : CvCriterion::kcca;
    CvReport report = cv_select_lambda(ds, opt.to_config(), grid, folds, crit);

    std::vector<std::string> lines{"lambda,score,folds,selected"};
    for (std::size_t i = 0; i < report.lambda_grid.size(); ++i) {
        lines.push_back(format_double(report.lambda_grid[i]) + "," +
                        format_double(report.scores[i]) + "," + std::to_string(folds) + "," +
                        (report.lambda_grid[i] == report.best_lambda ? "1" : "0"));
    }
    write_lines(output, lines);
    std::cout << "best lambda: " << format_double(report.best_lambda) << "\n";
    return 0;
}

int cmd_benchmark(const std::string& case_name, int n, int p, int reps,
                  const std::string& methods_text, const CommonOptions& opt,
                  const std::string& output) {
    SimCase sc{sim_case_from_string(case_name), n, p, opt.seed};
    std::vector<FitMethod> methods = parse_methods(methods_text);
    auto rows = run_benchmark(sc, methods, reps, opt.to_config(), opt.workers);

    std::vector<std::string> lines{"case,p,method,mean_rbar2,sd_rbar2,reps,failures"};
    for (const auto& row : rows) {
        lines.push_back(std::string(to_string(row.case_id)) + "," + std::to_string(row.p) + "," +
                        row.method + "," + format_double(row.mean_rbar2) + "," +
                        format_double(row.sd_rbar2) + "," + std::to_string(row.reps) + "," +
                        std::to_string(row.failures));
    }
    write_lines(output, lines);
    for (const auto& line : lines) std::cout << line << "\n";
    return 0;
}

int cmd_predict(const std::string& input, const std::string& response, const CommonOptions& opt,
                int folds, double ridge_reg, const std::string& output) {
    DataSet ds = load_csv(input, response);
    FitConfig cfg = opt.to_config();
    if (folds < 2) throw input_error("predict: need at least 2 folds");
    if (ds.n() / folds < cfg.q + 2) throw input_error("predict: folds leave too few points");

    std::vector<int> fold_of = detail::stratified_folds(ds.y, folds, cfg.seed);
    std::vector<std::string> lines{"fold,pmae,pmae_baseline"};
    double total = 0.0, total_baseline = 0.0;
    for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> train_rows, test_rows;
        for (Eigen::Index i = 0; i < ds.n(); ++i)
            (fold_of[i] == f ? test_rows : train_rows).push_back(i);
        DataSet train = detail::subset(ds, train_rows);
        DataSet test = detail::subset(ds, test_rows);

        FitResult fitted = fit(train, cfg);
        Matrix Rcross = cross_gram(train.X, test.X, fitted.kernel_used);
        Matrix U_test = transform(fitted, Rcross);
        KernelRidgeModel krr = kernel_ridge_fit(fitted.features, train.y, ridge_reg);
        Vector pred = kernel_ridge_predict(krr, U_test);

        double err = pmae(test.y, pred);
        double baseline = pmae(test.y, Vector::Constant(test.y.size(), train.y.mean()));
        total += err;
        total_baseline += baseline;
        lines.push_back(std::to_string(f + 1) + "," + format_double(err) + "," +
                        format_double(baseline));
    }
    lines.push_back("mean," + format_double(total / folds) + "," +
                    format_double(total_baseline / folds));
    write_lines(output, lines);
    std::cout << "mean PMAE: " << format_double(total / folds)
              << " (baseline " << format_double(total_baseline / folds) << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear sufficient dimension reduction (GS-KSIR / GS-KSAVE)"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic benchmark dataset");
    std::string sim_case = "case2", sim_output = "sim";
    int sim_n = 200, sim_p = 10;
    std::uint64_t sim_seed = 1;
    bool sim_print = false;
    sim->add_option("--case", sim_case, "case1|case2|case3")
        ->check(CLI::IsMember({"case1", "case2", "case3"}))
        ->capture_default_str();
    sim->add_option("--n", sim_n, "sample size")->check(CLI::Range(2, 10000000))
        ->capture_default_str();
    sim->add_option("--p", sim_p, "covariate dimension (>= 10)")
        ->check(CLI::Range(10, 100000))
        ->capture_default_str();
    sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
    sim->add_option("--output", sim_output, "output prefix")->capture_default_str();
    sim->add_flag("--print-config", sim_print, "print resolved options and exit");
    sim->set_config("--config");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "estimate reduction directions from a CSV file");
    std::string fit_input, fit_response = "y", fit_output = "fit";
    CommonOptions fit_opt;
    bool fit_print = false;
    fit_cmd->add_option("--input", fit_input, "input CSV")->required();
    fit_cmd->add_option("--response", fit_response, "response column")->capture_default_str();
    fit_cmd->add_option("--output", fit_output, "output prefix")->capture_default_str();
    fit_opt.attach(fit_cmd);
    fit_cmd->add_flag("--print-config", fit_print, "print resolved options and exit");
    fit_cmd->set_config("--config");

    // cv
    auto* cv_cmd = app.add_subcommand("cv", "cross-validate the penalty weight");
    std::string cv_input, cv_response = "y", cv_output = "cv.csv";
    std::string cv_grid = "1e-4,1e-2,1";
    std::string cv_criterion = "kcca";
    int cv_folds = 5;
    CommonOptions cv_opt;
    bool cv_print = false;
    cv_cmd->add_option("--input", cv_input, "input CSV")->required();
    cv_cmd->add_option("--response", cv_response, "response column")->capture_default_str();
    cv_cmd->add_option("--lambda-grid", cv_grid, "comma-separated grid")->capture_default_str();
    cv_cmd->add_option("--folds", cv_folds, "fold count")->check(CLI::Range(2, 1000))
        ->capture_default_str();
    cv_cmd->add_option("--criterion", cv_criterion, "kcca|prediction")
        ->check(CLI::IsMember({"kcca", "prediction"}))
        ->capture_default_str();
    cv_cmd->add_option("--output", cv_output, "output CSV")->capture_default_str();
    cv_opt.attach(cv_cmd);
    cv_cmd->add_flag("--print-config", cv_print, "print resolved options and exit");
    cv_cmd->set_config("--config");

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "replicate the simulation study");
    std::string bench_case = "case2", bench_methods = "ksir,gsksir1",
                bench_output = "benchmark.csv";
    int bench_n = 200, bench_p = 10, bench_reps = 10;
    CommonOptions bench_opt;
    bool bench_print = false;
    bench->add_option("--case", bench_case, "case1|case2|case3")
        ->check(CLI::IsMember({"case1", "case2", "case3"}))
        ->capture_default_str();
    bench->add_option("--n", bench_n, "sample size per rep")->check(CLI::Range(2, 10000000))
        ->capture_default_str();
    bench->add_option("--p", bench_p, "covariate dimension")->check(CLI::Range(10, 100000))
        ->capture_default_str();
    bench->add_option("--reps", bench_reps, "replications")->check(CLI::Range(1, 100000))
        ->capture_default_str();
    bench->add_option("--methods", bench_methods, "comma-separated method list")
        ->capture_default_str();
    bench->add_option("--output", bench_output, "output CSV")->capture_default_str();
    bench_opt.attach(bench);
    bench->add_flag("--print-config", bench_print, "print resolved options and exit");
    bench->set_config("--config");

    // predict
    auto* pred = app.add_subcommand("predict", "reduced-feature kernel-ridge prediction error");
    std::string pred_input, pred_response = "y", pred_output = "predict.csv";
    int pred_folds = 5;
    double pred_reg = 1e-3;
    CommonOptions pred_opt;
    bool pred_print = false;
    pred->add_option("--input", pred_input, "input CSV")->required();
    pred->add_option("--response", pred_response, "response column")->capture_default_str();
    pred->add_option("--folds", pred_folds, "fold count")->check(CLI::Range(2, 1000))
        ->capture_default_str();
    pred->add_option("--ridge-reg", pred_reg, "kernel ridge regularization")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    pred->add_option("--output", pred_output, "output CSV")->capture_default_str();
    pred_opt.attach(pred);
    pred->add_flag("--print-config", pred_print, "print resolved options and exit");
    pred->set_config("--config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        if (rc == 0) return 0;
        machine_error(1, "usage", e.what());
        return 1;
    }

    try {
        if (sim->parsed()) {
            if (sim_print) {
                std::cout << "case=" << sim_case << "\nn=" << sim_n << "\np=" << sim_p
                          << "\nseed=" << sim_seed << "\noutput=" << sim_output << "\n";
                return 0;
            }
            return cmd_simulate(sim_case, sim_n, sim_p, sim_seed, sim_output);
        }
        if (fit_cmd->parsed()) {
            if (fit_print) {
                std::cout << "input=" << fit_input << "\nresponse=" << fit_response
                          << "\noutput=" << fit_output << "\n";
                fit_opt.print(std::cout);
                return 0;
            }
            return cmd_fit(fit_input, fit_response, fit_opt, fit_output);
        }
        if (cv_cmd->parsed()) {
            if (cv_print) {
                std::cout << "input=" << cv_input << "\nresponse=" << cv_response
                          << "\nlambda-grid=" << cv_grid << "\nfolds=" << cv_folds
                          << "\ncriterion=" << cv_criterion << "\noutput=" << cv_output << "\n";
                cv_opt.print(std::cout);
                return 0;
            }
            return cmd_cv(cv_input, cv_response, cv_opt, cv_grid, cv_folds, cv_criterion,
                          cv_output);
        }
        if (bench->parsed()) {
            if (bench_print) {
                std::cout << "case=" << bench_case << "\nn=" << bench_n << "\np=" << bench_p
                          << "\nreps=" << bench_reps << "\nmethods=" << bench_methods
                          << "\noutput=" << bench_output << "\n";
                bench_opt.print(std::cout);
                return 0;
            }
            return cmd_benchmark(bench_case, bench_n, bench_p, bench_reps, bench_methods,
                                 bench_opt, bench_output);
        }
        if (pred->parsed()) {
            if (pred_print) {
                std::cout << "input=" << pred_input << "\nresponse=" << pred_response
                          << "\nfolds=" << pred_folds << "\nridge-reg=" << format_double(pred_reg)
                          << "\noutput=" << pred_output << "\n";
                pred_opt.print(std::cout);
                return 0;
            }
            return cmd_predict(pred_input, pred_response, pred_opt, pred_folds, pred_reg,
                               pred_output);
        }
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        machine_error(2, "data", e.what());
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        machine_error(3, "numeric", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        machine_error(3, "internal", e.what());
        return 3;
    }
    return 0;
}
