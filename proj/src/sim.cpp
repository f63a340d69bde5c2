#include "bsca/sim.hpp"

#include "bsca/error.hpp"
#include "bsca/multiout.hpp"
#include "bsca/parallel.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>

namespace bsca {

void SimScenario::validate() const {
    if (beta.rows() < 1 || beta.cols() < 1) fail(ErrorCode::config, "scenario needs J >= 1 and L >= 1");
    if (sigma.rows() != beta.cols() || sigma.cols() != beta.cols())
        fail(ErrorCode::config, "error covariance must be L x L");
    if (!sigma.isApprox(sigma.transpose(), 1e-12)) fail(ErrorCode::config, "error covariance is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) fail(ErrorCode::config, "error covariance is not positive definite");
    if (replicates < 1) fail(ErrorCode::config, "scenario needs at least one replicate");
    if (n < static_cast<std::size_t>(beta.rows()) + 4) fail(ErrorCode::config, "scenario sample size too small");
}

SimScenario preset_scenario(std::string_view id, std::uint64_t master_seed) {
    SimScenario s;
    s.id = std::string(id);
    s.master_seed = master_seed;
    auto row = [](std::initializer_list<double> v) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
        Eigen::Index i = 0;
        for (double x : v) m(i++, 0) = x;
        return m;
    };
    if (id == "1") {
        s.label = "beta = (0)";
        s.beta = row({0.0});
    } else if (id == "2") {
        s.label = "beta = (1)";
        s.beta = row({1.0});
    } else if (id == "3") {
        s.label = "beta = (0, 0, 0, 0, 0, 0)";
        s.beta = row({0, 0, 0, 0, 0, 0});
    } else if (id == "4") {
        s.label = "beta = (0, 0, 0.25, 0.75, 1, 1)";
        s.beta = row({0, 0, 0.25, 0.75, 1, 1});
    } else if (id == "5a" || id == "5b") {
        s.beta = Eigen::MatrixXd::Zero(5, 4);
        if (id == "5b") {
            s.label = "GATE != 0";
            for (Eigen::Index j = 0; j < 3; ++j) s.beta.row(j) << 1.0, 1.0, 1.0, 0.25;
        } else {
            s.label = "GATE = 0";
        }
        s.sigma = Eigen::MatrixXd::Identity(4, 4);
        for (Eigen::Index a = 0; a < 3; ++a)
            for (Eigen::Index b = 0; b < 3; ++b)
                if (a != b) s.sigma(a, b) = 0.9;
        for (Eigen::Index a = 0; a < 3; ++a) s.sigma(a, 3) = s.sigma(3, a) = 0.1;
    } else {
        fail(ErrorCode::config, "unknown scenario '" + std::string(id) + "' (expected 1-5, 5a, 5b or all)");
    }
    if (s.sigma.rows() != s.beta.cols()) s.sigma = Eigen::MatrixXd::Identity(s.beta.cols(), s.beta.cols());
    s.validate();
    return s;
}

std::vector<std::string> expand_scenario_ids(std::string_view id) {
    if (id == "all") return {"1", "2", "3", "4", "5a", "5b"};
    if (id == "5") return {"5a", "5b"};
    return {std::string(id)};
}

SimScenario parse_scenario_json(std::string_view text, std::uint64_t master_seed) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string("scenario file: ") + e.what());
    }
    try {
        SimScenario s;
        s.master_seed = master_seed;
        s.id = j.value("id", std::string("custom"));
        s.label = j.value("label", s.id);
        s.n = j.value("n", std::size_t{1000});
        s.replicates = j.value("replicates", std::size_t{100});
        s.gamma = j.value("gamma", 1.0);
        s.threshold = j.value("threshold", 0.95);
        s.sca_draws = j.value("sca_draws", std::size_t{500});
        s.sca_method = parse_null_method(j.value("sca_method", std::string("bootstrap")));
        const auto& b = j.at("beta");  // J rows, each a list of L effects (or a scalar)
        const auto J = static_cast<Eigen::Index>(b.size());
        const auto L = static_cast<Eigen::Index>(b.at(0).is_array() ? b.at(0).size() : 1);
        s.beta.resize(J, L);
        for (Eigen::Index r = 0; r < J; ++r) {
            const auto& e = b.at(static_cast<std::size_t>(r));
            for (Eigen::Index c = 0; c < L; ++c)
                s.beta(r, c) = e.is_array() ? e.at(static_cast<std::size_t>(c)).get<double>() : e.get<double>();
        }
        if (j.contains("sigma")) {
            const auto& m = j.at("sigma");
            s.sigma.resize(L, L);
            for (Eigen::Index r = 0; r < L; ++r)
                for (Eigen::Index c = 0; c < L; ++c)
                    s.sigma(r, c) = m.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
        } else {
            s.sigma = Eigen::MatrixXd::Identity(L, L);
        }
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::config, std::string("scenario file: ") + e.what());
    }
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        fail(ErrorCode::config, "error covariance is not positive definite");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

Dataset generate(const SimScenario& scenario, std::size_t replicate) {
    const auto n = static_cast<Eigen::Index>(scenario.n);
    const auto J = static_cast<Eigen::Index>(scenario.J());
    const auto L = static_cast<Eigen::Index>(scenario.L());
    Rng rng(derive_seed(scenario.master_seed, replicate));
    std::normal_distribution<double> normal(0.0, 1.0);

    Eigen::MatrixXd X(n, J);
    Eigen::VectorXd z(n);
    Eigen::MatrixXd E(n, L);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < J; ++j) X(i, j) = normal(rng);
        z[i] = X.row(i).mean() + normal(rng);
        for (Eigen::Index l = 0; l < L; ++l) E(i, l) = normal(rng);
    }
    const Eigen::MatrixXd root = symmetric_sqrt(scenario.sigma);
    const Eigen::MatrixXd Y = (X * scenario.beta).colwise() + z + E * root;

    RoleConfig roles;
    std::vector<std::string> names;
    std::vector<Eigen::VectorXd> cols;
    for (Eigen::Index l = 0; l < L; ++l) {
        const std::string name = L == 1 ? "y" : "y" + std::to_string(l + 1);
        roles.outcomes.push_back({name, Family::gaussian});
        names.push_back(name);
        cols.push_back(Y.col(l));
    }
    for (Eigen::Index j = 0; j < J; ++j) {
        const std::string name = "x" + std::to_string(j + 1);
        roles.treatments.push_back({name, TreatmentCoding::identity, 1.0});
        names.push_back(name);
        cols.push_back(X.col(j));
    }
    roles.controls.push_back({"z", false});
    names.push_back("z");
    cols.push_back(z);
    return Dataset(std::move(roles), std::move(names), std::move(cols));
}

namespace {

struct Target {
    std::string name;
    double truth = 0.0;
    LinearCombination combination;  // filled per replicate design
};

struct ReplicateResult {
    bool ok = false;
    std::vector<double> bma_estimate;
    std::vector<char> bma_reject;
    double sca_estimate = 0.0;
    bool sca_reject = false;
};

}  // namespace

SimReport run_scenario(const SimScenario& scenario) {
    scenario.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto J = scenario.J();
    const auto L = scenario.L();
    const bool multi = L > 1;
    const bool with_sca = !multi;

    // Targets: the (global) average effect, then each treatment.
    std::vector<std::string> target_names{multi ? "GATE" : "ATE"};
    std::vector<double> truths{scenario.beta.mean()};
    if (J > 1 || multi)
        for (std::size_t j = 0; j < J; ++j) {
            target_names.push_back("x" + std::to_string(j + 1));
            truths.push_back(scenario.beta.row(static_cast<Eigen::Index>(j)).mean());
        }

    AnalysisOptions opts;
    opts.gamma = scenario.gamma;
    opts.threshold = scenario.threshold;
    opts.draws = 0;  // only means and inclusion probabilities are scored
    opts.subgroup_effects = false;
    SpacePolicy policy;
    policy.treatments_forced = false;

    std::vector<ReplicateResult> results(scenario.replicates);
    parallel_for(scenario.replicates, [&](std::size_t r) {
        ReplicateResult& out = results[r];
        try {
            const Dataset data = generate(scenario, r);
            const CodedDesign design = build_design(data);
            const ModelSpace space(design, policy);
            Eigen::VectorXd m = Eigen::VectorXd::Zero(design.n());
            for (const auto& o : data.roles().outcomes) m += data.column(o.name);
            m /= static_cast<double>(L);
            AnalysisOptions local = opts;
            local.seed = derive_seed(scenario.master_seed, 1'000'000 + r);
            const auto explored = explore(space, m, Family::gaussian, local);

            LinearCombination average;
            for (int col : design.treatment_columns) average.emplace_back(col, 1.0 / static_cast<double>(J));
            DrawOptions none{0, 0, 0.95};
            auto record = [&](const LinearCombination& comb) {
                const auto post = aggregate_linear(explored.models, comb, none);
                out.bma_estimate.push_back(post.mean);
                out.bma_reject.push_back(test_nonzero(post, scenario.threshold).reject ? 1 : 0);
            };
            record(average);
            if (target_names.size() > 1)
                for (int col : design.treatment_columns) record({{col, 1.0}});

            if (with_sca) {
                const auto specs = enumerate_specs(data, design);
                const auto curve = run_curve(specs, data, design);
                MedianTestOptions mt;
                mt.method = scenario.sca_method;
                mt.draws = scenario.sca_draws;
                mt.seed = derive_seed(scenario.master_seed, 2'000'000 + r);
                const auto test = median_test(curve, data, design, mt);
                out.sca_estimate = curve.median;
                out.sca_reject = test.p_value < 0.05;
            }
            out.ok = true;
        } catch (const Error&) {
            out.ok = false;
        }
    });

    SimReport report;
    report.master_seed = scenario.master_seed;
    report.scenario_labels.push_back(scenario.id + ": " + scenario.label);
    std::size_t ok = 0;
    for (const auto& r : results) ok += r.ok ? 1 : 0;
    const std::size_t failed = scenario.replicates - ok;

    auto summarize = [&](const std::string& estimator, const std::string& target, double truth,
                         auto estimate_of, auto reject_of) {
        EstimatorSummary s;
        s.scenario = scenario.id;
        s.estimator = estimator;
        s.target = target;
        s.truth = truth;
        s.replicates = ok;
        s.failed = failed;
        double bias = 0.0, sq = 0.0, rej = 0.0;
        for (const auto& r : results) {
            if (!r.ok) continue;
            const double err = estimate_of(r) - truth;
            bias += err;
            sq += err * err;
            rej += reject_of(r) ? 1.0 : 0.0;
        }
        const double k = static_cast<double>(std::max<std::size_t>(ok, 1));
        s.bias = bias / k;
        s.rmse = std::sqrt(sq / k);
        s.rejection_rate = rej / k;
        report.rows.push_back(s);
    };

    summarize("BMA", target_names[0], truths[0],
              [](const ReplicateResult& r) { return r.bma_estimate[0]; },
              [](const ReplicateResult& r) { return r.bma_reject[0] != 0; });
    if (with_sca)
        summarize("SCA", target_names[0], truths[0],
                  [](const ReplicateResult& r) { return r.sca_estimate; },
                  [](const ReplicateResult& r) { return r.sca_reject; });
    for (std::size_t t = 1; t < target_names.size(); ++t)
        summarize("BMA", target_names[t], truths[t],
                  [t](const ReplicateResult& r) { return r.bma_estimate[t]; },
                  [t](const ReplicateResult& r) { return r.bma_reject[t] != 0; });

    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

void append_report(SimReport& into, const SimReport& from) {
    into.rows.insert(into.rows.end(), from.rows.begin(), from.rows.end());
    into.scenario_labels.insert(into.scenario_labels.end(), from.scenario_labels.begin(),
                                from.scenario_labels.end());
    into.master_seed = from.master_seed;
    into.runtime_seconds += from.runtime_seconds;
}

namespace {

constexpr const char* kReportHeader = "Scenario,Estimator,Target,Truth,Bias,RMSE,RejectionRate,Replicates,Failed";

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string report_csv(const SimReport& report) {
    std::ostringstream out;
    out << kReportHeader << '\n';
    for (const auto& r : report.rows)
        out << csv_escape(r.scenario) << ',' << csv_escape(r.estimator) << ',' << csv_escape(r.target) << ','
            << exact(r.truth) << ',' << exact(r.bias) << ',' << exact(r.rmse) << ','
            << exact(r.rejection_rate) << ',' << r.replicates << ',' << r.failed << '\n';
    return out.str();
}

std::vector<EstimatorSummary> parse_report_csv(std::string_view text) {
    const auto rows = parse_csv_rows(text);
    if (rows.empty()) fail(ErrorCode::parse, "simulation table is empty");
    std::string header;
    for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
    if (header != kReportHeader) fail(ErrorCode::parse, "unexpected simulation table header");
    std::vector<EstimatorSummary> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (f.size() != 9) fail(ErrorCode::parse, "simulation table row " + std::to_string(r + 1) + " malformed");
        try {
            EstimatorSummary s;
            s.scenario = f[0];
            s.estimator = f[1];
            s.target = f[2];
            s.truth = std::stod(f[3]);
            s.bias = std::stod(f[4]);
            s.rmse = std::stod(f[5]);
            s.rejection_rate = std::stod(f[6]);
            s.replicates = std::stoul(f[7]);
            s.failed = std::stoul(f[8]);
            out.push_back(std::move(s));
        } catch (const std::logic_error&) {
            fail(ErrorCode::parse, "non-numeric field in simulation table row " + std::to_string(r + 1));
        }
    }
    return out;
}

std::string report_text(const SimReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    out << "Bias and root mean squared error\n";
    out << std::left << std::setw(10) << "Scenario" << std::setw(11) << "Estimator" << std::setw(8)
        << "Target" << std::right << std::setw(9) << "Bias" << std::setw(9) << "RMSE" << std::setw(11)
        << "Rejection" << '\n';
    for (const auto& r : report.rows) {
        if (r.target != "ATE" && r.target != "GATE") continue;
        out << std::left << std::setw(10) << r.scenario << std::setw(11) << r.estimator << std::setw(8)
            << r.target << std::right << std::setw(9) << r.bias << std::setw(9) << r.rmse << std::setw(11)
            << r.rejection_rate << '\n';
    }

    // Per-coefficient tables, one per scenario with treatment-level rows.
    std::vector<std::string> order;
    std::map<std::string, std::vector<const EstimatorSummary*>> by_scenario;
    for (const auto& r : report.rows) {
        if (r.target == "ATE" || r.target == "GATE") continue;
        if (!by_scenario.count(r.scenario)) order.push_back(r.scenario);
        by_scenario[r.scenario].push_back(&r);
    }
    for (const auto& sc : order) {
        const auto& rows = by_scenario[sc];
        out << "\nIndividual coefficients, scenario " << sc << " (BMA)\n" << std::left << std::setw(20) << "";
        out << std::right;
        for (const auto* r : rows) out << std::setw(9) << r->target;
        out << '\n' << std::left << std::setw(20) << "Bias" << std::right;
        for (const auto* r : rows) out << std::setw(9) << r->bias;
        out << '\n' << std::left << std::setw(20) << "RMSE" << std::right;
        for (const auto* r : rows) out << std::setw(9) << r->rmse;
        out << '\n' << std::left << std::setw(20) << "Proportion rejected" << std::right;
        for (const auto* r : rows) out << std::setw(9) << r->rejection_rate;
        out << '\n';
    }
    out << "\nScenarios:";
    for (const auto& l : report.scenario_labels) out << "\n  " << l;
    out << "\nMaster seed: " << report.master_seed << '\n';
    if (report.runtime_seconds > 0.0)
        out << "Runtime (s): " << std::setprecision(1) << report.runtime_seconds << '\n';
    return out.str();
}

const EstimatorSummary* find_row(const SimReport& report, std::string_view scenario,
                                 std::string_view estimator, std::string_view target) {
    for (const auto& r : report.rows)
        if (r.scenario == scenario && r.estimator == estimator && r.target == target) return &r;
    return nullptr;
}

}  // namespace bsca
