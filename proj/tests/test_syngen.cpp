#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "delirisk/cohort.hpp"
#include "delirisk/errors.hpp"
#include "delirisk/eval.hpp"
#include "delirisk/syngen.hpp"

using namespace delirisk;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("generate: deterministic down to the bytes") {
    SynthConfig cfg;
    cfg.n_patients = 120;
    cfg.seed = 7;
    auto a = generate(cfg);
    auto b = generate(cfg);
    CHECK(a.dataset == b.dataset);
    REQUIRE(a.ground_truth.size() == b.ground_truth.size());
    for (std::size_t i = 0; i < a.ground_truth.size(); ++i) {
        CHECK(a.ground_truth[i].true_risk == b.ground_truth[i].true_risk);
        CHECK(a.ground_truth[i].label == b.ground_truth[i].label);
    }

    fs::path dir = fs::temp_directory_path() / "delirisk-syn-test";
    fs::create_directories(dir);
    save_dataset(a.dataset, (dir / "p1.csv").string(), (dir / "a1.csv").string(),
                 (dir / "d1.csv").string());
    save_dataset(b.dataset, (dir / "p2.csv").string(), (dir / "a2.csv").string(),
                 (dir / "d2.csv").string());
    CHECK(slurp(dir / "p1.csv") == slurp(dir / "p2.csv"));
    CHECK(slurp(dir / "a1.csv") == slurp(dir / "a2.csv"));
    CHECK(slurp(dir / "d1.csv") == slurp(dir / "d2.csv"));
    fs::remove_all(dir);

    SynthConfig other = cfg;
    other.seed = 8;
    CHECK_FALSE(generate(other).dataset == a.dataset);
}

TEST_CASE("generate: degenerate configurations") {
    SynthConfig cfg;
    cfg.n_patients = 80;
    cfg.seed = 3;
    cfg.baseline_logit = -1e9;
    cfg.w_cci = 0.0;
    cfg.w_age = 0.0;
    cfg.w_diabetes_cc = 0.0;
    cfg.w_mci = 0.0;
    auto quiet = generate(cfg);
    for (const auto& row : quiet.ground_truth) {
        CHECK_FALSE(row.label);
        CHECK(row.true_risk == 0.0);
    }

    SynthConfig all_mci;
    all_mci.n_patients = 50;
    all_mci.seed = 4;
    all_mci.mci_prevalence = 1.0;
    auto everyone = generate(all_mci);
    auto crit = default_criteria();
    int mci_codes = 0;
    for (const auto& p : everyone.dataset.patients) {
        bool has = false;
        for (const auto& adm : p.admissions)
            for (const auto& dx : adm.diagnoses) has |= code_matches(crit.mci, dx);
        mci_codes += has ? 1 : 0;
    }
    CHECK(mci_codes == 50);
}

TEST_CASE("generate: output survives load with no warnings") {
    SynthConfig cfg;
    cfg.n_patients = 100;
    cfg.seed = 11;
    auto r = generate(cfg);
    fs::path dir = fs::temp_directory_path() / "delirisk-syn-load";
    fs::create_directories(dir);
    save_dataset(r.dataset, (dir / "p.csv").string(), (dir / "a.csv").string(),
                 (dir / "d.csv").string(), "determinism check");
    auto loaded = load_dataset((dir / "p.csv").string(), (dir / "a.csv").string(),
                               (dir / "d.csv").string());
    CHECK(loaded.warnings.empty());
    CHECK(loaded == r.dataset);
    fs::remove_all(dir);
}

TEST_CASE("generate: realized prevalence tracks the integrated risk") {
    SynthConfig cfg;  // defaults, seed 42
    auto r = generate(cfg);
    double risk_sum = 0.0;
    double labels = 0.0;
    for (const auto& row : r.ground_truth) {
        risk_sum += row.true_risk;
        labels += row.label ? 1.0 : 0.0;
    }
    double expected = risk_sum / static_cast<double>(r.ground_truth.size());
    double realized = labels / static_cast<double>(r.ground_truth.size());
    CHECK(realized == doctest::Approx(expected).epsilon(0.2));
    CHECK(realized > 0.05);  // the signal exists at all
}

TEST_CASE("generate: ground-truth risk ranks the realized labels") {
    SynthConfig cfg;  // defaults, seed 42
    auto r = generate(cfg);
    ScoredSet s;
    for (const auto& row : r.ground_truth) {
        s.scores.push_back(row.true_risk);
        s.labels.push_back(row.label ? 1 : 0);
    }
    CHECK(auroc(s) >= 0.95);
}

TEST_CASE("generate: config validation") {
    SynthConfig cfg;
    cfg.n_patients = 0;
    CHECK_THROWS_AS(generate(cfg), InputError);
    cfg = SynthConfig{};
    cfg.mci_prevalence = 1.5;
    CHECK_THROWS_AS(generate(cfg), InputError);
}
