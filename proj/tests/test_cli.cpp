// End-to-end smoke tests of the CLI binary (subprocess invocations).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(HUF_CLI_BIN) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    if (status < 0) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path work_dir() {
    fs::path dir = fs::temp_directory_path() / "huf_cli_work";
    return dir;
}

void write_tiny_config(const fs::path& path, const std::string& out_dir) {
    std::ofstream out(path);
    out << R"({
  "dataset": {
    "source": "synthetic",
    "synthetic": {"n_units": 2, "classes": 2, "windows_per_class": 6,
                   "window_size": 64, "noise_std": 0.05, "seed": 11, "n_subjects": 4}
  },
  "split": {"fraction": 0.7, "seed": 2},
  "model": {
    "dr_sae": {"channels": [2, 4], "share_weights": true},
    "lff": {"channels": [6, 6, 6, 4]},
    "gff": {"channels": [6, 6, 6, 4]},
    "classifier": {"hidden": [8, 8]}
  },
  "training": {
    "dr_sae": {"min_epochs": 1, "max_epochs": 2},
    "lff": {"min_epochs": 1, "max_epochs": 2},
    "gff": {"min_epochs": 1, "max_epochs": 2},
    "classifier": {"epochs": 3}
  },
  "seed": 21,
  "out": ")" << out_dir << R"("
})";
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST_CASE("cli: no subcommand fails") {
    CHECK(run_cli("") != 0);
}

TEST_CASE("cli synth: writes corpus + ground truth, deterministic, validates first") {
    fs::path dir = work_dir();
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::path cfg = dir / "synth.json";
    {
        std::ofstream out(cfg);
        out << R"({"dataset": {"source": "synthetic",
                    "synthetic": {"n_units": 2, "classes": 2, "windows_per_class": 3,
                                   "window_size": 16, "seed": 5, "n_subjects": 2}}})";
    }
    CHECK(run_cli("synth --config " + cfg.string() + " --out " + (dir / "a").string()) == 0);
    CHECK(fs::exists(dir / "a" / "corpus.csv"));
    CHECK(fs::exists(dir / "a" / "ground_truth.json"));
    // row count = classes * windows_per_class * window_size (+ header)
    CHECK(count_lines(dir / "a" / "corpus.csv") == 2 * 3 * 16 + 1);

    // same seed twice -> byte-identical files
    CHECK(run_cli("synth --config " + cfg.string() + " --out " + (dir / "b").string()) == 0);
    CHECK(slurp(dir / "a" / "corpus.csv") == slurp(dir / "b" / "corpus.csv"));
    CHECK(slurp(dir / "a" / "ground_truth.json") == slurp(dir / "b" / "ground_truth.json"));

    // invalid class count: config error before any file is written
    fs::path bad = dir / "bad.json";
    {
        std::ofstream out(bad);
        out << R"({"dataset": {"source": "synthetic", "synthetic": {"classes": 0}}})";
    }
    CHECK(run_cli("synth --config " + bad.string() + " --out " + (dir / "c").string()) == 2);
    CHECK_FALSE(fs::exists(dir / "c" / "corpus.csv"));
}

TEST_CASE("cli train/eval/analyze: full tiny run") {
    fs::path dir = work_dir() / "train";
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::path cfg = dir / "run.json";
    fs::path out = dir / "out";
    write_tiny_config(cfg, out.string());

    // stage-order violation: no checkpoint yet
    CHECK(run_cli("train --config " + cfg.string() + " --stage gff") == 2);

    CHECK(run_cli("train --config " + cfg.string()) == 0);
    CHECK(fs::exists(out / "checkpoint" / "manifest.json"));
    CHECK(fs::exists(out / "checkpoint" / "params.bin"));
    CHECK(fs::exists(out / "config.json"));
    CHECK(fs::exists(out / "eval_report.json"));
    CHECK(fs::exists(out / "train.log"));
    CHECK(fs::exists(out / "curves" / "classifier.csv"));

    // resume from the classifier boundary
    CHECK(run_cli("train --config " + cfg.string() + " --stage classifier") == 0);

    // eval with and without masking
    CHECK(run_cli("eval --config " + cfg.string()) == 0);
    CHECK(fs::exists(out / "confusion.csv"));
    CHECK(run_cli("eval --config " + cfg.string() + " --mask-unit 1") == 0);
    CHECK(fs::exists(out / "eval_report_mask1.json"));
    CHECK(run_cli("eval --config " + cfg.string() + " --mask-unit 99") == 2);

    // missing checkpoint directory is a data error
    CHECK(run_cli("eval --config " + cfg.string() + " --checkpoint " +
                  (dir / "nowhere").string()) == 3);

    // analyze: fir equivalence on the trained tiny encoder
    CHECK(run_cli("analyze --config " + cfg.string() + " fir --check") == 0);

    // analyze: deterministic spectra
    CHECK(run_cli("analyze --config " + cfg.string() + " --out " + (dir / "s1").string() +
                  " --checkpoint " + (out / "checkpoint").string() +
                  " spectrum --paths 3 --seed 7") == 0);
    CHECK(run_cli("analyze --config " + cfg.string() + " --out " + (dir / "s2").string() +
                  " --checkpoint " + (out / "checkpoint").string() +
                  " spectrum --paths 3 --seed 7") == 0);
    for (int p = 0; p < 3; ++p) {
        fs::path f1 = dir / "s1" / ("spectrum_seed7_path" + std::to_string(p) + ".csv");
        fs::path f2 = dir / "s2" / ("spectrum_seed7_path" + std::to_string(p) + ".csv");
        REQUIRE(fs::exists(f1));
        CHECK(slurp(f1) == slurp(f2));
    }

    // analyze: feature dump
    CHECK(run_cli("analyze --config " + cfg.string() + " --out " + (dir / "f").string() +
                  " --checkpoint " + (out / "checkpoint").string() +
                  " features --window 0 --channels 2") == 0);
    CHECK(fs::exists(dir / "f" / "features_window0.csv"));

    fs::remove_all(work_dir());
}
